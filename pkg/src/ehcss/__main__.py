import sys

from ehcss.cli import main

sys.exit(main())
