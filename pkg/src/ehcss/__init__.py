"""Outage analysis of energy-harvesting cooperative spectrum sharing.

A secondary transmitter harvests energy from the primary signal, relays it
(decode-forward or amplify-forward) and uses the remaining slot for its own
traffic. Two receiver designs are covered: time splitting (TS) and power
splitting (PS) between harvesting and decoding.
"""

__version__ = "0.1.0"

from ehcss.analytic import OutagePair, Protocol, ProtocolPoint, Relaying, evaluate  # noqa: E402
from ehcss.channel import SystemParams, derive_link_stats  # noqa: E402
from ehcss.montecarlo import estimate_outage  # noqa: E402

__all__ = [
    "OutagePair",
    "Protocol",
    "ProtocolPoint",
    "Relaying",
    "SystemParams",
    "derive_link_stats",
    "estimate_outage",
    "evaluate",
]
