"""Link geometry, Nakagami-m / Gamma link statistics and channel sampling.

Links are indexed 1..4 as PT-ST, ST-PR, ST-SR and PT-SR. Only the power
gains gamma_i = |h_i|^2 enter the rate expressions, so those are sampled
directly from Gamma(m, theta_i) with theta_i = d_i^-v / m.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ehcss.errors import DomainError

__all__ = [
    "SystemParams",
    "LinkStats",
    "ChannelDraw",
    "derive_link_stats",
    "make_rng",
    "sample_draw",
    "sample_draws",
]


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration of the four-node network.

    ``snr_db`` is the transmit SNR P_p / sigma^2 against a unit reference
    noise power. ``noise_variances`` holds (sigma2_11, sigma2_22, sigma2_32,
    sigma2_42) relative to that reference: PT-ST in phase 1, then ST-PR,
    ST-SR and PT-SR in phase 2.
    """

    snr_db: float = 40.0
    m: float = 1.0
    eta: float = 1.0
    v: float = 3.0
    d1: float = 1.0
    d2: float = 1.0
    d3: float = 0.5
    d4: float = 0.5
    Rp: float = 1.0
    Rs: float = 1.0
    T: float = 1.0
    noise_variances: tuple[float, float, float, float] = field(default=(1.0, 1.0, 1.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "noise_variances",
                           tuple(float(s) for s in self.noise_variances))
        if len(self.noise_variances) != 4:
            raise DomainError("noise_variances needs exactly four entries")
        if not math.isfinite(self.snr_db):
            raise DomainError(f"snr_db must be finite, got {self.snr_db!r}")
        if not 0 < self.eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta!r}")
        for name in ("m", "v", "d1", "d2", "d3", "d4", "Rp", "Rs", "T"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not all(s > 0 and math.isfinite(s) for s in self.noise_variances):
            raise DomainError(f"noise variances must be positive, got {self.noise_variances!r}")

    @property
    def Pp(self) -> float:
        """Primary transmit power in units of the reference noise power."""
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def distances(self) -> tuple[float, float, float, float]:
        return (self.d1, self.d2, self.d3, self.d4)

    @property
    def s11(self) -> float:
        return self.noise_variances[0]

    @property
    def s22(self) -> float:
        return self.noise_variances[1]

    @property
    def s32(self) -> float:
        return self.noise_variances[2]

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise_variances"] = list(self.noise_variances)
        return d


@dataclass(frozen=True)
class LinkStats:
    """Mean power ``omega`` and Gamma scale ``theta`` of each link."""

    omega: tuple[float, float, float, float]
    theta: tuple[float, float, float, float]


@dataclass(frozen=True)
class ChannelDraw:
    """Instantaneous power gains; ``gamma`` has shape (4,) or (4, n)."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape[0] != 4:
            raise DomainError(f"expected four link gains, got shape {g.shape}")
        if np.any(g < 0):
            raise DomainError("channel gains must be nonnegative")
        object.__setattr__(self, "gamma", g)

    def __len__(self):
        return 1 if self.gamma.ndim == 1 else self.gamma.shape[1]


def derive_link_stats(params: SystemParams) -> LinkStats:
    omega = tuple(d ** (-params.v) for d in params.distances)
    theta = tuple(o / params.m for o in omega)
    return LinkStats(omega=omega, theta=theta)


def make_rng(seed: int, stream: int | tuple[int, ...] = ()) -> np.random.Generator:
    """Deterministic generator for ``(seed, stream)``.

    Distinct stream ids give statistically independent substreams of one
    seed (``SeedSequence`` spawn keys).
    """
    key = (stream,) if isinstance(stream, int) else tuple(stream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_draws(stats: LinkStats, m: float, n: int, rng: np.random.Generator) -> ChannelDraw:
    """Draw ``n`` independent realizations of all four link gains.

    numpy's Gamma sampler (Marsaglia-Tsang rejection, boosted for m < 1)
    covers every positive shape.
    """
    if not m > 0:
        raise DomainError(f"shape m must be positive, got {m!r}")
    theta = np.asarray(stats.theta, dtype=float)[:, None]
    return ChannelDraw(rng.gamma(m, theta, size=(4, int(n))))


def sample_draw(stats: LinkStats, m: float, rng: np.random.Generator) -> ChannelDraw:
    """A single realization, shape (4,)."""
    return ChannelDraw(sample_draws(stats, m, 1, rng).gamma[:, 0])
