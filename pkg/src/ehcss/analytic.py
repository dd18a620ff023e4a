"""Closed-form and quadrature evaluation of the four outage expressions.

The primary user's signal reaches PR only through the energy-harvesting
secondary transmitter ST; ST then spends the rest of phase 2 on its own
link to SR. For each (protocol, relaying) combination the outage pair is

* DF:  primary   = 1 - P(decode) * P(g1 g2 > Z1)
       secondary = 1 - P(decode) * P(g1 g3 > Z2)
* AF:  primary   = af_outage_integral(a, b, psi_relay)
       secondary = P(g1 g3 <= Z2)

The DF products treat decoding at ST and the onward hop as independent
events even though both depend on g1. ``df_form="joint"`` evaluates the
exact probabilities instead, conditioning both events on g1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from ehcss import specialfn
from ehcss.channel import LinkStats, SystemParams, derive_link_stats
from ehcss.errors import DomainError
from ehcss.specialfn import DEFAULT_QUAD, QuadratureSpec

__all__ = [
    "Protocol",
    "Relaying",
    "ProtocolPoint",
    "OutagePair",
    "DerivedThresholds",
    "DF_FORMS",
    "rate_threshold",
    "thresholds_for",
    "outage_ts_df",
    "outage_ts_af",
    "outage_ps_df",
    "outage_ps_af",
    "evaluate",
]

DF_FORMS = ("factorized", "joint")


class Protocol(str, Enum):
    TS = "TS"
    PS = "PS"


class Relaying(str, Enum):
    DF = "DF"
    AF = "AF"


@dataclass(frozen=True)
class ProtocolPoint:
    """One operating point: protocol, relaying mode and the two split ratios.

    ``alpha`` is the share of ST's transmit slot given to relaying the
    primary signal; ``beta`` the harvesting share (of time under TS, of
    received power under PS).
    """

    protocol: Protocol
    relaying: Relaying
    alpha: float
    beta: float

    def __post_init__(self):
        try:
            for name, kind in (("protocol", Protocol), ("relaying", Relaying)):
                value = getattr(self, name)
                if not isinstance(value, kind):
                    value = kind(str(value).strip().upper())
                object.__setattr__(self, name, value)
        except ValueError as exc:
            raise DomainError(str(exc)) from None
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise DomainError(f"{name} must lie strictly inside (0, 1), got {value!r}")

    @property
    def label(self) -> str:
        return f"{self.protocol.value}-{self.relaying.value}"

    def with_(self, **changes) -> "ProtocolPoint":
        fields = dict(protocol=self.protocol, relaying=self.relaying,
                      alpha=self.alpha, beta=self.beta)
        fields.update(changes)
        return ProtocolPoint(**fields)


@dataclass(frozen=True)
class OutagePair:
    p_primary: float
    p_secondary: float

    def __post_init__(self):
        for name in ("p_primary", "p_secondary"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} = {value!r} is not a probability")
            object.__setattr__(self, name, value)

    def __iter__(self):
        yield self.p_primary
        yield self.p_secondary


@dataclass(frozen=True)
class DerivedThresholds:
    """Per-point constants of the outage expressions.

    SNR thresholds are named by the link they gate:

    psi_decode
        PT-ST decoding at ST (DF only).
    psi_relay
        ST-PR, the primary destination.
    psi_secondary
        ST-SR, the secondary destination.

    ``a`` and ``b`` multiply g1*g2 and g1 in the relay-hop and ST
    receive SNRs. ``c`` multiplies g1*g3 in the SR SNR. ``y1`` is the
    normalized lower limit on g1/theta1: the decode threshold for DF, the
    AF integration limit ``psi_relay / (b theta1)`` for AF. ``z1`` and
    ``z2`` are the product thresholds on g1*g2 and g1*g3.
    """

    psi_decode: float
    psi_relay: float
    psi_secondary: float
    y1: float
    z1: float
    z2: float
    a: float
    b: float
    c: float


def rate_threshold(rate: float, duration: float) -> float:
    """SNR needed to carry ``rate`` over a slot of length ``duration``.

    Returns ``2**(rate / duration) - 1``; ``duration`` already includes the
    1/2 of the two-phase split. Saturates to ``inf`` instead of overflowing.
    """
    exponent = rate / duration * math.log(2.0)
    if exponent > 700.0:
        return math.inf
    return math.expm1(exponent)


def _slot_durations(point: ProtocolPoint, T: float) -> tuple[float, float, float]:
    """(decode, relay, secondary) durations within a block of length T."""
    alpha, beta = point.alpha, point.beta
    if point.protocol is Protocol.TS:
        half = (1.0 - beta) * T / 2.0
    else:
        half = T / 2.0
    return half, alpha * half, (1.0 - alpha) * half


def _snr_coefficients(point: ProtocolPoint, params: SystemParams) -> tuple[float, float, float]:
    """(a, b, c) with SNR_PR = a g1 g2, SNR_ST = b g1, SNR_SR = c g1 g3."""
    alpha, beta, eta, Pp = point.alpha, point.beta, params.eta, params.Pp
    if point.protocol is Protocol.TS:
        # energy harvested over beta*T, spent over the (1-beta)T/2 transmit slot
        harvest = 2.0 * eta * Pp * beta / (1.0 - beta)
        b = Pp / params.s11
    else:
        harvest = eta * Pp * beta
        b = (1.0 - beta) * Pp / params.s11
    a = harvest / (alpha * params.s22)
    c = harvest / ((1.0 - alpha) * params.s32)
    return a, b, c


def thresholds_for(point: ProtocolPoint, params: SystemParams,
                   stats: LinkStats | None = None) -> DerivedThresholds:
    stats = stats or derive_link_stats(params)
    t_dec, t_relay, t_sec = _slot_durations(point, params.T)
    psi_decode = rate_threshold(params.Rp, t_dec)
    psi_relay = rate_threshold(params.Rp, t_relay)
    psi_secondary = rate_threshold(params.Rs, t_sec)
    a, b, c = _snr_coefficients(point, params)
    theta1 = stats.theta[0]
    if point.relaying is Relaying.DF:
        y1 = psi_decode / (b * theta1)
    else:
        y1 = psi_relay / (b * theta1)
    return DerivedThresholds(
        psi_decode=psi_decode, psi_relay=psi_relay, psi_secondary=psi_secondary,
        y1=y1, z1=psi_relay / a, z2=psi_secondary / c, a=a, b=b, c=c)


def _require(point: ProtocolPoint, protocol: Protocol, relaying: Relaying):
    if point.protocol is not protocol or point.relaying is not relaying:
        raise DomainError(
            f"expected a {protocol.value}-{relaying.value} point, got {point.label}")


def _df_outage(point, params, stats, quad, df_form) -> OutagePair:
    if df_form not in DF_FORMS:
        raise DomainError(f"df_form must be one of {DF_FORMS}, got {df_form!r}")
    stats = stats or derive_link_stats(params)
    th = thresholds_for(point, params, stats)
    m, (t1, t2, t3, _) = params.m, stats.theta
    if math.isinf(th.y1):
        return OutagePair(1.0, 1.0)

    def success(theta_b, z):
        if math.isinf(z):
            return 0.0
        if df_form == "joint":
            return specialfn.gamma_product_sf_above(m, t1, theta_b, z, th.y1 * t1, quad)
        decoded = specialfn.reg_upper_gamma(m, th.y1)
        return decoded * (1.0 - specialfn.gamma_product_cdf(m, t1, theta_b, z, quad))

    return OutagePair(1.0 - success(t2, th.z1), 1.0 - success(t3, th.z2))


def _af_outage(point, params, stats, quad) -> OutagePair:
    stats = stats or derive_link_stats(params)
    th = thresholds_for(point, params, stats)
    m, (t1, t2, t3, _) = params.m, stats.theta
    if math.isinf(th.psi_relay):
        p1 = 1.0
    else:
        p1 = specialfn.af_outage_integral(m, t1, t2, th.a, th.b, th.psi_relay, quad)
    p2 = 1.0 if math.isinf(th.z2) else specialfn.gamma_product_cdf(m, t1, t3, th.z2, quad)
    return OutagePair(p1, p2)


def outage_ts_df(point: ProtocolPoint, params: SystemParams, stats: LinkStats | None = None,
                 *, quad: QuadratureSpec = DEFAULT_QUAD, df_form: str = "factorized") -> OutagePair:
    """Time-splitting, decode-and-forward outage pair.

    With ``df_form="factorized"`` (default)::

        p_primary   = 1 - (1 - P(m, Y1)) (1 - F(m, theta1, theta2, Z1))
        p_secondary = 1 - (1 - P(m, Y1)) (1 - F(m, theta1, theta3, Z2))

    where F is :func:`~ehcss.specialfn.gamma_product_cdf`.
    """
    _require(point, Protocol.TS, Relaying.DF)
    return _df_outage(point, params, stats, quad, df_form)


def outage_ts_af(point: ProtocolPoint, params: SystemParams, stats: LinkStats | None = None,
                 *, quad: QuadratureSpec = DEFAULT_QUAD) -> OutagePair:
    """Time-splitting, amplify-and-forward outage pair.

    The secondary outage has no decoding factor: an AF relay always
    transmits in phase 2.
    """
    _require(point, Protocol.TS, Relaying.AF)
    return _af_outage(point, params, stats, quad)


def outage_ps_df(point: ProtocolPoint, params: SystemParams, stats: LinkStats | None = None,
                 *, quad: QuadratureSpec = DEFAULT_QUAD, df_form: str = "factorized") -> OutagePair:
    """Power-splitting, decode-and-forward outage pair (same form as TS-DF)."""
    _require(point, Protocol.PS, Relaying.DF)
    return _df_outage(point, params, stats, quad, df_form)


def outage_ps_af(point: ProtocolPoint, params: SystemParams, stats: LinkStats | None = None,
                 *, quad: QuadratureSpec = DEFAULT_QUAD) -> OutagePair:
    """Power-splitting, amplify-and-forward outage pair.

    The integration limit is psi_relay / (b theta1) with b = (1-beta) Pp / sigma2_11,
    i.e. the ST receive SNR includes the (1-beta) power share.
    """
    _require(point, Protocol.PS, Relaying.AF)
    return _af_outage(point, params, stats, quad)


_DISPATCH = {
    (Protocol.TS, Relaying.DF): outage_ts_df,
    (Protocol.TS, Relaying.AF): outage_ts_af,
    (Protocol.PS, Relaying.DF): outage_ps_df,
    (Protocol.PS, Relaying.AF): outage_ps_af,
}


def evaluate(point: ProtocolPoint, params: SystemParams, *,
             quad: QuadratureSpec = DEFAULT_QUAD, df_form: str = "factorized") -> OutagePair:
    """Analytic outage pair for any protocol/relaying combination."""
    fn = _DISPATCH[(point.protocol, point.relaying)]
    stats = derive_link_stats(params)
    if point.relaying is Relaying.DF:
        return fn(point, params, stats, quad=quad, df_form=df_form)
    return fn(point, params, stats, quad=quad)
