"""Special functions behind the outage expressions.

Incomplete gamma ratios come from :mod:`scipy.special` (Cephes uses the
usual series / continued-fraction split). The product-of-Gammas CDF and the
amplify-forward outage integral are evaluated here by adaptive quadrature in
log-space, with semi-infinite ranges truncated where the Gamma(m, 1)
envelope has less than ``tail_cutoff_mass`` probability left.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, special

from ehcss.errors import DomainError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "gamma_product_cdf",
    "gamma_product_sf_above",
    "af_outage_integral",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for every quadrature in the package.

    ``tail_cutoff_mass`` is the probability mass each truncated tail of a
    semi-infinite domain may discard.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2048
    tail_cutoff_mass: float = 1e-13

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")
        if not (0 < self.tail_cutoff_mass < 1e-10):
            raise DomainError("tail_cutoff_mass must lie in (0, 1e-10)")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        """Same tolerances with ``factor`` times the subdivision budget."""
        return QuadratureSpec(self.abs_tol, self.rel_tol, self.max_subdivisions * factor,
                              self.tail_cutoff_mass)


DEFAULT_QUAD = QuadratureSpec()


def _check_gamma_args(m, x):
    if not m > 0:
        raise DomainError(f"shape m must be positive, got {m!r}")
    if np.any(np.asarray(x) < 0) or np.any(np.isnan(x)):
        raise DomainError(f"argument x must be nonnegative, got {x!r}")


def reg_lower_gamma(m: float, x):
    """Regularized lower incomplete gamma P(m, x) = γ(m, x) / Γ(m)."""
    _check_gamma_args(m, x)
    out = special.gammainc(m, x)
    return float(out) if np.ndim(out) == 0 else out


def reg_upper_gamma(m: float, x):
    """Regularized upper incomplete gamma Q(m, x) = 1 - P(m, x).

    Evaluated directly (not as ``1 - P``) so the tail keeps full relative
    precision for large ``x``.
    """
    _check_gamma_args(m, x)
    out = special.gammaincc(m, x)
    return float(out) if np.ndim(out) == 0 else out


def _log_unit_gamma_pdf(m: float, u):
    # log density of Gamma(m, 1) at u > 0
    return (m - 1.0) * np.log(u) - u - special.gammaln(m)


def _unit_gamma_support(m: float, quad: QuadratureSpec) -> tuple[float, float]:
    """Interval of Gamma(m, 1) outside of which each tail holds < cutoff/2."""
    half = 0.5 * quad.tail_cutoff_mass
    lo = float(special.gammaincinv(m, half))
    hi = float(special.gammainccinv(m, half))
    # gammaincinv underflows to 0 for small shapes; the mass below the
    # smallest normal double is negligible at any shape we accept
    return max(lo, 1e-300), hi


def _integrate(f: Callable[[float], float], lo: float, hi: float,
               quad: QuadratureSpec, points: Iterable[float] = ()) -> float:
    pts = sorted({p for p in points if lo < p < hi})
    if len(pts) >= quad.max_subdivisions:
        # QUADPACK needs more subintervals than breakpoints
        pts = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, lo, hi, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                             limit=int(quad.max_subdivisions), points=pts or None,
                             full_output=1)
    value, err = res[0], res[1]
    if not math.isfinite(value):
        raise QuadratureError(f"non-finite quadrature result on [{lo}, {hi}]")
    if len(res) > 3 and err > max(quad.abs_tol, quad.rel_tol * abs(value)):
        raise QuadratureError(
            f"quadrature on [{lo:.3g}, {hi:.3g}] stopped at error {err:.3g}: {res[3]}")
    return value


def _as_probability(p: float, quad: QuadratureSpec, what: str) -> float:
    slack = quad.abs_tol + quad.tail_cutoff_mass
    if p < -slack or p > 1.0 + slack:
        raise QuadratureError(f"{what} = {p!r} lies outside [0, 1] beyond tolerance")
    return min(max(p, 0.0), 1.0)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not (value > 0) or not math.isfinite(value):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")


def gamma_product_cdf(m: float, theta_a: float, theta_b: float, z: float,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """CDF of X*Y for independent X ~ Gamma(m, theta_a), Y ~ Gamma(m, theta_b).

    Computes ``P(X*Y <= z)`` as the single integral over the normalized
    variable u = X/theta_a::

        int_0^inf f(u) P(m, w/u) du,   w = z / (theta_a * theta_b)

    with f the Gamma(m, 1) density, integrated in t = log u.
    """
    _check_positive(m=m, theta_a=theta_a, theta_b=theta_b)
    if not z >= 0:
        raise DomainError(f"z must be nonnegative, got {z!r}")
    if z == 0:
        return 0.0
    w = z / (theta_a * theta_b)
    if math.isinf(w):
        return 1.0
    u_lo, u_hi = _unit_gamma_support(m, quad)
    lgm = special.gammaln(m)

    def integrand(t):
        u = math.exp(t)
        return math.exp(m * t - u - lgm) * special.gammainc(m, w / u)

    # mass below u_lo is counted in full since P(m, w/u) <= 1 there
    head = special.gammainc(m, u_lo)
    body = _integrate(integrand, math.log(u_lo), math.log(u_hi), quad,
                      points=(math.log(w), math.log(m)))
    return _as_probability(head + body, quad, "gamma_product_cdf")


def gamma_product_sf_above(m: float, theta_a: float, theta_b: float, z: float,
                           x_floor: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Joint tail ``P(X > x_floor, X*Y > z)`` for the Gamma pair above.

    This is the success probability of a decode-then-relay chain whose two
    events share the first-hop gain X.
    """
    _check_positive(m=m, theta_a=theta_a, theta_b=theta_b)
    if not (z >= 0 and x_floor >= 0):
        raise DomainError("z and x_floor must be nonnegative")
    w = z / (theta_a * theta_b)
    u_lo, u_hi = _unit_gamma_support(m, quad)
    u_min = max(x_floor / theta_a, u_lo)
    if u_min >= u_hi:
        return 0.0
    lgm = special.gammaln(m)

    def integrand(t):
        u = math.exp(t)
        return math.exp(m * t - u - lgm) * special.gammaincc(m, w / u)

    value = _integrate(integrand, math.log(u_min), math.log(u_hi), quad,
                       points=(math.log(w) if w > 0 else -math.inf, math.log(m)))
    return _as_probability(value, quad, "gamma_product_sf_above")


def af_outage_integral(m: float, theta1: float, theta2: float, a: float, b: float,
                       psi1: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Primary outage of an amplify-forward hop with an energy-harvesting relay.

    Evaluates::

        1 - int_{Y1}^inf f(y) Q(m, g(y)) dy,  Y1 = psi1 / (b theta1)
        g(y) = psi1 (b theta1 y + 1) / (theta1 theta2 (a b theta1 y^2 - psi1 a y))

    where f is the Gamma(m, 1) density and Q the regularized upper gamma.
    ``g`` diverges at ``Y1``; the integral runs over log(y - Y1) so the
    boundary layer gets resolved, and the vanishing factor
    ``b theta1 y - psi1 = b theta1 (y - Y1)`` is formed without cancellation.
    """
    _check_positive(m=m, theta1=theta1, theta2=theta2, a=a, b=b, psi1=psi1)
    bt1 = b * theta1
    y1 = psi1 / bt1
    _, u_hi = _unit_gamma_support(m, quad)
    if y1 >= u_hi:
        return 1.0
    lgm = special.gammaln(m)

    # sup of the density on [y1, inf) bounds the mass skipped next to y1
    mode = max(m - 1.0, y1)
    sup_pdf = math.exp(_log_unit_gamma_pdf(m, mode)) if m >= 1 else math.exp(
        _log_unit_gamma_pdf(m, y1))
    s_lo = 0.5 * quad.tail_cutoff_mass / max(sup_pdf, 1.0)
    s_hi = u_hi - y1

    def integrand(t):
        s = math.exp(t)
        y = y1 + s
        inner = psi1 * (bt1 * y + 1.0) / (theta1 * theta2 * a * y * bt1 * s)
        if not inner > 0:
            raise DomainError(f"inner gamma argument {inner!r} is not positive at y={y!r}")
        return math.exp(_log_unit_gamma_pdf(m, y)) * special.gammaincc(m, inner) * s

    # boundary-layer width: where g(y) falls to about m
    s_layer = psi1 * (bt1 * y1 + 1.0) / (theta1 * theta2 * a * max(y1, 1e-300) * bt1 * m)
    points = [math.log(s_layer)] if math.isfinite(s_layer) and s_layer > 0 else []
    if m - 1.0 > y1:
        points.append(math.log(m - 1.0 - y1))
    value = _integrate(integrand, math.log(s_lo), math.log(s_hi), quad, points=points)
    return _as_probability(1.0 - value, quad, "af_outage_integral")
