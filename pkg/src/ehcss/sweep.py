"""Parameter sweeps, crossing-point and optimum search, protocol comparison."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import optimize

from ehcss import analytic, montecarlo
from ehcss.analytic import OutagePair, Protocol, ProtocolPoint, Relaying
from ehcss.channel import SystemParams
from ehcss.errors import BracketError, DomainError, QuadratureError
from ehcss.specialfn import DEFAULT_QUAD, QuadratureSpec

__all__ = [
    "SweepVariable",
    "Engine",
    "Objective",
    "SweepSpec",
    "SweepRow",
    "BetaOptimum",
    "ComparisonRow",
    "DISTANCE_RANGE",
    "run_sweep",
    "find_alpha_crossing",
    "optimize_beta",
    "compare_protocols",
]

# relay position d along the PT-PR segment of length 2
DISTANCE_RANGE = (0.1, 1.9)


class SweepVariable(str, Enum):
    ALPHA = "alpha"
    BETA = "beta"
    ETA = "eta"
    DISTANCE_D = "distance_d"
    SNR_DB = "snr_db"


class Engine(str, Enum):
    ANALYTIC = "analytic"
    MONTECARLO = "montecarlo"
    BOTH = "both"


class Objective(str, Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    MAX_OF_BOTH = "max_of_both"


def _check_in_domain(variable: SweepVariable, x: float):
    if variable in (SweepVariable.ALPHA, SweepVariable.BETA):
        ok = 0 < x < 1
    elif variable is SweepVariable.ETA:
        ok = 0 < x <= 1
    elif variable is SweepVariable.DISTANCE_D:
        ok = DISTANCE_RANGE[0] <= x <= DISTANCE_RANGE[1]
    else:
        ok = math.isfinite(x)
    if not ok:
        raise DomainError(f"{variable.value}={x!r} is outside its legal domain")


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVariable
    grid: tuple[float, ...]
    fixed_point: ProtocolPoint
    fixed_params: SystemParams = field(default_factory=SystemParams)
    engine: Engine = Engine.ANALYTIC
    trials: int | None = None
    seed: int | None = None
    df_form: str = "factorized"
    quad: QuadratureSpec = DEFAULT_QUAD
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variable", SweepVariable(self.variable))
        object.__setattr__(self, "engine", Engine(self.engine))
        grid = tuple(float(x) for x in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise DomainError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("sweep grid must be strictly increasing")
        for x in grid:
            _check_in_domain(self.variable, x)
        if self.engine is not Engine.ANALYTIC:
            if self.trials is None or self.trials < 1:
                raise DomainError("Monte Carlo sweeps need a positive trial count")
            if self.seed is None:
                raise DomainError("Monte Carlo sweeps need an explicit seed")

    def point_at(self, x: float) -> ProtocolPoint:
        if self.variable is SweepVariable.ALPHA:
            return self.fixed_point.with_(alpha=x)
        if self.variable is SweepVariable.BETA:
            return self.fixed_point.with_(beta=x)
        return self.fixed_point

    def params_at(self, x: float) -> SystemParams:
        p = self.fixed_params
        if self.variable is SweepVariable.ETA:
            return p.with_(eta=x)
        if self.variable is SweepVariable.SNR_DB:
            return p.with_(snr_db=x)
        if self.variable is SweepVariable.DISTANCE_D:
            return p.with_(d1=x, d2=2.0 - x)
        return p


@dataclass(frozen=True)
class SweepRow:
    x: float
    p_primary: float
    p_secondary: float
    p_primary_err: float = 0.0
    p_secondary_err: float = 0.0
    engine: str = Engine.ANALYTIC.value


def _rows_at(spec: SweepSpec, x: float) -> list[SweepRow]:
    point, params = spec.point_at(x), spec.params_at(x)
    rows = []
    try:
        if spec.engine in (Engine.ANALYTIC, Engine.BOTH):
            pair = analytic.evaluate(point, params, quad=spec.quad, df_form=spec.df_form)
            rows.append(SweepRow(x, pair.p_primary, pair.p_secondary))
        if spec.engine in (Engine.MONTECARLO, Engine.BOTH):
            prim, sec = montecarlo.estimate_outage(point, params, spec.trials, spec.seed)
            rows.append(SweepRow(x, prim.p_hat, sec.p_hat, prim.std_err, sec.std_err,
                                 Engine.MONTECARLO.value))
    except (DomainError, QuadratureError) as exc:
        raise type(exc)(f"at {spec.variable.value}={x!r}: {exc}") from exc
    return rows


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate the spec's engine(s) at every grid value, in grid order.

    Monte Carlo rows reuse ``spec.seed`` at every grid value, so each row
    equals a direct :func:`~ehcss.montecarlo.estimate_outage` call.
    """
    if spec.workers > 1 and len(spec.grid) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            per_x = list(pool.map(_rows_at, [spec] * len(spec.grid), spec.grid))
    else:
        per_x = [_rows_at(spec, x) for x in spec.grid]
    return [row for rows in per_x for row in rows]


def find_alpha_crossing(beta: float, point_template: ProtocolPoint, params: SystemParams,
                        tol: float = 1e-4, *, bracket: tuple[float, float] = (0.01, 0.99),
                        engine: str = "analytic", trials: int | None = None,
                        seed: int | None = None, df_form: str = "factorized",
                        quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Time share alpha at which primary and secondary outage are equal.

    Bisection on ``p_primary(alpha) - p_secondary(alpha)``, which falls from
    positive to negative as alpha grows. The Monte Carlo engine uses one seed
    for every alpha (common random numbers) and refuses ``tol < 0.01``,
    since the estimated difference is only resolved to a few standard errors.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    engine = Engine(engine)
    if engine is Engine.MONTECARLO:
        if trials is None or seed is None:
            raise DomainError("Monte Carlo crossing search needs explicit trials and seed")
        if tol < 0.01:
            raise DomainError("Monte Carlo crossing search needs tol >= 0.01")
    elif engine is not Engine.ANALYTIC:
        raise DomainError("crossing search runs on a single engine")

    def gap(alpha: float) -> float:
        point = point_template.with_(alpha=alpha, beta=beta)
        if engine is Engine.ANALYTIC:
            p1, p2 = analytic.evaluate(point, params, quad=quad, df_form=df_form)
        else:
            e1, e2 = montecarlo.estimate_outage(point, params, trials, seed)
            p1, p2 = e1.p_hat, e2.p_hat
        return p1 - p2

    lo, hi = bracket
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        raise BracketError(
            f"no sign change of p_primary - p_secondary on [{lo}, {hi}] "
            f"({g_lo:.3g}, {g_hi:.3g})")
    return float(optimize.bisect(gap, lo, hi, xtol=tol))


class BetaOptimum(NamedTuple):
    beta: float
    value: float
    at_boundary: bool


def _scalarize(objective: Objective) -> Callable[[OutagePair], float]:
    if objective is Objective.PRIMARY:
        return lambda pair: pair.p_primary
    if objective is Objective.SECONDARY:
        return lambda pair: pair.p_secondary
    return lambda pair: max(pair.p_primary, pair.p_secondary)


def optimize_beta(point_template: ProtocolPoint, params: SystemParams,
                  objective: str = "max_of_both", *, interval: tuple[float, float] = (0.02, 0.98),
                  grid_points: int = 33, xtol: float = 1e-5, df_form: str = "factorized",
                  quad: QuadratureSpec = DEFAULT_QUAD) -> BetaOptimum:
    """Harvesting share beta minimizing the chosen outage objective.

    A uniform grid over ``interval`` locates the best cell; golden-section
    search then refines inside the neighbouring grid cells. A minimum on the
    edge of the interval is returned as-is with ``at_boundary=True``.
    """
    score = _scalarize(Objective(objective))

    def f(beta: float) -> float:
        pair = analytic.evaluate(point_template.with_(beta=beta), params,
                                 quad=quad, df_form=df_form)
        return score(pair)

    grid = np.linspace(interval[0], interval[1], grid_points)
    values = np.array([f(b) for b in grid])
    k = int(np.argmin(values))
    if k == 0 or k == len(grid) - 1:
        return BetaOptimum(float(grid[k]), float(values[k]), True)
    a, b, c = grid[k - 1], grid[k], grid[k + 1]
    if not (values[k] < values[k - 1] and values[k] < values[k + 1]):
        # flat neighbourhood: no bracket to refine
        return BetaOptimum(float(b), float(values[k]), False)
    res = optimize.minimize_scalar(f, bracket=(a, b, c), method="golden",
                                   options={"xtol": xtol})
    beta_star, value = float(res.x), float(res.fun)
    if value > values[k]:
        beta_star, value = float(b), float(values[k])
    return BetaOptimum(beta_star, value, False)


class ComparisonRow(NamedTuple):
    snr_db: float
    ts: OutagePair
    ps: OutagePair


def compare_protocols(alpha: float, beta: float, params: SystemParams,
                      snr_grid: Sequence[float], *, quad: QuadratureSpec = DEFAULT_QUAD
                      ) -> list[ComparisonRow]:
    """TS against PS in amplify-forward mode over a transmit-SNR grid."""
    if len(snr_grid) == 0:
        raise DomainError("snr grid is empty")
    ts = ProtocolPoint(Protocol.TS, Relaying.AF, alpha, beta)
    ps = ProtocolPoint(Protocol.PS, Relaying.AF, alpha, beta)
    rows = []
    for snr_db in snr_grid:
        p = params.with_(snr_db=float(snr_db))
        rows.append(ComparisonRow(float(snr_db), analytic.evaluate(ts, p, quad=quad),
                                  analytic.evaluate(ps, p, quad=quad)))
    return rows
