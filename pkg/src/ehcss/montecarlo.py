"""Realization-level simulation of the four relaying algorithms.

Every trial draws the four link gains, forms the instantaneous SNRs from
the harvested energy and slot lengths, and compares achieved rates against
the thresholds. A link succeeds only if its rate strictly exceeds the
threshold.

Trials run in chunks of ``CHUNK_SIZE``; chunk ``k`` uses substream
``(seed, k)``. Results are therefore a pure function of
``(seed, trials)`` regardless of how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ehcss.analytic import Protocol, ProtocolPoint, Relaying
from ehcss.channel import ChannelDraw, SystemParams, derive_link_stats, make_rng, sample_draws
from ehcss.errors import DomainError

__all__ = [
    "CHUNK_SIZE",
    "OutageEstimate",
    "TrialOutcome",
    "SimulationCounts",
    "run_trial",
    "simulate_counts",
    "estimate_outage",
]

CHUNK_SIZE = 2 ** 16


@dataclass(frozen=True)
class OutageEstimate:
    """Bernoulli-mean estimate of an outage probability."""

    p_hat: float
    std_err: float
    trials: int
    seed: int
    count: int

    @classmethod
    def from_count(cls, count: int, trials: int, seed: int) -> "OutageEstimate":
        p = count / trials
        return cls(p_hat=p, std_err=math.sqrt(p * (1.0 - p) / trials),
                   trials=trials, seed=seed, count=count)


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial outage flags; bool scalars or bool arrays for a batch."""

    primary_outage: np.ndarray
    secondary_outage: np.ndarray
    st_decoded: np.ndarray


class SimulationCounts(NamedTuple):
    trials: int
    primary: int
    secondary: int
    decode_failures: int


def _rate(duration, snr):
    return duration * np.log2(1.0 + snr)


def run_trial(point: ProtocolPoint, params: SystemParams, draw: ChannelDraw) -> TrialOutcome:
    """Outcome of one block (or a batch of blocks) for the given draw."""
    g1, g2, g3 = draw.gamma[0], draw.gamma[1], draw.gamma[2]
    alpha, beta, T = point.alpha, point.beta, params.T
    Pp, eta = params.Pp, params.eta
    s11, s22, s32 = params.s11, params.s22, params.s32

    if point.protocol is Protocol.TS:
        t_dec = (1.0 - beta) * T / 2.0
        t_pr = alpha * t_dec
        t_sr = (1.0 - alpha) * t_dec
        energy = eta * Pp * g1 * beta * T
        snr_st = Pp * g1 / s11
    else:
        t_dec = T / 2.0
        t_pr = alpha * T / 2.0
        t_sr = (1.0 - alpha) * T / 2.0
        energy = eta * beta * Pp * g1 * T / 2.0
        snr_st = (1.0 - beta) * Pp * g1 / s11

    p_r1 = energy / t_pr
    p_r2 = energy / t_sr
    snr_hop = p_r1 * g2 / s22
    snr_sr = p_r2 * g3 / s32
    sr_ok = _rate(t_sr, snr_sr) > params.Rs

    if point.relaying is Relaying.DF:
        decoded = _rate(t_dec, snr_st) > params.Rp
        pr_ok = _rate(t_pr, snr_hop) > params.Rp
        return TrialOutcome(primary_outage=~(decoded & pr_ok),
                            secondary_outage=~(decoded & sr_ok),
                            st_decoded=decoded)

    # AF: the relay forwards its noisy observation under a power constraint
    snr_pr = snr_hop * snr_st / (snr_hop + snr_st + 1.0)
    pr_ok = _rate(t_pr, snr_pr) > params.Rp
    return TrialOutcome(primary_outage=~pr_ok, secondary_outage=~sr_ok,
                        st_decoded=np.ones_like(pr_ok))


def _chunk_counts(args) -> tuple[int, int, int]:
    point, params, seed, index, n = args
    stats = derive_link_stats(params)
    draw = sample_draws(stats, params.m, n, make_rng(seed, index))
    out = run_trial(point, params, draw)
    return (int(np.count_nonzero(out.primary_outage)),
            int(np.count_nonzero(out.secondary_outage)),
            int(np.count_nonzero(~out.st_decoded)))


def _chunks(trials: int, chunk_size: int):
    for index, start in enumerate(range(0, trials, chunk_size)):
        yield index, min(chunk_size, trials - start)


def simulate_counts(point: ProtocolPoint, params: SystemParams, trials: int, seed: int,
                    *, workers: int = 1) -> SimulationCounts:
    """Raw outage counts over ``trials`` blocks."""
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    trials = int(trials)
    jobs = [(point, params, seed, i, n) for i, n in _chunks(trials, CHUNK_SIZE)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_counts, jobs))
    else:
        results = [_chunk_counts(job) for job in jobs]
    p, s, d = (sum(col) for col in zip(*results))
    return SimulationCounts(trials, p, s, d)


def estimate_outage(point: ProtocolPoint, params: SystemParams, trials: int, seed: int,
                    *, workers: int = 1) -> tuple[OutageEstimate, OutageEstimate]:
    """(primary, secondary) outage estimates from ``trials`` independent blocks."""
    counts = simulate_counts(point, params, trials, seed, workers=workers)
    return (OutageEstimate.from_count(counts.primary, counts.trials, seed),
            OutageEstimate.from_count(counts.secondary, counts.trials, seed))
