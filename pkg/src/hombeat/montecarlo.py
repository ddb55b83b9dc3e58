"""Seeded simulation of HOM experiments and estimator precision studies.

Random numbers come from numpy's PCG64 bit generator. Repetition ``i`` of a
study seeded with ``s`` draws from ``SeedSequence([s, i])``, so results do
not depend on execution order. Multinomial counts are drawn as sequential
conditional binomials: two-click first, then one-click among the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import physics
from .estimation import (
    CountRecord,
    EstimationError,
    mle_closed_form,
    mle_numeric,
    monotone_bracket,
)
from .fringe import FringeScan
from .information import cr_bound, fisher_information, qcr_bound
from .physics import BiphotonState, ChannelParams, OutcomeProbs


@dataclass(frozen=True)
class TrialConfig:
    n_events: int
    n_repetitions: int
    seed: int
    tau_true: float

    def __post_init__(self):
        if self.n_events < 1 or self.n_repetitions < 1:
            raise ValueError("n_events and n_repetitions must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PrecisionReport:
    """Aggregate of a precision study.

    ``empirical_std`` and ``efficiency_ratio`` are ``None`` when fewer than
    two repetitions succeeded; ``bias`` is then the single-draw residual.
    """

    mean_estimate: float
    empirical_std: Optional[float]
    bias: float
    cr_bound: float
    qcr_bound: float
    efficiency_ratio: Optional[float]
    failure_count: int
    n_success: int
    fisher: float


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seed))


def sample_counts(probs: OutcomeProbs, n_events: int, seed) -> CountRecord:
    """Draw multinomial (N0, N1, N2) for ``n_events`` pairs."""
    rng = make_rng(seed)
    p0, p1, p2 = (float(p) for p in (probs.p0, probs.p1, probs.p2))
    n2 = int(rng.binomial(n_events, min(max(p2, 0.0), 1.0)))
    rest = n_events - n2
    q = p1 / (p0 + p1) if p0 + p1 > 0 else 0.0
    n1 = int(rng.binomial(rest, min(max(q, 0.0), 1.0))) if rest else 0
    return CountRecord(rest - n1, n1, n2)


def post_selected_coincidence(state: BiphotonState, ch: ChannelParams, tau):
    """Coincidence fraction among pairs where both photons survive.

    Two-click probability divided by the survival probability ``(1-gamma)^2``,
    i.e. ``(1 + alpha*fringe)/2``.
    """
    p2 = physics.outcome_probabilities(state, ch, tau).p2
    return np.asarray(p2) / (1.0 - ch.gamma) ** 2


def simulate_fringe(
    state: BiphotonState,
    ch: ChannelParams,
    tau_grid,
    trials_per_point: int,
    seed,
) -> FringeScan:
    tau = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing")
    p = np.clip(post_selected_coincidence(state, ch, tau), 0.0, 1.0)
    rng = make_rng(seed)
    trials = np.full(tau.shape, int(trials_per_point), dtype=np.int64)
    return FringeScan(tau, rng.binomial(trials, p), trials)


def _estimate(counts, state, ch, tau_s, estimator):
    if estimator == "closed_form":
        return mle_closed_form(counts, state, ch, tau_s)
    if estimator == "numeric":
        return mle_numeric(counts, state, ch, monotone_bracket(state, tau_s))
    raise ValueError(f"unknown estimator {estimator!r}")


def run_precision_study(
    state: BiphotonState,
    ch: ChannelParams,
    cfg: TrialConfig,
    estimator: str = "closed_form",
    tau_s: Optional[float] = None,
) -> PrecisionReport:
    """Repeat a simulated experiment and compare the spread with the bounds.

    ``tau_s`` is the coarse working position handed to the estimator; it
    defaults to ``cfg.tau_true``.
    """
    tau_s = cfg.tau_true if tau_s is None else tau_s
    fisher = fisher_information(state, ch, cfg.tau_true)
    if not (math.isfinite(fisher) and fisher > 0):
        raise ValueError(f"no Fisher information at tau_true={cfg.tau_true}")
    probs = physics.outcome_probabilities(state, ch, cfg.tau_true)

    estimates = []
    failures = 0
    for i in range(cfg.n_repetitions):
        counts = sample_counts(probs, cfg.n_events, np.random.SeedSequence([cfg.seed, i]))
        try:
            estimates.append(_estimate(counts, state, ch, tau_s, estimator).tau_hat)
        except EstimationError:
            failures += 1
    if not estimates:
        raise EstimationError("overflow", "every repetition failed to produce an estimate")

    est = np.array(estimates)
    mean = math.fsum(est) / est.size
    std = None
    if est.size > 1:
        std = math.sqrt(math.fsum((est - mean) ** 2) / (est.size - 1))
    crb = cr_bound(fisher, cfg.n_events)
    return PrecisionReport(
        mean_estimate=mean,
        empirical_std=std,
        bias=mean - cfg.tau_true,
        cr_bound=crb,
        qcr_bound=qcr_bound(state, cfg.n_events),
        efficiency_ratio=None if std is None else std / crb,
        failure_count=failures,
        n_success=int(est.size),
        fisher=float(fisher),
    )
