"""Multinomial likelihood and maximum-likelihood delay estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import physics
from ._optimize import grid_then_refine
from .information import fisher_information
from .physics import BiphotonState, ChannelParams


class EstimationError(RuntimeError):
    """Raised when a delay cannot be estimated from the counts.

    ``reason`` is one of ``"overflow"`` (the arccos argument left [-1, 1]
    beyond the allowed slack), ``"flat"`` (the likelihood does not depend on
    the delay) or ``"empty"`` (no informative events).
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class CountRecord:
    n0: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("n0", "n1", "n2"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.total < 1:
            raise ValueError("at least one event is required")

    @property
    def total(self) -> int:
        return self.n0 + self.n1 + self.n2

    def scaled(self, k: int) -> "CountRecord":
        return CountRecord(k * self.n0, k * self.n1, k * self.n2)


@dataclass(frozen=True)
class EstimateResult:
    """A delay estimate in ps.

    ``std_err`` comes from the Fisher information at the estimate and is
    ``None`` when that information is zero or undefined. ``clamped`` marks a
    closed-form estimate whose arccos argument had to be pulled back into
    [-1, 1].
    """

    tau_hat: float
    std_err: Optional[float]
    method: str
    clamped: bool = False


def log_likelihood(counts: CountRecord, state: BiphotonState, ch: ChannelParams, tau):
    """``N0 ln P0 + N1 ln P1 + N2 ln P2``, without the multinomial coefficient.

    A zero-probability outcome with a nonzero count gives ``-inf``; a zero
    count contributes nothing regardless of its probability.
    """
    probs = physics.outcome_probabilities(state, ch, tau)
    total = 0.0
    for n, p in zip((counts.n0, counts.n1, counts.n2), (probs.p0, probs.p1, probs.p2)):
        if n == 0:
            continue
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            total = total + n * np.log(p)
    out = np.asarray(total, dtype=float)
    return float(out) if out.ndim == 0 else out


def _std_err(state, ch, tau, n_total):
    f = fisher_information(state, ch, tau)
    if not (math.isfinite(f) and f > 0):
        return None
    return 1.0 / math.sqrt(n_total * f)


def mle_closed_form(
    counts: CountRecord,
    state: BiphotonState,
    ch: ChannelParams,
    tau_s: float,
    slack: float = 0.05,
) -> EstimateResult:
    """Analytic MLE with the coherence envelope frozen at ``tau_s``.

    Balancing ``N1 P2 = N2 P1`` gives ``cos(delta*tau + phi)`` directly; the
    arccos branch and the beat period are chosen to land nearest ``tau_s``.
    Arguments outside [-1, 1] by at most ``slack`` are clamped.
    """
    n1, n2 = counts.n1, counts.n2
    if n1 + n2 < 1:
        raise EstimationError("empty", "no one- or two-click events")
    if state.delta <= 0:
        raise ValueError("closed-form estimator needs a nonzero detuning")
    if ch.alpha <= 0:
        raise EstimationError("flat", "zero visibility: counts carry no delay information")
    g = ch.gamma
    envelope = math.exp(-2.0 * state.sigma**2 * tau_s**2)
    arg = ((1.0 + 3.0 * g) / (1.0 - g) * n2 - n1) / (ch.alpha * (n1 + n2) * envelope)
    clamped = False
    if abs(arg) > 1.0:
        if abs(arg) - 1.0 > slack:
            raise EstimationError(
                "overflow", f"arccos argument {arg:.6g} outside [-1, 1] beyond slack {slack}"
            )
        arg = math.copysign(1.0, arg)
        clamped = True
    theta = math.acos(arg)
    period = 2.0 * math.pi / state.delta
    best = None
    for branch in (theta, -theta):
        t = (branch - state.phi) / state.delta
        t += period * round((tau_s - t) / period)
        if best is None or abs(t - tau_s) < abs(best - tau_s):
            best = t
    return EstimateResult(best, _std_err(state, ch, best, counts.total), "closed_form", clamped)


def monotone_bracket(state: BiphotonState, tau_s: float) -> tuple[float, float]:
    """Half beat period around ``tau_s`` on which ``cos(delta*tau + phi)`` is monotone."""
    if state.delta <= 0:
        raise ValueError("no beat period for zero detuning")
    k = math.floor((state.delta * tau_s + state.phi) / math.pi)
    return (k * math.pi - state.phi) / state.delta, ((k + 1) * math.pi - state.phi) / state.delta


def mle_numeric(
    counts: CountRecord,
    state: BiphotonState,
    ch: ChannelParams,
    bracket: tuple[float, float],
) -> EstimateResult:
    """Maximise the log-likelihood over ``bracket`` by grid scan and bounded Brent search.

    The objective is the log-likelihood per event, so rescaling all counts by
    a common factor leaves the result bit-for-bit unchanged.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError(f"degenerate bracket {bracket}")
    n = counts.total
    if counts.n1 + counts.n2 == 0:
        raise EstimationError("empty", "no one- or two-click events")
    f1, f2 = counts.n1 / n, counts.n2 / n

    def objective(t):
        probs = physics.outcome_probabilities(state, ch, t)
        with np.errstate(divide="ignore"):
            v = 0.0
            if f1:
                v = v + f1 * np.log(probs.p1)
            if f2:
                v = v + f2 * np.log(probs.p2)
        return v

    pitch = 1.0 / (100.0 * state.sigma)
    if state.delta > 0:
        pitch = min(pitch, math.pi / (100.0 * state.delta))
    pitch = min(pitch, (hi - lo) / 20.0)

    scan = np.asarray(objective(np.linspace(lo, hi, 64)), dtype=float)
    finite = scan[np.isfinite(scan)]
    if ch.alpha == 0 or (finite.size and np.ptp(finite) <= 1e-14 * max(1.0, np.max(np.abs(finite)))):
        raise EstimationError("flat", "likelihood does not depend on the delay")

    tau, best = grid_then_refine(objective, lo, hi, pitch, tol=1e-13)
    if not math.isfinite(best):
        raise EstimationError("flat", "likelihood is -inf over the whole bracket")
    return EstimateResult(tau, _std_err(state, ch, tau, n), "numeric")
