"""Fisher information, Cramer-Rao bounds and optimal working points.

Fisher values are in ps^-2, bounds in ps. At the ideal-interferometer
singular point (zero loss, unit visibility, fringe at +-1) the classical
Fisher information is undefined; it is returned as ``nan`` and treated as a
hole in the delay axis by the searches and the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import physics
from ._optimize import grid_then_refine
from .physics import BiphotonState, ChannelParams


@dataclass(frozen=True)
class WorkingPoint:
    tau_star: float
    fisher_max: float


def quantum_fisher_information(state: BiphotonState) -> float:
    """The variance-like quantity Q of the probe state: ``(delta^2 + 4 sigma^2)/4``."""
    return (state.delta**2 + 4.0 * state.sigma**2) / 4.0


def _check_trials(n_trials):
    if not n_trials >= 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")


def qcr_bound(state: BiphotonState, n_trials: float) -> float:
    """Quantum Cramer-Rao limit on the delay, ``1/sqrt(N (delta^2 + 4 sigma^2))``."""
    _check_trials(n_trials)
    return 1.0 / (2.0 * math.sqrt(n_trials * quantum_fisher_information(state)))


def cr_bound(fisher, n_trials: float):
    """Classical Cramer-Rao bound ``1/sqrt(N F)``."""
    _check_trials(n_trials)
    f = np.asarray(fisher, dtype=float)
    if np.any(~(f > 0)):
        raise ValueError("Fisher information must be positive")
    out = 1.0 / np.sqrt(n_trials * f)
    return float(out) if out.ndim == 0 else out


def fisher_information(state: BiphotonState, ch: ChannelParams, tau):
    """Closed-form Fisher information of the three-outcome measurement.

    Only the one- and two-click outcomes carry information; the zero-click
    probability does not depend on the delay. Returns ``nan`` where both
    informative outcomes cannot be resolved (ideal case at the fringe
    extremum).
    """
    probs = physics.outcome_probabilities(state, ch, tau)
    g, a = ch.gamma, ch.alpha
    slope = a * physics.fringe_derivative(state, tau)
    num = (1.0 - g * g) * slope**2
    den = 4.0 * np.asarray(probs.p1) * np.asarray(probs.p2) / (1.0 - g) ** 4
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return float(f) if f.ndim == 0 else f


def fisher_information_numeric(
    state: BiphotonState, ch: ChannelParams, tau: float, step: float = 1e-6
) -> float:
    """Fisher information from central differences of each outcome probability.

    Sums ``(dP_i/dtau)^2 / P_i`` over all three outcomes. An outcome that is
    impossible throughout the stencil contributes nothing; one that vanishes
    only at ``tau`` makes the result undefined (``nan``).
    """
    if not step > 0:
        raise ValueError("step must be positive")
    grid = np.array([tau - step, tau, tau + step])
    p = physics.outcome_probabilities(state, ch, grid).as_array()
    total = 0.0
    for lo, mid, hi in p:
        if mid == 0.0:
            if lo == 0.0 and hi == 0.0:
                continue
            return math.nan
        d = (hi - lo) / (2.0 * step)
        total += d * d / mid
    return total


def max_fisher(
    state: BiphotonState, ch: ChannelParams, bracket: tuple[float, float]
) -> WorkingPoint:
    """Locate the delay of maximal Fisher information inside ``bracket``.

    A dense scan with pitch at most ``pi/(50 delta)`` resolves the beat
    oscillation; a bounded Brent search refines around the best node. In the
    ideal case the supremum sits at the singular point, so the result lands
    next to it.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError(f"degenerate bracket {bracket}")
    pitch = 1.0 / (50.0 * state.sigma)
    if state.delta > 0:
        pitch = min(pitch, math.pi / (50.0 * state.delta))
    pitch = min(pitch, (hi - lo) / 20.0)
    tau, fmax = grid_then_refine(
        lambda t: fisher_information(state, ch, t), lo, hi, pitch, tol=1e-13
    )
    if not math.isfinite(tau):
        raise ValueError("Fisher information undefined over the whole bracket")
    return WorkingPoint(tau, max(fmax, 0.0))
