"""Biphoton state, HOM coincidence and lossy three-outcome probabilities.

Units throughout the package: delays in ps, frequencies angular in rad/ps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Speed of light in nm/ps.
C_NM_PER_PS = 299_792.458


def _wrap_phase(phi: float) -> float:
    """Map a phase into [-pi, pi)."""
    wrapped = math.fmod(phi + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class BiphotonState:
    """Frequency-entangled photon pair.

    Attributes
    ----------
    delta : float
        Angular detuning of the two colour bins, rad/ps. Stored non-negative.
    sigma : float
        RMS bandwidth of the single-photon intensity spectrum, rad/ps.
    phi : float
        Relative phase offset, rad, kept in [-pi, pi).
    """

    delta: float
    sigma: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("delta", "sigma", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        object.__setattr__(self, "delta", abs(float(self.delta)))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "phi", _wrap_phase(float(self.phi)))

    @classmethod
    def from_thz(cls, detuning_thz: float, bandwidth_thz: float, phi: float = 0.0):
        """Build a state from ordinary frequencies quoted in THz."""
        return cls(angular_from_thz(detuning_thz), angular_from_thz(bandwidth_thz), phi)


@dataclass(frozen=True)
class ChannelParams:
    """Loss ``gamma`` (per photon) and fringe visibility ``alpha``."""

    gamma: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must satisfy 0 <= gamma < 1, got {self.gamma}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must satisfy 0 <= alpha <= 1, got {self.alpha}")


IDEAL = ChannelParams(0.0, 1.0)


@dataclass(frozen=True)
class OutcomeProbs:
    """Probabilities of zero, one and two detector clicks.

    Fields may be scalars or equally shaped arrays (one entry per delay).
    """

    p0: float | np.ndarray
    p1: float | np.ndarray
    p2: float | np.ndarray

    def __post_init__(self):
        ps = np.array([np.asarray(self.p0), np.asarray(self.p1), np.asarray(self.p2)])
        if np.any(ps < -1e-15) or np.any(ps > 1 + 1e-15):
            raise ValueError("outcome probabilities must lie in [0, 1]")
        if np.any(np.abs(ps.sum(axis=0) - 1.0) > 1e-12):
            raise ValueError("outcome probabilities must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2], dtype=float)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform quadrature grid for the spectral integral.

    ``half_width`` is measured in units of sigma; ``points`` must be odd so
    that zero offset is a node.
    """

    half_width: float = 8.0
    points: int = 2001

    def __post_init__(self):
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError(f"points must be odd and >= 3, got {self.points}")
        if not self.half_width >= 5:
            raise ValueError(f"half_width must be >= 5, got {self.half_width}")


def angular_from_thz(nu):
    """Convert ordinary frequency in THz to angular frequency in rad/ps."""
    nu = np.asarray(nu, dtype=float)
    if not np.all(np.isfinite(nu)):
        raise ValueError("frequency must be finite")
    out = 2.0 * np.pi * nu
    return float(out) if out.ndim == 0 else out


def detuning_from_wavelengths(lambda_s: float, lambda_i: float) -> float:
    """Angular detuning (rad/ps) between two vacuum wavelengths given in nm."""
    if not (lambda_s > 0 and lambda_i > 0):
        raise ValueError("wavelengths must be positive")
    return abs(2.0 * math.pi * C_NM_PER_PS * (1.0 / lambda_i - 1.0 / lambda_s))


def _carrier(state: BiphotonState, tau):
    """Return the phase argument and the envelope exponent at ``tau``."""
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)):
        raise ValueError("tau must be finite")
    return state.delta * tau + state.phi, 2.0 * state.sigma**2 * tau**2


def one_minus_fringe(state: BiphotonState, tau):
    """``1 - cos(delta*tau + phi) * exp(-2 sigma^2 tau^2)`` without cancellation."""
    x, y = _carrier(state, tau)
    return -np.expm1(-y) + np.exp(-y) * 2.0 * np.sin(0.5 * x) ** 2


def one_plus_fringe(state: BiphotonState, tau):
    """``1 + cos(delta*tau + phi) * exp(-2 sigma^2 tau^2)`` without cancellation."""
    x, y = _carrier(state, tau)
    return -np.expm1(-y) + np.exp(-y) * 2.0 * np.cos(0.5 * x) ** 2


def fringe(state: BiphotonState, tau):
    """The interference term ``cos(delta*tau + phi) * exp(-2 sigma^2 tau^2)``."""
    x, y = _carrier(state, tau)
    return np.cos(x) * np.exp(-y)


def fringe_derivative(state: BiphotonState, tau):
    """d/dtau of :func:`fringe`."""
    x, y = _carrier(state, tau)
    tau = np.asarray(tau, dtype=float)
    return -(state.delta * np.sin(x) + 4.0 * state.sigma**2 * tau * np.cos(x)) * np.exp(-y)


def coincidence_probability(state: BiphotonState, tau):
    """Normalised coincidence probability of the lossless interferometer."""
    return 0.5 * one_plus_fringe(state, tau)


def outcome_probabilities(
    state: BiphotonState, ch: ChannelParams, tau
) -> OutcomeProbs:
    """Zero/one/two-click probabilities with loss and reduced visibility.

    With ``phi = 0`` this is exactly the textbook lossy HOM model; ``phi``
    enters as ``cos(delta*tau + phi)``.
    """
    g, a = ch.gamma, ch.alpha
    # (1+3g)/(1-g) = 1 + 4g/(1-g); expanding keeps p1 free of cancellation at g=0, a=1
    scale = 0.5 * (1.0 - g) ** 2
    p2 = scale * ((1.0 - a) + a * one_plus_fringe(state, tau))
    p1 = scale * (4.0 * g / (1.0 - g) + (1.0 - a) + a * one_minus_fringe(state, tau))
    p0 = np.full_like(np.asarray(p2, dtype=float), g * g)
    if p0.ndim == 0:
        return OutcomeProbs(float(p0), float(p1), float(p2))
    return OutcomeProbs(p0, p1, p2)


def beam_splitter_oracle(
    state: BiphotonState, tau: float, grid: SpectralGrid = SpectralGrid()
) -> float:
    """Coincidence probability from an explicit beam-splitter calculation.

    The spectral offset is discretised on a uniform grid and the two-photon
    amplitude is tracked mode by mode. For every node ``k`` the four modes
    ``{port 1, port 2} x {(bin 1, +W_k), (bin 2, -W_k)}`` form a closed block:
    the delayed branch puts a photon of bin 1 in port 1, the other branch puts
    it in port 2. The two colour bins are treated as distinguishable labels,
    i.e. well separated compared with the bandwidth.

    The 50:50 splitter maps port 1 -> (3 + 4)/sqrt(2), port 2 -> (3 - 4)/sqrt(2)
    on each mode. The returned value is the weight of the component with one
    photon in each output port.
    """
    if not isinstance(grid, SpectralGrid):
        raise TypeError("grid must be a SpectralGrid")
    if not math.isfinite(tau):
        raise ValueError("tau must be finite")

    omega = np.linspace(-grid.half_width, grid.half_width, grid.points) * state.sigma
    weights = np.exp(-0.5 * (omega / state.sigma) ** 2)
    weights[[0, -1]] *= 0.5  # trapezoid rule
    weights /= weights.sum()
    amp = np.sqrt(weights)

    # single-photon mode index: 2*port + colour, port 0 -> "1", colour 0 -> (bin 1, +W)
    n = omega.size
    c_in = np.zeros((n, 4, 4), dtype=complex)
    delay_phase = np.exp(1j * (state.delta + 2.0 * omega) * tau + 1j * state.phi)
    c_in[:, 0, 3] = amp * delay_phase / math.sqrt(2.0)  # a1(bin1,+W) a2(bin2,-W)
    # the undelayed branch evaluated at node -W_k: a1(bin2,-W) a2(bin1,+W)
    c_in[:, 1, 2] = -amp[::-1] / math.sqrt(2.0)

    s = 1.0 / math.sqrt(2.0)
    # rows: input modes (port1 c0, port1 c1, port2 c0, port2 c1); cols: output (port3 c0, port3 c1, port4 c0, port4 c1)
    u = np.array(
        [
            [s, 0, s, 0],
            [0, s, 0, s],
            [s, 0, -s, 0],
            [0, s, 0, -s],
        ]
    )
    c_out = np.einsum("im,kij,jn->kmn", u, c_in, u)
    sym = c_out + np.transpose(c_out, (0, 2, 1))
    total = 0.5 * np.sum(np.abs(sym) ** 2)
    coincident = np.sum(np.abs(sym[:, 0:2, 2:4]) ** 2)
    return float(coincident / total)
