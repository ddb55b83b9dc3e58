"""Fibre temperature sensor read out through the biphoton beat note.

Heating the sensing fibre by ``T`` degrees (relative to room temperature)
changes both its group index and its length, and the two colours pick up
different phases. The second-order cross term ``dN/dT * dL/dT * T`` is
dropped, so the phase is exactly linear in ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import physics
from .physics import C_NM_PER_PS, BiphotonState, ChannelParams, OutcomeProbs

C_M_PER_S = 299_792_458.0


@dataclass(frozen=True)
class FiberModel:
    """Thermal model of the sensing fibre.

    Wavelengths in nm, length in m, ``dn_dt`` in 1/deg, ``dl_dt`` in m/deg.
    """

    lambda_s: float
    lambda_i: float
    length_0: float
    n_group_s: float = 1.45
    n_group_i: float = 1.45
    dn_dt: float = 1e-5
    dl_dt: float = 4.8e-7

    def __post_init__(self):
        if not (self.lambda_s > 0 and self.lambda_i > 0):
            raise ValueError("wavelengths must be positive")
        if not self.length_0 >= 0:
            raise ValueError("length_0 must be non-negative")
        if not (self.n_group_s >= 1 and self.n_group_i >= 1):
            raise ValueError("group indices must be >= 1")
        for name in ("dn_dt", "dl_dt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and abs(v) < 1e-2):
                raise ValueError(f"{name} must be finite with magnitude below 1e-2")

    @classmethod
    def from_detuning(cls, detuning_thz: float, center_nm: float = 810.0, **kwargs):
        """Place the two colours symmetrically in frequency around ``center_nm``."""
        nu0 = C_NM_PER_PS / center_nm  # THz
        lam_s = C_NM_PER_PS / (nu0 + detuning_thz / 2.0)
        lam_i = C_NM_PER_PS / (nu0 - detuning_thz / 2.0)
        return cls(lam_s, lam_i, **kwargs)

    @property
    def wavenumbers(self) -> tuple[float, float]:
        """Vacuum wavenumbers ``2pi/lambda`` in rad/m."""
        return 2e9 * math.pi / self.lambda_s, 2e9 * math.pi / self.lambda_i


def _index_term(model: FiberModel) -> float:
    ks, ki = model.wavenumbers
    return (ks - ki) * model.dn_dt


def _expansion_term(model: FiberModel) -> float:
    ks, ki = model.wavenumbers
    return (ks * model.n_group_s - ki * model.n_group_i) * model.dl_dt


def phase_shift(model: FiberModel, temp_delta):
    """Differential phase (rad) after heating by ``temp_delta`` degrees."""
    t = np.asarray(temp_delta, dtype=float)
    beta = (_index_term(model) * model.length_0 + _expansion_term(model)) * t
    return float(beta) if beta.ndim == 0 else beta


def thermal_coefficient(model: FiberModel) -> float:
    """Phase per degree, rad/deg."""
    return _index_term(model) * model.length_0 + _expansion_term(model)


def calibrate_length(measured_coefficient: float, model: FiberModel) -> float:
    """Room-temperature fibre length (m) that reproduces ``measured_coefficient``.

    The ``length_0`` field of ``model`` is ignored.
    """
    index = _index_term(model)
    if index == 0:
        raise ValueError("degenerate wavelengths: length does not enter the coefficient")
    return (measured_coefficient - _expansion_term(model)) / index


def calibrated(measured_coefficient: float, model: FiberModel) -> FiberModel:
    return replace(model, length_0=calibrate_length(measured_coefficient, model))


def coincidence_vs_temperature(
    model: FiberModel,
    state: BiphotonState,
    ch: ChannelParams,
    temp_delta,
    tau_s: float = 0.0,
) -> OutcomeProbs:
    """Outcome probabilities at working point ``tau_s`` while the fibre is heated.

    The coherence envelope stays at its working-point value; only the fringe
    phase moves by ``phase_shift(model, temp_delta)``.
    """
    beta = np.asarray(phase_shift(model, temp_delta), dtype=float)
    env = math.exp(-2.0 * state.sigma**2 * tau_s**2)
    c = np.cos(state.delta * tau_s + state.phi + beta) * env
    g, a = ch.gamma, ch.alpha
    scale = 0.5 * (1.0 - g) ** 2
    p2 = scale * (1.0 + a * c)
    p1 = scale * ((1.0 + 3.0 * g) / (1.0 - g) - a * c)
    p0 = np.full_like(p2, g * g)
    if p2.ndim == 0:
        return OutcomeProbs(float(p0), float(p1), float(p2))
    return OutcomeProbs(p0, p1, p2)


def temperature_resolution(
    coefficient: float, state: BiphotonState, delta_tau_precision: float
) -> float:
    """Temperature precision (deg) from a delay precision (ps)."""
    if coefficient == 0:
        raise ValueError("thermal coefficient must be nonzero")
    if coefficient < 0:
        raise ValueError("thermal coefficient must be positive")
    return state.delta * delta_tau_precision / coefficient


def detuning_of(model: FiberModel) -> float:
    """Angular detuning (rad/ps) of the model's two wavelengths."""
    return physics.detuning_from_wavelengths(model.lambda_s, model.lambda_i)
