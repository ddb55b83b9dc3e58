"""Fringe-scan fitting and bandwidth unit conversions.

The fit model is the normalised coincidence probability with a visibility
and a centre offset::

    y(tau) = 1/2 [1 + alpha cos(delta (tau - tau0) + phi) exp(-2 sigma^2 (tau - tau0)^2)]

Each point is weighted by the inverse binomial variance of the measured
coincidence fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .physics import C_NM_PER_PS, BiphotonState, ChannelParams

#: FWHM time-bandwidth product of a sinc^2 spectrum (rectangular correlation window).
SINC2_TIME_BANDWIDTH = 0.8859


class FitError(RuntimeError):
    """Fringe fit failure; ``trace`` holds ``(evaluation, chi2)`` rows."""

    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class FringeScan:
    """Delay scan: coincidences out of ``trials`` post-selected pairs per delay (ps)."""

    tau: np.ndarray
    coincidences: np.ndarray
    trials: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        k = np.asarray(self.coincidences)
        n = np.asarray(self.trials)
        if not (tau.ndim == 1 and tau.shape == k.shape == n.shape):
            raise ValueError("tau, coincidences and trials must be 1-d and equally long")
        if np.any(np.diff(tau) <= 0):
            raise ValueError("tau must be strictly increasing")
        if np.any(k < 0) or np.any(n < k) or np.any(n < 1):
            raise ValueError("need trials >= coincidences >= 0 and trials >= 1")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "coincidences", k.astype(np.int64))
        object.__setattr__(self, "trials", n.astype(np.int64))

    @property
    def ratio(self) -> np.ndarray:
        return self.coincidences / self.trials

    def __len__(self):
        return self.tau.size


@dataclass(frozen=True)
class FitResult:
    state: BiphotonState
    channel: ChannelParams
    tau0: float
    errors: dict
    rss: float
    chi2: float
    evaluations: int
    degenerate: bool
    trace: list = field(default_factory=list, repr=False)

    @property
    def visibility(self) -> float:
        return self.channel.alpha


def fringe_model(tau, delta, sigma, alpha, phi, tau0):
    u = np.asarray(tau, dtype=float) - tau0
    return 0.5 * (1.0 + alpha * np.cos(delta * u + phi) * np.exp(-2.0 * sigma**2 * u**2))


def _jacobian(tau, delta, sigma, alpha, phi, tau0):
    u = tau - tau0
    env = np.exp(-2.0 * sigma**2 * u**2)
    c = np.cos(delta * u + phi) * env
    s = np.sin(delta * u + phi) * env
    return np.column_stack(
        [
            -0.5 * alpha * s * u,
            -2.0 * alpha * sigma * u**2 * c,
            0.5 * c,
            -0.5 * alpha * s,
            0.5 * alpha * (delta * s + 4.0 * sigma**2 * u * c),
        ]
    )


def _initial_guess(tau, y):
    """Starting points from the rectified envelope and the DFT peak.

    Returns ``(carrier, dip, marginal)``: parameter vectors for the beat
    model and for the plain dip, and whether the carrier is too close to the
    envelope's own spectral width to decide between them up front.
    """
    n = tau.size
    grid = np.linspace(tau[0], tau[-1], n)
    yu = np.interp(grid, tau, y)
    dt = grid[1] - grid[0]

    w = (y - 0.5) ** 2
    w = np.clip(w - np.median(w), 0.0, None)
    if not np.any(w > 0):
        w = (y - 0.5) ** 2
    if not np.any(w > 0):
        return None
    tau0 = float(np.sum(w * tau) / np.sum(w))
    var = float(np.sum(w * (tau - tau0) ** 2) / np.sum(w))
    sigma = 1.0 / math.sqrt(8.0 * var) if var > 0 else 1.0 / (tau[-1] - tau[0])

    n_pad = 1 << int(math.ceil(math.log2(16 * n)))
    spec = np.abs(np.fft.rfft(yu - yu.mean(), n_pad))
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        den = a - 2 * b + c
        k = k + (0.5 * (a - c) / den if den != 0 else 0.0)
    delta = 2.0 * math.pi * k / (n_pad * dt)

    u = tau - tau0
    g = np.exp(-2.0 * sigma**2 * u**2)
    amp = 2.0 * np.sum((y - 0.5) * g) / np.sum(g * g)
    dip = [0.0, sigma, float(np.clip(abs(amp), 0.05, 1.0)), 0.0 if amp >= 0 else math.pi, tau0]
    z = np.sum((y - 0.5) * g * np.exp(-1j * delta * u)) / np.sum(g * g)
    carrier = [delta, sigma, float(np.clip(4.0 * abs(z), 0.05, 1.0)), float(np.angle(z)), tau0]
    return carrier, dip, delta < 4.0 * sigma


def _levenberg_marquardt(residual, jac, x0, free, max_iter):
    """MINPACK Levenberg-Marquardt over the ``free`` parameters of ``x0``.

    Returns ``(x, chi2, n_evaluations, trace)``; ``trace`` rows are
    ``(evaluation, chi2)``.
    """
    base = np.array(x0, dtype=float)
    trace = []

    def full(p):
        x = base.copy()
        x[free] = p
        return x

    def fun(p):
        r = residual(full(p))
        trace.append((len(trace) + 1, float(r @ r)))
        return r

    _check_rank(jac(base).T @ jac(base), trace)
    res = least_squares(
        fun, base[free], jac=lambda p: -jac(full(p)), method="lm",
        max_nfev=max_iter, xtol=1e-12, ftol=1e-12, gtol=1e-12,
    )
    if res.status == 0:
        raise FitError(f"no convergence within {max_iter} evaluations", trace)
    if res.status < 0 or not np.all(np.isfinite(res.x)):
        raise FitError(f"least squares failed: {res.message}", trace)
    return full(res.x), float(2.0 * res.cost), int(res.nfev), trace


CARRIER_PARAMS = np.array([0, 1, 2, 3, 4])
DIP_PARAMS = np.array([1, 2, 4])


def fit_fringe(scan: FringeScan, max_iter: int = 200, initial=None) -> FitResult:
    """Weighted Levenberg-Marquardt fit of a fringe scan.

    ``max_iter`` caps the number of model evaluations per fit.

    ``initial`` optionally overrides the automatic starting point with
    ``(delta, sigma, alpha, phi, tau0)``; ``delta = 0`` selects the plain dip
    model. When the carrier is not clearly resolved from the envelope both
    models are fitted and the beat model is kept only if it lowers chi-square
    by more than its two extra parameters are worth. Standard errors come
    from the inverse weighted normal matrix (absolute binomial weights).
    """
    if len(scan) < 20:
        raise ValueError("fringe fit needs at least 20 samples")
    tau, y, trials = scan.tau, scan.ratio, scan.trials.astype(float)
    p = np.clip(y, 0.5 / trials, 1.0 - 0.5 / trials)
    sw = np.sqrt(trials / (p * (1.0 - p)))

    def residual(x):
        return sw * (y - fringe_model(tau, *x))

    def jac_for(free):
        return lambda x: (sw[:, None] * _jacobian(tau, *x))[:, free]

    if initial is not None:
        free = DIP_PARAMS if initial[0] == 0 else CARRIER_PARAMS
        starts = [(list(initial), free)]
    else:
        guess = _initial_guess(tau, y)
        if guess is None:
            raise FitError("scan is constant at one half: rank-deficient normal matrix")
        carrier, dip, marginal = guess
        starts = [(carrier, CARRIER_PARAMS)]
        if marginal:
            starts.append((dip, DIP_PARAMS))

    fits, errors = [], []
    for x0, free in starts:
        try:
            fits.append((*_levenberg_marquardt(residual, jac_for(free), x0, free, max_iter), free))
        except FitError as exc:
            errors.append(exc)
    if not fits:
        raise errors[0]
    # beat model must beat the dip by more than 2 per extra parameter
    fits.sort(key=lambda f: f[1] + (4.0 if len(f[4]) == len(CARRIER_PARAMS) else 0.0))
    x, chi2, it, trace, free = fits[0]
    degenerate = len(free) == len(DIP_PARAMS)

    jtj = jac_for(free)(x).T @ jac_for(free)(x)
    _check_rank(jtj, trace)
    err_free = np.sqrt(np.clip(np.diag(np.linalg.inv(jtj)), 0.0, None))

    delta, sigma, alpha, phi, tau0 = x
    sigma = abs(sigma)
    if alpha < 0:
        alpha, phi = -alpha, phi + math.pi
    if delta < 0:
        delta, phi = -delta, -phi
    names = ["delta", "sigma", "alpha", "phi", "tau0"]
    errors_by_name = {name: 0.0 for name in names}
    errors_by_name.update({names[i]: float(e) for i, e in zip(free, err_free)})
    rss = float(np.sum((y - fringe_model(tau, *x)) ** 2))
    return FitResult(
        BiphotonState(delta, sigma, phi),
        ChannelParams(0.0, min(alpha, 1.0)),
        float(tau0),
        errors_by_name,
        rss,
        chi2,
        it,
        degenerate,
        trace,
    )


def _check_rank(jtj, trace):
    s = np.linalg.svd(jtj, compute_uv=False)
    if s[0] == 0 or s[-1] <= 1e-12 * s[0]:
        raise FitError("rank-deficient normal matrix", trace)


def bandwidth_conversions(sigma: float, wavelength_nm: float = 810.0):
    """Wavelength bandwidth (nm) and coherence time (ps) of a bandwidth in rad/ps.

    The ordinary-frequency bandwidth ``sigma/2pi`` is mapped to wavelength at
    ``wavelength_nm``. The coherence time is the length of the rectangular
    correlation window whose sinc^2 spectrum has that width,
    ``0.8859 / (sigma/2pi)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    nu = sigma / (2.0 * math.pi)
    return wavelength_nm**2 * nu / C_NM_PER_PS, SINC2_TIME_BANDWIDTH / nu
