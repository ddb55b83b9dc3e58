"""Acceptance gate: one test per criterion, one PASS/FAIL summary line each.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines appear in
the "acceptance criteria" section of the terminal summary.
"""

import math

import numpy as np

from hombeat.cli import main
from hombeat.fringe import bandwidth_conversions, fit_fringe
from hombeat.information import (
    cr_bound,
    fisher_information,
    fisher_information_numeric,
    max_fisher,
    qcr_bound,
    quantum_fisher_information,
)
from hombeat.montecarlo import TrialConfig, run_precision_study, simulate_fringe
from hombeat.physics import (
    IDEAL,
    BiphotonState,
    ChannelParams,
    SpectralGrid,
    angular_from_thz,
    beam_splitter_oracle,
    coincidence_probability,
    detuning_from_wavelengths,
    outcome_probabilities,
)
from hombeat.io import format_scan
from hombeat.sensor import (
    FiberModel,
    calibrate_length,
    temperature_resolution,
    thermal_coefficient,
)

REF_STATE = BiphotonState(angular_from_thz(5.34), angular_from_thz(0.253))
LOSSY = ChannelParams(0.4, 0.9)


def test_criterion_01_normalisation_and_reduction(acceptance):
    rng = np.random.default_rng(101)
    worst_sum = worst_red = 0.0
    for _ in range(10_000):
        s = BiphotonState(rng.uniform(0, 200), rng.uniform(0.05, 10), rng.uniform(-math.pi, math.pi))
        ch = ChannelParams(rng.uniform(0, 0.99), rng.uniform(0, 1))
        tau = rng.uniform(-2, 2)
        p = outcome_probabilities(s, ch, tau)
        worst_sum = max(worst_sum, abs(p.p0 + p.p1 + p.p2 - 1.0))
        q = outcome_probabilities(s, IDEAL, tau)
        worst_red = max(worst_red, abs(q.p2 - coincidence_probability(s, tau)), abs(q.p0))
    ok = worst_sum <= 1e-12 and worst_red <= 1e-15
    acceptance(1, ok, f"max |sum-1| = {worst_sum:.2e} (tol 1e-12), max reduction error = {worst_red:.2e} (tol 1e-15)")
    assert ok


def test_criterion_02_oracle_equivalence(acceptance):
    rng = np.random.default_rng(202)
    grid = SpectralGrid(half_width=8, points=2001)
    worst = 0.0
    for _ in range(20):
        s = BiphotonState(rng.uniform(0, 60), rng.uniform(0.2, 5), rng.uniform(-math.pi, math.pi))
        for tau in np.linspace(-5 / s.sigma, 5 / s.sigma, 101):
            worst = max(worst, abs(beam_splitter_oracle(s, tau, grid) - coincidence_probability(s, tau)))
    ok = worst <= 1e-6
    acceptance(2, ok, f"max |oracle - closed form| = {worst:.2e} over 20 states x 101 delays (tol 1e-6)")
    assert ok


def test_criterion_03_ideal_fisher_limit(acceptance):
    f = fisher_information(REF_STATE, IDEAL, 1e-6)
    limit = REF_STATE.delta**2 + 4 * REF_STATE.sigma**2
    q4 = 4 * quantum_fisher_information(REF_STATE)
    rel_limit = abs(f / limit - 1)

    rng = np.random.default_rng(303)
    worst, checked = 0.0, 0
    while checked < 1000:
        s = BiphotonState(rng.uniform(1, 100), rng.uniform(0.1, 5), rng.uniform(-3, 3))
        ch = ChannelParams(rng.uniform(0, 0.9), rng.uniform(0.05, 1))
        tau = rng.uniform(-1.5, 1.5) / s.sigma
        closed = fisher_information(s, ch, tau)
        # skip the neighbourhood of zeros, where a relative comparison is meaningless
        if not closed > 1e-3 * (s.delta**2 + 4 * s.sigma**2):
            continue
        worst = max(worst, abs(fisher_information_numeric(s, ch, tau, 1e-6) / closed - 1))
        checked += 1
    ok = rel_limit <= 1e-3 and q4 == limit and worst <= 1e-6
    acceptance(
        3, ok,
        f"F(1e-6 ps) = {f:.4f} vs D^2+4s^2 = {limit:.4f} (rel {rel_limit:.1e}, tol 1e-3); "
        f"4Q exact: {q4 == limit}; finite-difference worst rel {worst:.1e} over 1000 points (tol 1e-6)",
    )
    assert ok


def test_criterion_04_639_as(acceptance):
    bound = cr_bound(245.0, 1e4)
    wp = max_fisher(REF_STATE, LOSSY, (0.0, 0.5))
    ok = abs(bound / 6.39e-4 - 1) <= 0.01 and 200 <= wp.fisher_max <= 300
    acceptance(
        4, ok,
        f"cr_bound(245, 1e4) = {bound * 1e6:.1f} as (target 639 as, tol 1%); "
        f"fisher_max = {wp.fisher_max:.2f} ps^-2 at {wp.tau_star:.4f} ps (band [200, 300])",
    )
    assert ok


def test_criterion_05_9_as(acceptance):
    s = BiphotonState(detuning_from_wavelengths(1500, 800), 1e-9)
    bound = qcr_bound(s, 1e4)
    ok = abs(bound / 9.1e-6 - 1) <= 0.10
    acceptance(5, ok, f"qcr_bound = {bound * 1e6:.2f} as (target 9.1 as, tol 10%)")
    assert ok


def test_criterion_06_estimator_efficiency(acceptance):
    tau_star = max_fisher(REF_STATE, LOSSY, (0.0, 0.5)).tau_star
    rep = run_precision_study(REF_STATE, LOSSY, TrialConfig(10_000, 500, 20240, tau_star))
    bias_tol = 3 * rep.empirical_std / math.sqrt(500)
    ok = abs(rep.bias) < bias_tol and 0.9 <= rep.efficiency_ratio <= 1.3
    acceptance(
        6, ok,
        f"tau* = {tau_star:.4f} ps, |bias| = {abs(rep.bias):.2e} ps (< {bias_tol:.2e}), "
        f"efficiency = {rep.efficiency_ratio:.3f} (band [0.9, 1.3]), failures = {rep.failure_count}",
    )
    assert ok


def test_criterion_07_fringe_round_trip(acceptance):
    s = BiphotonState(angular_from_thz(3.65), angular_from_thz(0.253))
    scan = simulate_fringe(s, ChannelParams(0.0, 0.85), np.linspace(-2, 2, 201), 1000, 77)
    res = fit_fringe(scan)
    d_err = abs(res.state.delta / s.delta - 1)
    s_err = abs(res.state.sigma / s.sigma - 1)
    ok = d_err <= 0.005 and s_err <= 0.05 and abs(res.visibility - 0.85) <= 0.05
    acceptance(
        7, ok,
        f"delta {res.state.delta / (2 * math.pi):.4f} THz (err {d_err:.2%}, tol 0.5%), "
        f"sigma {res.state.sigma / (2 * math.pi):.4f} THz (err {s_err:.2%}, tol 5%), "
        f"visibility {res.visibility:.3f} (band 0.85 +- 0.05)",
    )
    assert ok


def test_criterion_08_bandwidth_conversions(acceptance):
    nm, tc = bandwidth_conversions(angular_from_thz(0.253), 810.0)
    ok = abs(nm / 0.55 - 1) <= 0.05 and abs(tc / 3.5 - 1) <= 0.15
    acceptance(8, ok, f"0.253 THz -> {nm:.4f} nm (0.55, tol 5%), coherence time {tc:.3f} ps (3.5, tol 15%)")
    assert ok


def test_criterion_09_thermal_coefficients(acceptance):
    def model(thz, length):
        return FiberModel.from_detuning(thz, length_0=length)

    length = calibrate_length(0.13, model(3.7, 0.0))
    parts, ok = [], True
    for thz, measured in ((7.4, 0.2), (11.2, 0.3), (17.1, 0.48)):
        pred = thermal_coefficient(model(thz, length))
        err = pred / measured - 1
        ok &= abs(err) <= 0.20
        parts.append(f"{thz} THz: {pred:.3f} vs {measured} ({err:+.0%})")
    res = temperature_resolution(0.48, BiphotonState(angular_from_thz(17.1), 1.5896), 5.4e-4)
    ok &= abs(res / 0.12 - 1) <= 0.20
    acceptance(
        9, ok,
        f"L0 = {length:.4f} m from 0.13 rad/deg at 3.7 THz; " + "; ".join(parts)
        + f" (tol 20%); resolution {res:.3f} deg (0.12, tol 20%)",
    )
    assert ok


def test_criterion_10_cli_determinism(acceptance, tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(
        "state: {detuning: 5.34, bandwidth: 0.253}\n"
        "channel: {gamma: 0.4, alpha: 0.9}\n"
        "grid: {tau_min: 0.0, tau_max: 0.5, points: 101}\n"
        "trials: {n_events: 10000, n_repetitions: 100, seed: 31}\n"
    )
    counts = tmp_path / "counts.csv"
    counts.write_text("1600,6599,1801\n")
    scan = tmp_path / "scan.csv"
    s = BiphotonState(angular_from_thz(3.65), angular_from_thz(0.253))
    scan.write_text(format_scan(simulate_fringe(s, ChannelParams(0.0, 0.85), np.linspace(-2, 2, 201), 1000, 3)))
    commands = {
        "fringe": ["fringe", "--simulate"],
        "fisher": ["fisher", "--ideal"],
        "estimate": ["estimate", "--counts", str(counts), "--tau-s", "0.0468"],
        "simulate": ["simulate"],
        "fit": ["fit", "--scan", str(scan)],
        "sensor": ["sensor", "--calibrate", "0.13", "--delta-tau", "6.39e-4"],
    }
    bad = []
    for name, argv in commands.items():
        outs = []
        for _ in range(2):
            code = main(argv + ["-c", str(cfg)])
            outs.append((code, *capsys.readouterr()))
        if outs[0][0] != 0 or outs[0] != outs[1]:
            bad.append(name)
    ok = not bad
    acceptance(10, ok, f"{len(commands)} commands, two runs each; differing or failing: {bad or 'none'}")
    assert ok
