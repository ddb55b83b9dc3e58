"""``hombeat`` command-line interface.

Every command writes a CSV table (``#`` metadata lines, then a header row)
to stdout or ``--output``; ``--json`` switches to JSON and ``--plot`` also
renders a figure. Exit status: 0 success, 2 bad input, 3 estimation failure,
4 fit failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, information, physics
from .config import ConfigError, load_config
from .estimation import EstimationError, mle_closed_form, mle_numeric, monotone_bracket
from .fringe import FitError, bandwidth_conversions, fit_fringe, fringe_model
from .io import ParseError, read_counts, read_scan, render_report, render_table
from .montecarlo import TrialConfig, run_precision_study, sample_counts, simulate_fringe
from . import sensor

EXIT_INPUT = 2
EXIT_ESTIMATION = 3
EXIT_FIT = 4

# argparse dest -> (section, key)
OVERRIDES = {
    "detuning": ("state", "detuning"),
    "bandwidth": ("state", "bandwidth"),
    "unit": ("state", "unit"),
    "phi": ("state", "phi"),
    "gamma": ("channel", "gamma"),
    "alpha": ("channel", "alpha"),
    "tau_min": ("grid", "tau_min"),
    "tau_max": ("grid", "tau_max"),
    "tau_points": ("grid", "points"),
    "n_trials": ("fisher", "n_trials"),
    "ideal": ("fisher", "ideal"),
    "bracket": ("fisher", "bracket"),
    "n_events": ("trials", "n_events"),
    "n_repetitions": ("trials", "n_repetitions"),
    "seed": ("trials", "seed"),
    "tau_true": ("trials", "tau_true"),
    "estimator": ("trials", "estimator"),
    "trials_per_point": ("trials", "trials_per_point"),
    "tau_s": ("estimate", "tau_s"),
    "slack": ("estimate", "slack"),
    "center_nm": ("fiber", "center_nm"),
    "lambda_s": ("fiber", "lambda_s"),
    "lambda_i": ("fiber", "lambda_i"),
    "length": ("fiber", "length_0"),
    "n_group_s": ("fiber", "n_group_s"),
    "n_group_i": ("fiber", "n_group_i"),
    "dn_dt": ("fiber", "dn_dt"),
    "dl_dt": ("fiber", "dl_dt"),
    "calibrate": ("fiber", "calibrate_coefficient"),
    "calibrate_detuning": ("fiber", "calibrate_detuning_thz"),
    "t_min": ("sweep", "t_min"),
    "t_max": ("sweep", "t_max"),
    "t_points": ("sweep", "points"),
    "sweep_tau_s": ("sweep", "tau_s"),
    "delta_tau": ("sweep", "delta_tau"),
    "output": ("output", "path"),
    "json": ("output", "json"),
    "plot": ("output", "plot"),
}


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _meta(cfg, command):
    return {
        "hombeat": __version__,
        "command": command,
        "seed": cfg.get("trials", "seed"),
        "config": cfg.values,
    }


def _emit(cfg, text):
    path = cfg.output_path()
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _plot(cfg, func, *args, **kwargs):
    path = cfg.plot_path()
    if path is not None:
        from . import plotting

        path.parent.mkdir(parents=True, exist_ok=True)
        getattr(plotting, func)(path, *args, **kwargs)


def cmd_fringe(cfg, args):
    state, ch = cfg.state(), cfg.channel()
    tau = cfg.tau_grid()
    pc = physics.coincidence_probability(state, tau)
    probs = physics.outcome_probabilities(state, ch, tau)
    columns = ["tau_ps", "p_coincidence", "p0", "p1", "p2"]
    data = [tau, pc, probs.p0, probs.p1, probs.p2]
    simulated = None
    if args.simulate:
        scan = simulate_fringe(
            state, ch, tau, cfg.number("trials", "trials_per_point", integer=True, positive=True),
            cfg.number("trials", "seed", integer=True, nonneg=True),
        )
        columns += ["coincidences", "trials"]
        data += [scan.coincidences, scan.trials]
        simulated = scan.ratio
    rows = list(zip(*data))
    _emit(cfg, render_table(_meta(cfg, "fringe"), columns, rows, cfg.get("output", "json")))
    _plot(cfg, "fringe_figure", tau, pc, simulated)


def _cr_column(fisher, n):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(fisher > 0, 1.0 / np.sqrt(n * np.where(fisher > 0, fisher, 1.0)), np.nan)


def cmd_fisher(cfg, args):
    state, ch = cfg.state(), cfg.channel()
    tau = cfg.tau_grid()
    n = cfg.number("fisher", "n_trials", positive=True)
    fisher = np.asarray(information.fisher_information(state, ch, tau))
    columns = ["tau_ps", "fisher_ps2", "cr_bound_ps"]
    data = [tau, fisher, _cr_column(fisher, n)]
    ideal = None
    if cfg.get("fisher", "ideal"):
        ideal = np.asarray(information.fisher_information(state, physics.IDEAL, tau))
        columns += ["fisher_ideal_ps2", "cr_bound_ideal_ps"]
        data += [ideal, _cr_column(ideal, n)]
    limit = 4.0 * information.quantum_fisher_information(state)
    meta = _meta(cfg, "fisher")
    meta["quantum_limit_ps2"] = limit
    meta["qcr_bound_ps"] = information.qcr_bound(state, n)
    if np.any(np.isfinite(fisher)):
        i = int(np.nanargmax(fisher))
        meta["grid_max_fisher_ps2"] = float(fisher[i])
        meta["grid_max_tau_ps"] = float(tau[i])
    _emit(cfg, render_table(meta, columns, list(zip(*data)), cfg.get("output", "json")))
    _plot(cfg, "fisher_figure", tau, fisher, limit, ideal)


def cmd_estimate(cfg, args):
    state, ch = cfg.state(), cfg.channel()
    if args.counts is None:
        raise CommandError(EXIT_INPUT, "estimate needs --counts FILE")
    counts = read_counts(args.counts)
    tau_s = cfg.optional_number("estimate", "tau_s")
    if tau_s is None:
        raise CommandError(EXIT_INPUT, "estimate needs a working point: --tau-s or estimate.tau_s")
    slack = cfg.number("estimate", "slack", nonneg=True)
    if state.delta == 0:
        raise CommandError(EXIT_INPUT, "estimate needs a nonzero detuning")
    try:
        closed = mle_closed_form(counts, state, ch, tau_s, slack=slack)
        numeric = mle_numeric(counts, state, ch, monotone_bracket(state, tau_s))
    except EstimationError as exc:
        raise CommandError(EXIT_ESTIMATION, f"estimation failed ({exc.reason}): {exc}") from None
    fisher = information.fisher_information(state, ch, closed.tau_hat)
    n = counts.total
    items = [
        ("n0", counts.n0),
        ("n1", counts.n1),
        ("n2", counts.n2),
        ("tau_s_ps", tau_s),
        ("tau_hat_closed_form_ps", closed.tau_hat),
        ("std_err_closed_form_ps", closed.std_err),
        ("clamped", closed.clamped),
        ("tau_hat_numeric_ps", numeric.tau_hat),
        ("std_err_numeric_ps", numeric.std_err),
        ("fisher_at_estimate_ps2", fisher),
        ("cr_bound_ps", 1.0 / math.sqrt(n * fisher) if fisher > 0 else None),
        ("qcr_bound_ps", information.qcr_bound(state, n)),
    ]
    _emit(cfg, render_report(_meta(cfg, "estimate"), items, cfg.get("output", "json")))


def _working_point(cfg, state, ch):
    tau_true = cfg.optional_number("trials", "tau_true")
    if tau_true is None:
        tau_true = information.max_fisher(state, ch, cfg.bracket()).tau_star
    return tau_true


def cmd_simulate(cfg, args):
    state, ch = cfg.state(), cfg.channel()
    cfg.validate()
    tau_true = _working_point(cfg, state, ch)
    seed = cfg.number("trials", "seed", integer=True, nonneg=True)
    n_events = cfg.number("trials", "n_events", integer=True, positive=True)
    if args.counts_only:
        counts = sample_counts(physics.outcome_probabilities(state, ch, tau_true), n_events, seed)
        _emit(cfg, f"{counts.n0},{counts.n1},{counts.n2}\n")
        return
    trial = TrialConfig(
        n_events, cfg.number("trials", "n_repetitions", integer=True, positive=True), seed, tau_true
    )
    try:
        rep = run_precision_study(state, ch, trial, cfg.get("trials", "estimator"))
    except EstimationError as exc:
        raise CommandError(EXIT_ESTIMATION, f"estimation failed ({exc.reason}): {exc}") from None
    except ValueError as exc:
        raise CommandError(EXIT_INPUT, str(exc)) from None
    items = [
        ("tau_true_ps", tau_true),
        ("n_events", trial.n_events),
        ("n_repetitions", trial.n_repetitions),
        ("estimator", cfg.get("trials", "estimator")),
        ("fisher_ps2", rep.fisher),
        ("mean_estimate_ps", rep.mean_estimate),
        ("empirical_std_ps", rep.empirical_std),
        ("bias_ps", rep.bias),
        ("cr_bound_ps", rep.cr_bound),
        ("qcr_bound_ps", rep.qcr_bound),
        ("efficiency_ratio", rep.efficiency_ratio),
        ("failure_count", rep.failure_count),
        ("n_success", rep.n_success),
    ]
    if args.reference_fisher is not None:
        items.append(("reference_fisher_ps2", args.reference_fisher))
        items.append(("reference_cr_bound_ps", information.cr_bound(args.reference_fisher, trial.n_events)))
    _emit(cfg, render_report(_meta(cfg, "simulate"), items, cfg.get("output", "json")))


def cmd_fit(cfg, args):
    if args.scan is None:
        raise CommandError(EXIT_INPUT, "fit needs --scan FILE")
    scan = read_scan(args.scan)
    try:
        res = fit_fringe(scan, max_iter=args.max_iter)
    except FitError as exc:
        trace = "; ".join(f"eval {i}: chi2={c:.6g}" for i, c in exc.trace[-5:])
        raise CommandError(EXIT_FIT, f"fit failed: {exc} [{trace}]") from None
    except ValueError as exc:
        raise CommandError(EXIT_INPUT, str(exc)) from None
    e = res.errors
    two_pi = 2.0 * math.pi
    bw_nm, tc = bandwidth_conversions(res.state.sigma)
    items = [
        ("delta_rad_ps", res.state.delta),
        ("delta_err_rad_ps", e["delta"]),
        ("delta_thz", res.state.delta / two_pi),
        ("delta_err_thz", e["delta"] / two_pi),
        ("sigma_rad_ps", res.state.sigma),
        ("sigma_err_rad_ps", e["sigma"]),
        ("sigma_thz", res.state.sigma / two_pi),
        ("sigma_err_thz", e["sigma"] / two_pi),
        ("bandwidth_nm_at_810", bw_nm),
        ("coherence_time_ps", tc),
        ("visibility", res.visibility),
        ("visibility_err", e["alpha"]),
        ("phi_rad", res.state.phi),
        ("phi_err_rad", e["phi"]),
        ("tau0_ps", res.tau0),
        ("tau0_err_ps", e["tau0"]),
        ("chi2", res.chi2),
        ("rss", res.rss),
        ("evaluations", res.evaluations),
        ("degenerate", res.degenerate),
    ]
    meta = _meta(cfg, "fit")
    meta["scan"] = str(args.scan)
    _emit(cfg, render_report(meta, items, cfg.get("output", "json")))
    model = fringe_model(scan.tau, res.state.delta, res.state.sigma, res.visibility, res.state.phi, res.tau0)
    _plot(cfg, "fit_figure", scan.tau, scan.ratio, model)


def _fiber_model(cfg):
    f = cfg.values["fiber"]
    kw = {
        name: cfg.number("fiber", name)
        for name in ("n_group_s", "n_group_i", "dn_dt", "dl_dt")
    }
    center = cfg.number("fiber", "center_nm", positive=True)

    def wavelengths(detuning_thz):
        m = sensor.FiberModel.from_detuning(detuning_thz, center, length_0=0.0, **kw)
        return m.lambda_s, m.lambda_i

    if f["lambda_s"] is not None or f["lambda_i"] is not None:
        lam = (cfg.number("fiber", "lambda_s", positive=True), cfg.number("fiber", "lambda_i", positive=True))
    else:
        lam = wavelengths(cfg.detuning_thz)
    calibrated = False
    length = cfg.optional_number("fiber", "length_0", nonneg=True)
    if f["calibrate_coefficient"] is not None:
        coeff = cfg.number("fiber", "calibrate_coefficient")
        cal_det = cfg.optional_number("fiber", "calibrate_detuning_thz")
        cal_lam = lam if cal_det is None else wavelengths(cal_det)
        ref = sensor.FiberModel(*cal_lam, length_0=0.0, **kw)
        try:
            length = sensor.calibrate_length(coeff, ref)
        except ValueError as exc:
            raise ConfigError(f"{cfg.where('fiber', 'calibrate_coefficient')}: {exc}") from None
        calibrated = True
    if length is None:
        raise ConfigError("fiber.length_0: set a length or fiber.calibrate_coefficient")
    try:
        return sensor.FiberModel(*lam, length_0=length, **kw), calibrated
    except ValueError as exc:
        raise ConfigError(f"fiber: {exc}") from None


def cmd_sensor(cfg, args):
    state, ch = cfg.state(), cfg.channel()
    model, calibrated = _fiber_model(cfg)
    t_min, t_max = cfg.number("sweep", "t_min"), cfg.number("sweep", "t_max")
    npts = cfg.number("sweep", "points", integer=True, positive=True)
    temp = np.linspace(t_min, t_max, npts)
    tau_s = cfg.number("sweep", "tau_s")
    beta = np.asarray(sensor.phase_shift(model, temp))
    probs = sensor.coincidence_vs_temperature(model, state, ch, temp, tau_s)
    coeff = sensor.thermal_coefficient(model)
    meta = _meta(cfg, "sensor")
    meta["summary.lambda_s_nm"] = model.lambda_s
    meta["summary.lambda_i_nm"] = model.lambda_i
    meta["summary.length_0_m"] = model.length_0
    meta["summary.length_calibrated"] = calibrated
    meta["summary.thermal_coefficient_rad_per_deg"] = coeff
    delta_tau = cfg.optional_number("sweep", "delta_tau", nonneg=True)
    if delta_tau is not None:
        try:
            meta["summary.temperature_resolution_deg"] = sensor.temperature_resolution(coeff, state, delta_tau)
        except ValueError as exc:
            raise CommandError(EXIT_INPUT, f"temperature resolution: {exc}") from None
    rows = list(zip(temp, beta, probs.p2))
    _emit(cfg, render_table(meta, ["T_deg", "beta_rad", "p_coincidence"], rows, cfg.get("output", "json")))
    _plot(cfg, "sensor_figure", temp, beta, probs.p2)


def _common(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", "-c", type=Path, help="YAML configuration file")
    g.add_argument("--detuning", type=float, help="detuning (unit per --unit)")
    g.add_argument("--bandwidth", type=float, help="RMS bandwidth (unit per --unit)")
    g.add_argument("--unit", choices=("thz", "rad_ps"), help="frequency unit of detuning/bandwidth (default thz)")
    g.add_argument("--phi", type=float, help="relative phase, rad")
    g.add_argument("--gamma", type=float, help="per-photon loss")
    g.add_argument("--alpha", type=float, help="visibility")
    g.add_argument("--seed", type=int)
    o = p.add_argument_group("output")
    o.add_argument("--output", "-o", help="output file (relative to $HOMBEAT_OUTPUT_DIR if set)")
    o.add_argument("--json", action="store_const", const=True, help="emit JSON instead of CSV")
    o.add_argument("--plot", help="also render a figure to this file")


def _grid_args(p):
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-points", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hombeat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hombeat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fringe", help="coincidence and outcome probabilities vs delay")
    _common(p)
    _grid_args(p)
    p.add_argument("--simulate", action="store_true", help="add binomially sampled coincidences")
    p.add_argument("--trials-per-point", type=int)
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("fisher", help="Fisher information and Cramer-Rao bound vs delay")
    _common(p)
    _grid_args(p)
    p.add_argument("--n-trials", type=float)
    p.add_argument("--ideal", action="store_const", const=True, help="add ideal-interferometer columns")
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("estimate", help="maximum-likelihood delay from counts")
    _common(p)
    p.add_argument("--counts", type=Path, help="file with one n0,n1,n2 line")
    p.add_argument("--tau-s", type=float, help="coarse working position, ps")
    p.add_argument("--slack", type=float)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="Monte Carlo precision study")
    _common(p)
    p.add_argument("--n-events", type=int)
    p.add_argument("--n-repetitions", type=int)
    p.add_argument("--tau-true", type=float, help="ps; default: Fisher-optimal point")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--estimator", choices=("closed_form", "numeric"))
    p.add_argument("--reference-fisher", type=float, help="also report the CR bound for this Fisher value")
    p.add_argument("--counts-only", action="store_true", help="emit one simulated n0,n1,n2 record")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a fringe scan")
    _common(p)
    p.add_argument("--scan", type=Path, help="CSV with tau_ps,coincidences,trials")
    p.add_argument("--max-iter", type=int, default=200, help="model evaluation budget per fit")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sensor", help="fibre temperature sweep")
    _common(p)
    p.add_argument("--center-nm", type=float)
    p.add_argument("--lambda-s", type=float)
    p.add_argument("--lambda-i", type=float)
    p.add_argument("--length", type=float, help="fibre length at room temperature, m")
    p.add_argument("--n-group-s", type=float)
    p.add_argument("--n-group-i", type=float)
    p.add_argument("--dn-dt", type=float)
    p.add_argument("--dl-dt", type=float)
    p.add_argument("--calibrate", type=float, help="measured coefficient (rad/deg) to calibrate the length")
    p.add_argument("--calibrate-detuning", type=float, help="detuning (THz) of the calibration point")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-points", type=int)
    p.add_argument("--tau-s", dest="sweep_tau_s", type=float, help="working point, ps")
    p.add_argument("--delta-tau", type=float, help="delay precision, ps")
    p.set_defaults(func=cmd_sensor)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for dest, key in OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None:
            overrides[key] = list(v) if isinstance(v, list) else v
    try:
        cfg = load_config(args.config, overrides)
        cfg.state()
        cfg.channel()
        args.func(cfg, args)
    except CommandError as exc:
        print(f"hombeat {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ParseError) as exc:
        print(f"hombeat {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"hombeat {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
