"""levyest command line: simulate, estimate, fit, table1, verify.

Every option is resolved as flag > --config file > built-in default, and
the resolved values are stored in ``manifest.json`` next to the outputs.
Passing that manifest back through ``--config`` repeats the run exactly.
Exit codes: 0 ok, 1 check failed, 2 usage, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, io, plotting
from .discrete import approx_select
from .errors import InvalidArgumentError, LevyEstError
from .fitting import lse_gamma_direct, lse_gamma_log, lse_vg_tails, mle_gamma, mom_vg
from .levy_sim import (
    GammaParams,
    RngStream,
    VGParams,
    simulate_gamma_jumps,
    simulate_gamma_skeleton,
    simulate_vg_difference,
    simulate_vg_timechange,
)
from .model_selection import PenaltyForm, default_m_max, regular_histograms, regularized_histograms, select
from .projection import INVERSE_SQUARE, LEBESGUE

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
SEED_ENV = "LEVY_CALIB_SEED"
BUILTIN_SEED = 20240101

DEFAULTS = {
    "simulate": {
        "process": "gamma", "alpha": 1.0, "beta": 1.0, "theta": 0.0, "sigma": 1.0, "nu": 1.0,
        "T": 365.0, "jumps": 2000, "steps": None,
    },
    "estimate": {
        "input": None, "T": None, "dt": None, "window": [0.1, 1.0], "measure": "auto",
        "family": "regular", "pen": "b:2", "truth": None, "grid_points": 400, "plot": True,
    },
    "fit": {
        "input": None, "method": "mle-gamma", "T": None, "dt": None, "window": [0.1, 1.0],
        "family": "regular", "pen": "b:2",
    },
    "table1": {
        "dt": [1.0, 0.5, 0.1, 0.01], "reps": 50, "modes": ["jump", "increment"], "jumps": 36500,
        "T": 365.0, "alpha": 1.0, "beta": 1.0, "window": [0.1, 1.0], "c": 2.0, "plot": True,
    },
    "verify": {"check": None, "reps": None, "plot": True},
}


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return BUILTIN_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative")
    return seed


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    cfg["seed"] = default_seed()
    if args.config:
        data = io.read_manifest(args.config)
        if "config" in data and "command" in data:
            if data["command"] != command:
                raise UsageError(f"manifest is for '{data['command']}', not '{command}'")
            data = data["config"]
        unknown = set(data) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
        cfg.update(data)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def parse_family(text: str, window, horizon: float):
    """'regular', 'regular:1..40', 'regular:5,10,20', 'regularized:1..20'."""
    kind, _, spec = text.partition(":")
    kind = kind.strip().lower()
    if kind not in ("regular", "regularized"):
        raise UsageError(f"unknown model family {kind!r}")
    if not spec:
        m_values = list(range(1, default_m_max(horizon, window) + 1))
    elif ".." in spec:
        lo, _, hi = spec.partition("..")
        m_values = list(range(int(lo), int(hi) + 1))
    else:
        m_values = [int(v) for v in spec.split(",")]
    if not m_values or min(m_values) < 1:
        raise UsageError(f"empty or invalid model list in {text!r}")
    return kind, m_values


def build_collection(cfg, horizon):
    window = tuple(float(v) for v in cfg["window"])
    kind, m_values = parse_family(cfg["family"], window, horizon)
    measure = cfg.get("measure", "auto")
    if kind == "regularized":
        if measure not in ("auto", "inv-square"):
            raise UsageError("the regularized family requires --measure inv-square")
        if window[0] != 0.0:
            raise UsageError("the regularized family needs a window of the form [0, b]")
        return regularized_histograms(window[1], m_values)
    ref = {"auto": LEBESGUE, "lebesgue": LEBESGUE, "inv-square": INVERSE_SQUARE}.get(measure)
    if ref is None:
        raise UsageError(f"unknown measure {measure!r}")
    return regular_histograms(window, m_values, ref)


def load_data(cfg, input_dir_manifest=True):
    path = Path(cfg["input"])
    kind = io.sniff(path)
    if kind == "increments":
        return io.read_increments(path, cfg.get("dt"))
    horizon = cfg.get("T")
    if horizon is None and input_dir_manifest:
        mpath = path.parent / io.MANIFEST_NAME
        if mpath.exists():
            horizon = io.read_manifest(mpath).get("config", {}).get("T")
    if horizon is None:
        raise UsageError("jump data carries no horizon: pass --T")
    cfg["T"] = float(horizon)
    return io.read_jumps(path, float(horizon))


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_simulate(cfg, out: Path, manifest: io.RunManifest):
    rng = RngStream(int(cfg["seed"]))
    T = float(cfg["T"])
    process = cfg["process"]
    steps = cfg["steps"]
    if process == "gamma":
        params = GammaParams(float(cfg["alpha"]), float(cfg["beta"]))
        data = simulate_gamma_skeleton(params, T, int(steps), rng) if steps else \
            simulate_gamma_jumps(params, T, int(cfg["jumps"]), rng)
    elif process == "vg":
        params = VGParams(float(cfg["theta"]), float(cfg["sigma"]), float(cfg["nu"]))
        data = simulate_vg_timechange(params, T, int(steps), rng) if steps else \
            simulate_vg_difference(params, T, int(cfg["jumps"]), rng)
    else:
        raise UsageError(f"unknown process {process!r}")
    if steps:
        path = io.write_increments(out / "increments.csv", data)
    else:
        path = io.write_jumps(out / "jumps.csv", data)
    manifest.add(path)
    print(f"wrote {path} ({len(data.sizes) if not steps else data.n} rows)")
    return EXIT_OK


def _selection(cfg, data):
    horizon = data.horizon
    collection = build_collection(cfg, horizon)
    form = PenaltyForm.parse(cfg["pen"])
    if hasattr(data, "increments"):
        if form.kind != "B":
            raise UsageError("the increment-based estimator uses penalty form B only")
        return approx_select(data, collection, form.c)
    return select(data, collection, form)


def cmd_estimate(cfg, out: Path, manifest: io.RunManifest):
    data = load_data(cfg)
    result = _selection(cfg, data)
    est = result.estimate
    manifest.add(io.write_csv(out / "estimate.csv", io.ESTIMATE_HEADER, est.table()))
    manifest.add(io.write_csv(out / "selection.csv", io.SELECTION_HEADER, result.rows()))
    manifest.notes.extend(result.notes)
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)

    a, b = est.model.window
    npts = int(cfg["grid_points"])
    x = np.linspace(a, b, npts) if a != 0.0 else np.linspace(b / npts, b, npts)
    p_hat = est.levy_density(x)
    truth = None
    if cfg["truth"]:
        truth = evaluation.ProcessSpec.parse(cfg["truth"]).density()(x)
        path = io.write_csv(out / "overlay.dat", io.OVERLAY_HEADER, zip(x.tolist(), p_hat.tolist(), truth.tolist()))
        manifest.add(path)
        gp = out / "overlay.gp"
        gp.write_text(plotting.gnuplot_overlay_script(path.name), encoding="utf-8")
        manifest.add(gp)
    if cfg["plot"]:
        manifest.add(plotting.estimate_figure(out / "estimate.png", x, p_hat, truth, est.model.label))
    ch = result.chosen
    print(f"chosen model {ch.label} (d_m={ch.dim}, D_m={ch.sup_constant:.6g}, score={ch.score:.6g})")
    return EXIT_OK


def cmd_fit(cfg, out: Path, manifest: io.RunManifest):
    data = load_data(cfg)
    method = cfg["method"]
    if method == "mle-gamma":
        report = mle_gamma(data)
    elif method == "mom-vg":
        report = mom_vg(data)
    elif method in ("lse-gamma", "lse-gamma-direct"):
        est = _selection(cfg, data).estimate
        report = lse_gamma_log(est) if method == "lse-gamma" else lse_gamma_direct(est)
    elif method == "lse-vg":
        a, b = (float(v) for v in cfg["window"])
        right = _selection({**cfg, "window": [a, b]}, data).estimate
        left = _selection({**cfg, "window": [-b, -a]}, data).estimate
        report = lse_vg_tails(left, right)
    else:
        raise UsageError(f"unknown fit method {method!r}")
    path = out / "fit.json"
    path.write_text(report.to_json(indent=2) + "\n", encoding="utf-8")
    manifest.add(path)
    print(json.dumps(report.params))
    return EXIT_OK


def cmd_table1(cfg, out: Path, manifest: io.RunManifest):
    rows = evaluation.table1(
        dts=tuple(float(v) for v in cfg["dt"]),
        replications=int(cfg["reps"]),
        modes=tuple(cfg["modes"]),
        params=GammaParams(float(cfg["alpha"]), float(cfg["beta"])),
        horizon=float(cfg["T"]),
        n_jumps=int(cfg["jumps"]),
        window=tuple(float(v) for v in cfg["window"]),
        c=float(cfg["c"]),
        master_seed=int(cfg["seed"]),
    )
    names = ("ppe_lse_alpha", "ppe_lse_beta", "mle_alpha", "mle_beta")
    header = ["dt", "sim_mode"]
    for n in names:
        header += [n, f"{n}_q25", f"{n}_q75"]
    header += ["lse_failures", "mle_failures", "mle_dropped_mean"]
    body = [
        [r.dt, r.sim_mode, *[v for n in names for v in r.stats[n]], r.lse_failures, r.mle_failures, r.mean_dropped]
        for r in rows
    ]
    comments = [
        f"Monte Carlo medians with interquartile range over {cfg['reps']} replications; single draws cannot be matched cell by cell",
        "jump mode: PPE-LSE from the simulated jumps, MLE from the binned increments (empty bins dropped)",
        "increment mode: exact Gamma skeleton at spacing dt; PPE from the increments",
    ]
    manifest.add(io.write_csv(out / "table1.csv", header, body, comments))
    if cfg["plot"]:
        manifest.add(plotting.table1_figure(out / "table1.png", rows))
    for line in body:
        print(",".join(io.fmt(v) for v in line))
    return EXIT_OK


def cmd_verify(cfg, out: Path, manifest: io.RunManifest):
    name = cfg["check"]
    if name not in evaluation.CHECKS:
        raise UsageError(f"unknown check {name!r}; choose from {', '.join(evaluation.CHECKS)}")
    kwargs = {"master_seed": int(cfg["seed"])}
    if cfg["reps"] is not None:
        kwargs["replications"] = int(cfg["reps"])
    res = evaluation.CHECKS[name](**kwargs)
    manifest.extra["check_config"] = res.config
    path = io.write_csv(out / f"{name}.csv", res.header, res.rows, res.details)
    manifest.add(path)
    if cfg["plot"] and name in ("oracle", "variance-term", "rate"):
        if name == "rate":
            T, risk, se = (np.array(c, dtype=float) for c in zip(*res.rows))
            slope, _, intercept = evaluation.loglog_slope(T, risk)
            manifest.add(plotting.rate_figure(out / "rate.png", T, risk, se, slope, intercept))
        else:
            models = [r for r in res.rows if r[0] != "ppe"]
            ppe = [r[4] for r in res.rows if r[0] == "ppe"]
            cols = list(zip(*models))
            manifest.add(plotting.risk_figure(out / f"{name}.png", [int(v) for v in cols[0]], cols[4], cols[5],
                                              cols[1], cols[2], ppe[0] if ppe else None))
    for line in res.details:
        print(line)
    print(f"{name}: {'PASS' if res.passed else 'FAIL'}")
    if not res.passed:
        manifest.notes.append("acceptance band violated: " + "; ".join(res.details))
        return EXIT_CHECK
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "fit": cmd_fit,
    "table1": cmd_table1,
    "verify": cmd_verify,
}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levyest", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", help="JSON config file or a previous manifest.json")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        if seed:
            sp.add_argument("--seed", type=int, help=f"master seed (default: ${SEED_ENV} or {BUILTIN_SEED})")

    def no_plot(sp):
        sp.add_argument("--no-plot", dest="plot", action="store_const", const=False,
                        help="skip the PNG figures (data files are still written)")

    def data_args(sp):
        sp.add_argument("input", nargs="?", help="jumps or increments CSV")
        sp.add_argument("--T", type=float, help="horizon of a jumps CSV (default: read from its manifest)")
        sp.add_argument("--dt", type=float, help="declared spacing of an increments CSV")
        sp.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))
        sp.add_argument("--family", help="regular[:m-list] or regularized[:m-list], e.g. regular:1..40")
        sp.add_argument("--pen", help="penalty form, e.g. b:2, a:2,1, c:2,1,1")

    sp = sub.add_parser("simulate", help="simulate jumps or an increment skeleton")
    sp.add_argument("process", nargs="?", choices=("gamma", "vg"))
    for name in ("alpha", "beta", "theta", "sigma", "nu", "T"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--jumps", type=int, help="series length (jump output)")
    sp.add_argument("--steps", type=int, help="number of increments (increment output)")
    common(sp)

    sp = sub.add_parser("estimate", help="penalized projection estimate from a CSV")
    data_args(sp)
    sp.add_argument("--measure", choices=("lebesgue", "inv-square"))
    sp.add_argument("--truth", help="true process for the overlay, e.g. gamma:1,1")
    sp.add_argument("--grid-points", dest="grid_points", type=int)
    common(sp, seed=False)
    no_plot(sp)

    sp = sub.add_parser("fit", help="parametric fit (MLE, MoM or least squares on the PPE)")
    data_args(sp)
    sp.add_argument("--method", choices=("mle-gamma", "mom-vg", "lse-gamma", "lse-gamma-direct", "lse-vg"))
    common(sp, seed=False)

    sp = sub.add_parser("table1", help="PPE-LSE versus MLE across observation spacings")
    sp.add_argument("--dt", type=float, nargs="+")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--modes", nargs="+", choices=("jump", "increment"))
    sp.add_argument("--jumps", type=int)
    for name in ("T", "alpha", "beta", "c"):
        sp.add_argument(f"--{name}", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))
    common(sp)
    no_plot(sp)

    sp = sub.add_parser("verify", help="run a named Monte Carlo acceptance check")
    sp.add_argument("check", nargs="?", help=", ".join(evaluation.CHECKS))
    sp.add_argument("--reps", type=int)
    common(sp)
    no_plot(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        cfg = resolve(args.command, args)
        for key in ("input", "check"):
            if key in cfg and cfg[key] is None:
                raise UsageError(f"{args.command}: missing {key}")
        if "input" in cfg:
            cfg["input"] = str(cfg["input"])
        out = _out_dir(args.out)
        manifest = io.RunManifest(args.command, cfg, cfg.get("seed"))
        with io.Stopwatch() as sw:
            code = COMMANDS[args.command](cfg, out, manifest)
        manifest.wall_clock = round(sw.elapsed, 3)
        manifest.write(out)
        return code
    except (UsageError, InvalidArgumentError) as exc:
        print(f"levyest {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LevyEstError, ArithmeticError) as exc:
        print(f"levyest {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
