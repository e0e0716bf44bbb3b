"""Command-line front end.

Every run writes ``data.csv``, a gnuplot script ``plot.gp`` and a
``meta.json`` manifest into the output directory. Exit status is 0 on
success, 2 for a bad configuration and 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import TimeGrid, compute_trace, dephasing_factor, stationary_coherence
from .nonmarkov import (
    DEFAULT_TAU_MAX,
    channel_capacity,
    markovian_crossover,
    nonmarkovianity_measure,
)
from .optimizer import closed_form_s_opt, ohmicity_sweep, optimal_s, temperature_sweep
from .quadrature import QuadratureConfig
from .spectral import (
    CutoffKind,
    Regime,
    SpectralParams,
    TemperatureSpec,
    convexity_check,
    origin_class,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

COMMANDS = ("trace", "stationary", "sopt", "nonmark", "crossover", "sweep-temp", "sweep-s",
            "convexity", "figure")

DEFAULTS = {
    "s": 3.0,
    "cutoff": "soft",
    "temp": "zero",
    "t_tilde": 1.0,
    "omega_c": 1.0,
    "abs_tol": 1e-10,
    "rel_tol": 1e-8,
    "max_panels": 4096,
    "tau_max": None,
    "points": 500,
    "t_min": 0.01,
    "t_max": 20.0,
    "t_points": 40,
    "s_min": None,
    "s_max": None,
    "s_step": None,
    "no_nq": False,
    "x_max": 20.0,
    "grid_size": 2048,
    "jobs": 1,
    "out": None,
    "figure": None,
}

_FIGURE_S_GRID = {"fig2": (0.1, 6.0, 0.05), "fig3": (0.25, 6.0, 0.25)}


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"invalid value for '{field}': {message}")
        self.field = field


def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="flat key = value file; flags override it")
    p.add_argument("--out", default=S, help="output directory (default: $DEPHASIM_OUT)")
    p.add_argument("--s", type=float, default=S, help="Ohmicity exponent")
    p.add_argument("--cutoff", default=S, help="soft, hard (sweeps also accept both)")
    p.add_argument("--temp", default=S, help="zero, finite or high")
    p.add_argument("--t-tilde", dest="t_tilde", type=float, default=S,
                   help="dimensionless temperature 2 k_B T / omega_c")
    p.add_argument("--omega-c", dest="omega_c", type=float, default=S,
                   help="cutoff frequency, used to convert times to physical units")
    p.add_argument("--abs-tol", dest="abs_tol", type=float, default=S)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)
    p.add_argument("--max-panels", dest="max_panels", type=int, default=S)
    p.add_argument("--tau-max", dest="tau_max", type=float, default=S)
    p.add_argument("--points", type=int, default=S, help="trace grid size")
    p.add_argument("--t-min", dest="t_min", type=float, default=S)
    p.add_argument("--t-max", dest="t_max", type=float, default=S)
    p.add_argument("--t-points", dest="t_points", type=int, default=S)
    p.add_argument("--s-min", dest="s_min", type=float, default=S)
    p.add_argument("--s-max", dest="s_max", type=float, default=S)
    p.add_argument("--s-step", dest="s_step", type=float, default=S)
    p.add_argument("--no-nq", dest="no_nq", action="store_true", default=S,
                   help="skip the back-flow measure in Ohmicity sweeps")
    p.add_argument("--x-max", dest="x_max", type=float, default=S)
    p.add_argument("--grid-size", dest="grid_size", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S, help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephasim", description="Exact pure-dephasing dynamics of a qubit in an Ohmic bath.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "trace": "Lambda, gamma and channel capacity on a time grid",
        "stationary": "long-time coherence",
        "sopt": "Ohmicity maximising the stationary coherence",
        "nonmark": "information back-flow intervals and N_Q",
        "crossover": "Ohmicity at which back-flow first appears",
        "sweep-temp": "s_opt and optimal coherence versus temperature",
        "sweep-s": "stationary coherence and N_Q versus Ohmicity",
        "convexity": "convexity of g and origin behaviour of x g(x)",
        "figure": "data and plot script for fig1, fig2 or fig3",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        if name == "figure":
            p.add_argument("figure", choices=("fig1", "fig2", "fig3"))
        _add_common(p)
    return parser


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", str(exc)) from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS or key in ("figure",):
            raise ConfigError(key, f"unknown key in {path} line {lineno}")
        out[key] = value
    return out


def _coerce(key, value):
    if value is None:
        return None
    default = DEFAULTS[key]
    try:
        if key in ("points", "t_points", "grid_size", "jobs", "max_panels"):
            return int(value)
        if key == "no_nq":
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if key in ("out", "figure"):
            return str(value)
        if key in ("cutoff", "temp"):
            return str(value).strip().lower()
        if isinstance(default, float) or default is None:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"cannot parse {value!r}") from exc
    return value


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags, then validate."""
    given = vars(args).copy()
    command = given.pop("command")
    cfg = dict(DEFAULTS)
    if command in ("sweep-temp", "sweep-s", "figure"):
        cfg["cutoff"] = "both"
    if "config" in given:
        cfg.update(read_config_file(given.pop("config")))
    cfg.update(given)
    cfg = {k: _coerce(k, v) if k in DEFAULTS else v for k, v in cfg.items()}
    cfg["command"] = command
    if cfg["out"] is None:
        cfg["out"] = os.environ.get("DEPHASIM_OUT", "dephasim-out")
    if cfg["tau_max"] is None:
        cfg["tau_max"] = 50.0 if command == "trace" else DEFAULT_TAU_MAX

    def check(field, ok, message):
        if not ok:
            raise ConfigError(field, message)

    check("s", cfg["s"] > 0 and math.isfinite(cfg["s"]), "must be positive")
    allowed = ("soft", "hard", "both") if command in ("sweep-temp", "sweep-s", "figure") \
        else ("soft", "hard")
    check("cutoff", cfg["cutoff"] in allowed, f"must be one of {', '.join(allowed)}")
    check("temp", cfg["temp"] in ("zero", "finite", "high"), "must be zero, finite or high")
    check("t_tilde", cfg["t_tilde"] > 0 and math.isfinite(cfg["t_tilde"]), "must be positive")
    check("omega_c", cfg["omega_c"] > 0 and math.isfinite(cfg["omega_c"]), "must be positive")
    check("abs_tol", cfg["abs_tol"] > 0, "must be positive")
    check("rel_tol", cfg["rel_tol"] > 0, "must be positive")
    check("max_panels", cfg["max_panels"] >= 8, "must be >= 8")
    check("tau_max", cfg["tau_max"] > 0 and math.isfinite(cfg["tau_max"]), "must be positive")
    check("points", cfg["points"] >= 2, "must be >= 2")
    check("t_min", cfg["t_min"] > 0, "must be positive")
    check("t_max", cfg["t_max"] > cfg["t_min"], "must exceed t_min")
    check("t_points", cfg["t_points"] >= 2, "must be >= 2")
    for key in ("s_min", "s_max", "s_step"):
        if cfg[key] is not None:
            check(key, cfg[key] > 0 and math.isfinite(cfg[key]), "must be positive")
    if cfg["s_min"] is not None and cfg["s_max"] is not None:
        check("s_max", cfg["s_max"] >= cfg["s_min"], "must not be below s_min")
    check("x_max", cfg["x_max"] > 1e-4, "must exceed 1e-4")
    check("grid_size", cfg["grid_size"] >= 64, "must be >= 64")
    check("jobs", cfg["jobs"] >= 1, "must be >= 1")
    return cfg


def _temperature(cfg) -> TemperatureSpec:
    if cfg["temp"] == "zero":
        return TemperatureSpec.zero()
    if cfg["temp"] == "finite":
        return TemperatureSpec.finite(cfg["t_tilde"])
    return TemperatureSpec.high(cfg["t_tilde"])


def _quad(cfg) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=cfg["abs_tol"], rel_tol=cfg["rel_tol"],
                            max_panels=cfg["max_panels"])


def _cutoffs(cfg):
    if cfg["cutoff"] == "both":
        return [CutoffKind.SOFT, CutoffKind.HARD]
    return [CutoffKind(cfg["cutoff"])]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.12g}"
    return "0" if text == "-0" else text


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _s_grid(cfg, figure=None):
    lo, hi, step = _FIGURE_S_GRID.get(figure, (0.25, 6.0, 0.25))
    lo = cfg["s_min"] if cfg["s_min"] is not None else lo
    hi = cfg["s_max"] if cfg["s_max"] is not None else hi
    step = cfg["s_step"] if cfg["s_step"] is not None else step
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = np.round(lo + step * np.arange(n), 10)
    if np.any(grid > 8):
        raise ConfigError("s_max", "Ohmicity sweeps are limited to s <= 8")
    return grid


def _plot_script(title, xlabel, ylabel, series, logx=False, logy=False) -> str:
    lines = [
        f"# {title}",
        'set datafile separator ","',
        "set key autotitle columnhead",
        f'set title "{title}"',
        f'set xlabel "{xlabel}"',
        f'set ylabel "{ylabel}"',
    ]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    parts = [f"'data.csv' using 1:{col} with lines" for col in series]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def _columns(header, names):
    return [header.index(n) + 1 for n in names if n in header]


def _run_trace(cfg):
    p = SpectralParams(cfg["s"], CutoffKind(cfg["cutoff"]), cfg["omega_c"])
    tau_max = cfg["tau_max"]
    grid = TimeGrid.uniform(tau_max, cfg["points"])
    tr = compute_trace(p, _temperature(cfg), grid, _quad(cfg))
    cap = channel_capacity(tr.lam)
    header = ["tau", "lambda", "gamma", "capacity", "t"]
    rows = zip(tr.tau, tr.lam, tr.gamma, cap, tr.tau / p.omega_c)
    plot = _plot_script("Dephasing trace", "omega_c t", "value", [2, 3, 4])
    return header, list(rows), plot, {}


def _run_stationary(cfg):
    p = SpectralParams(cfg["s"], CutoffKind(cfg["cutoff"]))
    t = _temperature(cfg)
    sc = stationary_coherence(p, t, _quad(cfg))
    header = ["s", "lambda_inf", "coherence", "trapped"]
    rows = [(p.s, sc.lam_inf, sc.value, sc.trapped)]
    summary = {"origin_class": origin_class(p, t).value}
    return header, rows, _plot_script("Stationary coherence", "s", "coherence", [3]), summary


def _run_sopt(cfg):
    cutoff = CutoffKind(cfg["cutoff"])
    t = _temperature(cfg)
    opt = optimal_s(cutoff, t, _quad(cfg))
    closed = math.nan if t.regime is Regime.FINITE else closed_form_s_opt(cutoff, t)
    header = ["s_opt", "coherence_at_opt", "s_opt_closed_form"]
    rows = [(opt.s_opt, opt.coherence_at_opt, closed)]
    return header, rows, _plot_script("Optimal Ohmicity", "s_opt", "coherence", [2]), {}


def _run_nonmark(cfg):
    p = SpectralParams(cfg["s"], CutoffKind(cfg["cutoff"]))
    t = _temperature(cfg)
    tau_max = cfg["tau_max"]
    quad = _quad(cfg)
    report = nonmarkovianity_measure(p, t, tau_max, quad)
    rows = []
    for a, b in report.intervals:
        la, lb = dephasing_factor(p, t, a, quad), dephasing_factor(p, t, b, quad)
        qa, qb = channel_capacity(la), channel_capacity(lb)
        rows.append((a, b, la, lb, qa, qb, max(qb - qa, 0.0)))
    header = ["a", "b", "lambda_a", "lambda_b", "capacity_a", "capacity_b", "gain"]
    summary = {"n_q": report.n_q, "truncated": report.truncated,
               "intervals": len(report.intervals)}
    plot = _plot_script("Back-flow intervals", "interval start", "capacity gain", [7])
    return header, rows, plot, summary


def _run_crossover(cfg):
    t = _temperature(cfg)
    tau_max = cfg["tau_max"]
    s_star = markovian_crossover(t, CutoffKind(cfg["cutoff"]), _quad(cfg), tau_max=tau_max)
    header = ["s_star"]
    return header, [(s_star,)], _plot_script("Markovian crossover", "s*", "", [1]), {}


def _run_sweep_temp(cfg, figure=None):
    grid = np.geomspace(cfg["t_min"], cfg["t_max"], cfg["t_points"])
    res = temperature_sweep(_cutoffs(cfg), grid, _quad(cfg), jobs=cfg["jobs"])
    header = res.header()
    plot = _plot_script("s_opt versus temperature", "T~", "s_opt / coherence",
                        list(range(2, len(header) + 1)), logx=True)
    return header, res.rows(), plot, {}


def _run_sweep_s(cfg, figure=None):
    grid = _s_grid(cfg, figure)
    tau_max = cfg["tau_max"]
    with_nq = figure != "fig2" and not cfg["no_nq"]
    res = ohmicity_sweep(grid, _temperature(cfg), tau_max, _quad(cfg), _cutoffs(cfg),
                         with_nq=with_nq, jobs=cfg["jobs"])
    header = res.header()
    if figure == "fig3":
        names = [n for n in header if n.endswith("_norm")]
        title = "Normalised N_Q and stationary coherence"
    elif figure == "fig2":
        names = [n for n in header if n.startswith("coherence") and not n.endswith("_norm")]
        title = "Stationary coherence at zero temperature"
    else:
        names = [n for n in header[1:] if not n.endswith("_norm")]
        title = "Ohmicity sweep"
    plot = _plot_script(title, "s", "value", _columns(header, names))
    return header, res.rows(), plot, {}


def _run_convexity(cfg):
    p = SpectralParams(cfg["s"], CutoffKind(cfg["cutoff"]))
    t = _temperature(cfg)
    conv = convexity_check(p, t, cfg["x_max"], cfg["grid_size"])
    header = ["s", "convexity", "origin_class"]
    rows = [(p.s, conv.value, origin_class(p, t).value)]
    return header, rows, _plot_script("Convexity of g", "s", "", [1]), {}


def _run_figure(cfg):
    fig = cfg["figure"]
    if fig == "fig1":
        return _run_sweep_temp(cfg, fig)
    cfg = dict(cfg, temp="zero")
    return _run_sweep_s(cfg, fig)


_RUNNERS = {
    "trace": _run_trace,
    "stationary": _run_stationary,
    "sopt": _run_sopt,
    "nonmark": _run_nonmark,
    "crossover": _run_crossover,
    "sweep-temp": _run_sweep_temp,
    "sweep-s": _run_sweep_s,
    "convexity": _run_convexity,
    "figure": _run_figure,
}


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_outputs(out_dir: Path, csv_text: str, plot_text: str, manifest: dict):
    """Stage every file next to the target and move them in, manifest last."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    try:
        payload = {"data.csv": csv_text.encode(), "plot.gp": plot_text.encode()}
        for name, data in payload.items():
            (staging / name).write_bytes(data)
        manifest["checksums"] = {name: _sha256(data) for name, data in payload.items()}
        (staging / "meta.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        for name in ("data.csv", "plot.gp", "meta.json"):
            os.replace(staging / name, out_dir / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def run(config: dict) -> int:
    """Execute a resolved configuration and write its outputs."""
    start = time.perf_counter()
    command = config["command"]
    try:
        header, rows, plot, summary = _RUNNERS[command](config)
    except ConfigError as exc:
        print(f"dephasim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"dephasim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    csv_text = render_csv(header, rows)
    manifest = {
        "tool": "dephasim",
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in sorted(config.items())},
        "duration_s": time.perf_counter() - start,
        "rows": len(rows),
        "summary": summary,
    }
    write_outputs(Path(config["out"]), csv_text, plot, manifest)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"dephasim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
