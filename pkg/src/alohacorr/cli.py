"""Command-line front end: figure data, single-cell moments, and the validation table.

Every command writes a CSV plus a JSON run manifest next to it
(``<out stem>.manifest.json``).  Parameters resolve as command-line flags,
then ``--config`` JSON, then built-in defaults.  A manifest is itself a valid
``--config`` file, so re-running from it reproduces the recorded digests.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__, analytic, montecarlo
from .analytic import FadingModel, LinkConfig, NetworkConfig
from .errors import ConfigurationError, DivergenceError, NonConvergenceError, StatisticalError
from .pathloss import PathLossModel

log = logging.getLogger("alohacorr")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NONCONVERGENCE = 0, 1, 2, 3
DEFAULT_SEED = 20080601

FIG1_HEADER = ["epsilon", "separation", "zeta_over_p"]
FIG2_HEADER = ["p", "p_success", "p_cond"]
VALIDATE_HEADER = ["quantity", "params", "analytic", "mc_value", "mc_stderr", "z_score", "pass"]

FIG1_DEFAULTS = {
    "alpha": 4.0, "lam": 1.0, "p": 1.0, "fading": "none",
    "epsilons": [1.0, 0.1, 0.01],
    "separations": [round(0.05 * i, 10) for i in range(61)],
    "seed": DEFAULT_SEED,
}
FIG2_DEFAULTS = {
    "alpha": 4.0, "epsilon": 0.0, "lam": 1.0, "theta": 1.0, "link_distance": 0.5,
    "p_grid": [round(0.05 * i, 10) for i in range(21)],
    "seed": DEFAULT_SEED,
}
DEFAULT_GRID = [
    {"kind": "interference", "lam": 1.0, "p": 0.5, "alpha": 4.0, "epsilon": 1.0,
     "fading": "rayleigh", "separation": 1.0},
    {"kind": "interference", "lam": 1.0, "p": 0.7, "alpha": 4.0, "epsilon": 1.0, "fading": "none"},
    {"kind": "interference", "lam": 1.0, "p": 1.0, "alpha": 4.0, "epsilon": 1.0,
     "fading": "rayleigh", "separation": 1.0},
    {"kind": "outage", "lam": 1.0, "p": 0.5, "alpha": 4.0, "epsilon": 0.0,
     "link_distance": 0.5, "theta": 1.0},
]
VALIDATE_DEFAULTS = {
    "replications": 20_000, "seed": DEFAULT_SEED, "eta": montecarlo.DEFAULT_ETA,
    "resamples": 1000, "grid": DEFAULT_GRID,
}
MOMENTS_DEFAULTS = {
    "lam": 1.0, "p": 0.5, "alpha": 4.0, "epsilon": 1.0, "fading": "rayleigh",
    "replications": 20_000, "seed": DEFAULT_SEED, "eta": montecarlo.DEFAULT_ETA,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.12g}"


def _params_str(d: dict) -> str:
    return ";".join(f"{k}={v:g}" if isinstance(v, (int, float)) else f"{k}={v}" for k, v in d.items())


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def write_manifest(command, params, out: Path, started, extra=None) -> Path:
    manifest = {
        "command": command,
        "parameters": params,
        "master_seed": params.get("seed"),
        "version": __version__,
        "outputs": {out.name: {"sha256": _sha256(out)}},
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
    }
    if extra:
        manifest.update(extra)
    path = manifest_path(out)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _load_config(path, command):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    if "parameters" in data:  # a run manifest
        if data.get("command") not in (None, command):
            raise UsageError(f"manifest was written by {data['command']!r}, not {command!r}")
        data = data["parameters"]
    return data


def resolve(args, command, defaults) -> dict:
    params = json.loads(json.dumps(defaults))
    if getattr(args, "config", None):
        cfg = _load_config(args.config, command)
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        params.update(cfg)
    for key in defaults:
        if key in vars(args):
            params[key] = getattr(args, key)
    return params


def _network(cell) -> NetworkConfig:
    return NetworkConfig(
        lam=float(cell["lam"]), p=float(cell["p"]),
        pathloss=PathLossModel(float(cell["alpha"]), float(cell.get("epsilon", 0.0))),
        fading=FadingModel.parse(str(cell.get("fading", "rayleigh"))),
    )


# --- commands --------------------------------------------------------------

def cmd_fig1(params) -> tuple[list, list]:
    fading = FadingModel.parse(params["fading"])
    if any(not e > 0 for e in params["epsilons"]):
        raise UsageError("fig1 needs every epsilon > 0")
    if any(d < 0 for d in params["separations"]):
        raise UsageError("separations must be non-negative")
    if not params["p"] > 0:
        raise UsageError("fig1 normalises by p, which must be positive")
    rows = []
    for eps in params["epsilons"]:
        net = NetworkConfig(params["lam"], params["p"], PathLossModel(params["alpha"], eps), fading)
        for d in params["separations"]:
            zeta = analytic.spatial_temporal_correlation(net, d)
            rows.append([_fmt(eps), _fmt(d), _fmt(zeta / net.p)])
    return FIG1_HEADER, rows


def cmd_fig2(params) -> tuple[list, list]:
    link = LinkConfig(params["link_distance"], params["theta"])
    rows = []
    for p in params["p_grid"]:
        net = NetworkConfig(params["lam"], p, PathLossModel(params["alpha"], params["epsilon"]),
                            FadingModel.rayleigh())
        ps = analytic.success_probability(net, link)
        rows.append([_fmt(p), _fmt(ps), _fmt(analytic.conditional_ratio(net, link) * ps)])
    return FIG2_HEADER, rows


def _row(quantity, pstr, exact, est, allowance=0.0):
    if est is None:
        return [quantity, pstr, _fmt(exact), "nan", "nan", "nan", "false"]
    diff = est.value - exact
    if est.std_error > 0:
        z = diff / est.std_error
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    ok = abs(z) <= 3 or abs(diff) <= allowance
    return [quantity, pstr, _fmt(exact), _fmt(est.value), _fmt(est.std_error), _fmt(z),
            "true" if ok else "false"]


def _interference_rows(cell, params, workers, moments_only=False):
    net = _network(cell)
    base = {k: cell[k] for k in ("lam", "p", "alpha", "epsilon")}
    base["fading"] = str(net.fading)
    pstr = _params_str(base)
    sep = cell.get("separation")
    receivers = ((0.0, 0.0),) if sep is None else ((0.0, 0.0), (float(sep), 0.0))
    plan = montecarlo.SimulationPlan(net, receivers=receivers, replications=params["replications"],
                                     master_seed=params["seed"], eta=params["eta"])
    samples = montecarlo.simulate(plan, workers)
    allowance = 2 * params["eta"]
    wanted = [("mean", analytic.mean_interference(net)),
              ("variance", analytic.interference_variance(net))]
    if not moments_only:
        wanted.append(("zeta_t", analytic.temporal_correlation(net)))
        if sep is not None:
            wanted.append(("zeta_s", analytic.spatial_temporal_correlation(net, sep)))
    rows = []
    try:
        mean, var = montecarlo.estimate_moments(samples)
    except StatisticalError as exc:
        log.warning("%s: %s", pstr, exc)
        mean = var = None
    for name, exact in wanted:
        if name == "mean":
            rows.append(_row(name, pstr, exact, mean, allowance * abs(exact)))
        elif name == "variance":
            rows.append(_row(name, pstr, exact, var))
        else:
            other = 0 if name == "zeta_t" else 1
            label = pstr if name == "zeta_t" else f"{pstr};d={sep:g}"
            try:
                est = montecarlo.estimate_correlation(samples, (0, 0), (other, 1), method="bootstrap",
                                                      resamples=params.get("resamples", 1000))
            except StatisticalError as exc:
                log.warning("%s %s: %s", name, label, exc)
                est = None
            rows.append(_row(name, label, exact, est))
    return rows


def _outage_rows(cell, params, workers):
    net = _network(dict(cell, fading="rayleigh"))
    link = LinkConfig(float(cell["link_distance"]), float(cell["theta"]))
    base = {k: cell[k] for k in ("lam", "p", "alpha", "epsilon", "link_distance", "theta")}
    pstr = _params_str(base)
    plan = montecarlo.SimulationPlan(net, link=link, replications=params["replications"],
                                     master_seed=params["seed"], eta=params["eta"])
    exact = [analytic.success_probability(net, link), analytic.joint_success_probability(net, link),
             analytic.conditional_ratio(net, link)]
    try:
        ests = montecarlo.estimate_outage(plan, workers, resamples=params.get("resamples", 1000))
    except StatisticalError as exc:
        log.warning("%s: %s", pstr, exc)
        ests = (None, None, None)
    return [_row(q, pstr, e, m) for q, e, m in zip(("p_success", "p_joint", "ratio"), exact, ests)]


def cmd_validate(params, workers=1) -> tuple[list, list]:
    rows = []
    for cell in params["grid"]:
        kind = cell.get("kind", "interference")
        if kind == "interference":
            rows += _interference_rows(cell, params, workers)
        elif kind == "outage":
            rows += _outage_rows(cell, params, workers)
        else:
            raise UsageError(f"unknown grid cell kind {kind!r}")
    return VALIDATE_HEADER, rows


def cmd_moments(params, workers=1) -> tuple[list, list]:
    cell = {k: params[k] for k in ("lam", "p", "alpha", "epsilon", "fading")}
    if not cell["epsilon"] > 0:
        raise UsageError("moments need epsilon > 0")
    return VALIDATE_HEADER, _interference_rows(cell, params, workers, moments_only=True)


# --- argument parsing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="alohacorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, default_out):
        p.add_argument("--out", type=Path, default=Path(default_out), help="CSV output path")
        p.add_argument("--seed", type=_u64, default=S, help="master seed (unsigned 64-bit)")
        p.add_argument("--config", type=Path, help="JSON config or run manifest")

    def net_flags(p):
        p.add_argument("--alpha", type=float, default=S, help="path-loss exponent (> 2)")
        p.add_argument("--lam", "--lambda", dest="lam", type=float, default=S, help="node density")

    f1 = sub.add_parser("fig1", help="spatial correlation curve zeta/p versus separation")
    common(f1, "fig1.csv")
    net_flags(f1)
    f1.add_argument("--p", type=float, default=S, help="ALOHA transmit probability")
    f1.add_argument("--fading", default=S, help="none | rayleigh | nakagami:<m> (default none)")
    f1.add_argument("--epsilons", type=_floats, default=S)
    f1.add_argument("--separations", type=_floats, default=S)

    f2 = sub.add_parser("fig2", help="unconditional and conditional link success versus p")
    common(f2, "fig2.csv")
    net_flags(f2)
    f2.add_argument("--epsilon", type=float, default=S, help="path-loss softening (0 = singular)")
    f2.add_argument("--theta", type=float, default=S, help="SIR threshold")
    f2.add_argument("--link-distance", dest="link_distance", type=float, default=S)
    f2.add_argument("--p-grid", dest="p_grid", type=_floats, default=S)

    va = sub.add_parser("validate", help="analytic versus Monte Carlo table")
    common(va, "validate.csv")
    va.add_argument("--replications", type=int, default=S)
    va.add_argument("--eta", type=float, default=S, help="truncation bias bound")
    va.add_argument("--resamples", type=int, default=S, help="bootstrap resamples for correlations")
    va.add_argument("--workers", type=int, default=1)

    mo = sub.add_parser("moments", help="single-cell interference mean and variance")
    common(mo, "moments.csv")
    net_flags(mo)
    mo.add_argument("--p", type=float, default=S)
    mo.add_argument("--epsilon", type=float, default=S)
    mo.add_argument("--fading", default=S)
    mo.add_argument("--replications", type=int, default=S)
    mo.add_argument("--eta", type=float, default=S)
    mo.add_argument("--workers", type=int, default=1)
    return parser


COMMANDS = {
    "fig1": (FIG1_DEFAULTS, lambda p, a: cmd_fig1(p)),
    "fig2": (FIG2_DEFAULTS, lambda p, a: cmd_fig2(p)),
    "validate": (VALIDATE_DEFAULTS, lambda p, a: cmd_validate(p, a.workers)),
    "moments": (MOMENTS_DEFAULTS, lambda p, a: cmd_moments(p, a.workers)),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    defaults, run = COMMANDS[args.command]
    started = time.perf_counter()
    try:
        params = resolve(args, args.command, defaults)
        header, rows = run(params, args)
    except NonConvergenceError as exc:
        print(f"alohacorr: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (UsageError, ConfigurationError, DivergenceError, ValueError, KeyError, TypeError) as exc:
        print(f"alohacorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = args.out
    _write_csv(out, header, rows)
    extra = {"workers": args.workers} if hasattr(args, "workers") else None
    write_manifest(args.command, params, out, started, extra)
    if header is VALIDATE_HEADER:
        failed = [r for r in rows if r[-1] != "true"]
        for r in failed:
            print(f"FAIL {r[0]} [{r[1]}] analytic={r[2]} mc={r[3]} se={r[4]}", file=sys.stderr)
        if failed:
            return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
