"""Command-line front end: ``erltel {density,simulate,verify,ufunc}``.

Every subcommand accepts ``--config FILE.json`` whose keys mirror the long
flag names (``lambda``, ``samples`` and so on); explicit flags win over the
file. CSV outputs carry a run manifest as ``#`` comment lines, and JSON
outputs carry it under ``"manifest"``. Set ``SOURCE_DATE_EPOCH`` to pin the
manifest timestamp for byte-identical reruns.

Exit codes: 0 success, 1 failing verification check, 2 invalid input or
domain error, 3 no closed form for the requested ``m``.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import shlex
import sys

import numpy as np

from . import __version__
from .algebra_series import DomainError, generate_table, required_truncation
from .closed_form import ModelParams, UnsupportedClosedFormError, atom_mass, density
from .monte_carlo import SimConfig, estimate_histogram, histogram_to_csv

EXIT_FAIL = 1
EXIT_DOMAIN = 2
EXIT_UNSUPPORTED = 3

# flag name -> (type, default)
_COMMON = {"m": (int, 1), "lambda": (float, 1.0), "v": (float, 1.0), "t": (float, 1.0)}
_DEFAULTS = {
    "density": {**_COMMON, "x": (float, None), "grid": (int, None), "out": (str, None)},
    "simulate": {**_COMMON, "samples": (int, 1_000_000), "seed": (int, 0), "bins": (int, 100),
                 "out": (str, None), "workers": (int, None)},
    "verify": {"suite": (str, "all"), "m": (int, None), "samples": (int, None), "seed": (int, 0),
               "out": (str, None), "workers": (int, None)},
    "ufunc": {"m": (int, 2), "l": (int, 0), "k": (int, 0), "t": (float, 1.0), "y": (float, 0.0)},
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_DOMAIN):
        super().__init__(message)
        self.code = code


def _fmt(x):
    return f"{float(x):.9g}"


def timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
              else _dt.datetime.now(_dt.timezone.utc))
    return moment.replace(microsecond=0).isoformat()


def manifest(command, config, argv):
    return {
        "command_line": "erltel " + " ".join(shlex.quote(a) for a in argv),
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
        "timestamp": timestamp(),
    }


def _manifest_lines(man):
    return [f"{key}: {json.dumps(val, sort_keys=True)}" for key, val in man.items()]


def resolve(args):
    """Merge flags over ``--config`` over defaults; returns a plain dict."""
    spec = _DEFAULTS[args.command]
    from_file = {}
    if args.config:
        try:
            with open(args.config) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(from_file) - set(spec)
        if unknown:
            raise CliError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    out = {}
    for name, (typ, default) in spec.items():
        flag = getattr(args, name.replace("-", "_"), None)
        if flag is not None:
            out[name] = flag
        elif name in from_file and from_file[name] is not None:
            try:
                out[name] = typ(from_file[name])
            except (TypeError, ValueError):
                raise CliError(f"config key {name!r} must be {typ.__name__}") from None
        else:
            out[name] = default
    return out


def _params(cfg):
    try:
        return ModelParams(cfg["m"], cfg["lambda"], cfg["v"])
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_density(cfg, argv):
    params = _params(cfg)
    t = cfg["t"]
    if not (t > 0 and math.isfinite(t)):
        raise CliError("t must be positive")
    if params.m not in (1, 2):
        raise CliError(
            f"no closed-form density for m={params.m}; "
            f"run 'erltel simulate --m {params.m}' (monte_carlo) instead",
            EXIT_UNSUPPORTED,
        )
    if cfg["x"] is not None and cfg["grid"] is not None:
        raise CliError("give either --x or --grid, not both")
    vt = params.v * t
    if cfg["grid"] is not None:
        if cfg["grid"] < 1:
            raise CliError("--grid needs a positive point count")
        xs = np.linspace(-vt, vt, cfg["grid"] + 2)[1:-1]
    elif cfg["x"] is not None:
        if not math.isfinite(cfg["x"]):
            raise CliError("x must be finite")
        xs = [cfg["x"]]
    else:
        raise CliError("one of --x or --grid is required")
    buf = io.StringIO()
    for line in _manifest_lines(manifest("density", cfg, argv)):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "f_c"])
    for x in xs:
        try:
            w.writerow([_fmt(x), _fmt(density(params, t, float(x)).continuous)])
        except UnsupportedClosedFormError as exc:
            raise CliError(str(exc), EXIT_UNSUPPORTED) from None
    w.writerow(["ATOM", _fmt(vt), _fmt(atom_mass(params, t))])
    _emit(buf.getvalue(), cfg["out"])
    return 0


def cmd_simulate(cfg, argv):
    params = _params(cfg)
    try:
        config = SimConfig(params, cfg["t"], cfg["samples"], cfg["seed"], cfg["bins"])
        if not math.isfinite(config.t):
            raise ValueError("t must be finite")
        hist = estimate_histogram(config, cfg["workers"])
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _emit(histogram_to_csv(hist, _manifest_lines(manifest("simulate", cfg, argv))), cfg["out"])
    return 0


def cmd_verify(cfg, argv):
    from .suite import SUITES, run_suite

    if cfg["suite"] not in SUITES + ("all",):
        raise CliError(f"unknown suite {cfg['suite']!r}; choose from {('all',) + SUITES}")
    if cfg["m"] is not None and cfg["m"] < 1:
        raise CliError("m must be positive")
    try:
        checks = run_suite(cfg["suite"], cfg["m"], cfg["samples"], cfg["seed"], cfg["workers"])
    except ValueError as exc:
        raise CliError(str(exc)) from None
    passed = all(c["passed"] for c in checks)
    report = {
        "manifest": manifest("verify", cfg, argv),
        "passed": passed,
        "n_checks": len(checks),
        "n_failed": sum(not c["passed"] for c in checks),
        "checks": checks,
    }
    # json writes floats with repr, which round-trips exactly
    _emit(json.dumps(report, indent=2) + "\n", cfg["out"])
    return 0 if passed else EXIT_FAIL


def cmd_ufunc(cfg, argv):
    m, l, k, t, y = cfg["m"], cfg["l"], cfg["k"], cfg["t"], cfg["y"]
    if m < 1:
        raise CliError("m must be positive")
    if not 0 <= l < 2 * m:
        raise CliError(f"l must satisfy 0 <= l < 2m = {2 * m}")
    if not 0 <= k <= 40:
        raise CliError("k must satisfy 0 <= k <= 40")
    if not (math.isfinite(t) and math.isfinite(y)):
        raise CliError("t and y must be finite")
    radius = max(4.0, math.ceil(math.sqrt(abs(t * t - y * y))) + 1.0)
    table = generate_table(m, k, required_truncation(radius, 2 * k + 4), radius)
    try:
        value = table.u(l, k, t, y)
    except DomainError as exc:
        raise CliError(str(exc)) from None
    print(repr(value))
    return 0


COMMANDS = {"density": cmd_density, "simulate": cmd_simulate, "verify": cmd_verify, "ufunc": cmd_ufunc}


def build_parser():
    parser = argparse.ArgumentParser(prog="erltel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with default flag values")
        return p

    def model_flags(p):
        p.add_argument("--m", type=int, help="Erlang shape (default 1)")
        p.add_argument("--lambda", dest="lambda", type=float, help="switching rate (default 1)")
        p.add_argument("--v", type=float, help="speed (default 1)")
        p.add_argument("--t", type=float, help="time (default 1)")

    p = add("density", "closed-form density table (m = 1, 2)")
    model_flags(p)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--x", type=float, help="single position")
    grp.add_argument("--grid", type=int, help="number of evenly spaced interior positions")
    p.add_argument("--out", help="write CSV here instead of stdout")

    p = add("simulate", "Monte Carlo histogram (any m)")
    model_flags(p)
    p.add_argument("--samples", type=int, help="number of paths (default 1e6)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--bins", type=int, help="histogram bins (default 100)")
    p.add_argument("--workers", type=int, help="threads; 0 = all CPUs (default: ERLTEL_THREADS)")
    p.add_argument("--out", help="write CSV here instead of stdout")

    p = add("verify", "run verification checks and print a JSON report")
    p.add_argument("--suite", help="all (default), normalization, boundary, cr, integrals, pde or mc")
    p.add_argument("--m", type=int, help="restrict the cr suite to this m")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count for the boundary and mc suites")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--workers", type=int, help="threads for simulation")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = add("ufunc", "evaluate a generated u^l_k")
    p.add_argument("--m", type=int, help="algebra order (default 2)")
    p.add_argument("--l", type=int, help="component index, 0 <= l < 2m")
    p.add_argument("--k", type=int, help="subscript, k >= 0")
    p.add_argument("--t", type=float)
    p.add_argument("--y", type=float)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg, argv)
    except CliError as exc:
        print(f"erltel {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
