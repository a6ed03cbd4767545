"""Command line interface: ``fchange {detect,simulate,critvals,power-study}``.

Every output carries the configuration, seed and library version so a run
can be replayed exactly. JSON numbers are written with 17 significant
digits. Exit status is 0 on success, 2 for bad input or parameters and 3
for numerically degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .dgp import NoiseSpec, fourier_basis, gen_noise, inject
from .errors import DegeneracyError, DimensionError, InputError, NumericalError, ParameterError
from .fseries import FSeries, Grid, read_csv, write_csv
from .limits import crit_value
from .pipeline import (
    RunConfig,
    StudySpec,
    analyze,
    choose_d,
    estimate_spectrum,
    limit_for,
    parse_change,
    power_study,
    rows_as_dicts,
)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# serialization


def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 2**53:
        return f"{x:.1f}"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def _table_csv(rows: list[dict], comments: list[str]) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(output, "w", newline="") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _envelope(command: str, config: dict, **payload) -> dict:
    return {"schema_version": SCHEMA_VERSION, "library_version": __version__,
            "command": command, "config": config, **payload}


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# argument parsing


def _bandwidth(text: str) -> float | None:
    if text.strip().lower() == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a number or 'auto', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _alphas(text: str) -> list[float]:
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse alpha list {text!r}") from None


def _add_test_flags(p: argparse.ArgumentParser, many_alphas: bool = False) -> None:
    p.add_argument("--method", choices=("pc", "ff", "wf"), default="wf")
    p.add_argument("--h", default=None, help="gradual weight, power:<alpha> or step (default: abrupt change)")
    p.add_argument("--kernel", choices=("bartlett", "parzen", "flattop"), default="bartlett")
    p.add_argument("--bandwidth", type=_bandwidth, default=None, help="float or 'auto' (default)")
    p.add_argument("--num-components", dest="d", type=int, default=None, help="PC dimension d")
    p.add_argument("--energy", type=float, default=None, help="PC: smallest d reaching this variance share")
    if many_alphas:
        p.add_argument("--alpha", type=_alphas, default=[0.1, 0.05, 0.01], help="comma-separated levels")
    else:
        p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mc-reps", dest="reps", type=int, default=2000)
    p.add_argument("--grid-steps", dest="steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", "-o", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fchange", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fchange {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="test a CSV dataset for a change in the mean")
    p.add_argument("input", help="CSV file, one curve per row")
    p.add_argument("--header", action="store_true", help="first row holds the grid points")
    _add_test_flags(p)

    p = sub.add_parser("simulate", help="write a synthetic dataset described by a JSON spec")
    p.add_argument("spec", help="JSON file ('-' for stdin)")
    p.add_argument("--seed", type=int, default=None, help="overrides the spec seed")
    p.add_argument("--mu", type=float, default=None, help="constant added to every curve")
    p.add_argument("--header", action="store_true", help="write the grid points as the first row")
    p.add_argument("--output", "-o", default=None)

    p = sub.add_parser("critvals", help="critical values of a null limit law")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--eigenvalues", help="JSON array, inline or a file path")
    src.add_argument("--from-data", help="CSV dataset to estimate the eigenvalues from")
    p.add_argument("--header", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_test_flags(p, many_alphas=True)

    p = sub.add_parser("power-study", help="rejection rates over a grid of settings")
    p.add_argument("spec", help="JSON file ('-' for stdin)")
    p.add_argument("--seed", type=int, default=None, help="overrides the spec seed")
    p.add_argument("--threads", type=int, default=None, help="overrides the spec thread count")
    p.add_argument("--output", "-o", default=None)
    return parser


def _run_config(args, input_path=None) -> RunConfig:
    alpha = args.alpha[0] if isinstance(args.alpha, list) else args.alpha
    return RunConfig(method=args.method, h=args.h, kernel=args.kernel, bandwidth=args.bandwidth,
                     d=args.d, energy=args.energy, alpha=alpha, reps=args.reps, steps=args.steps,
                     seed=args.seed, threads=args.threads, input=input_path, output=args.output,
                     header=getattr(args, "header", False))


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "method": cfg.method, "h": cfg.h, "kernel": cfg.kernel,
        "bandwidth": "auto" if cfg.bandwidth is None else cfg.bandwidth,
        "num_components": cfg.d, "energy": cfg.energy, "alpha": cfg.alpha,
        "mc_reps": cfg.reps, "grid_steps": cfg.steps, "seed": cfg.seed,
        "threads": cfg.threads, "input": cfg.input, "header": cfg.header,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_detect(args) -> None:
    cfg = _run_config(args, args.input)
    rep = analyze(read_csv(cfg.input, header=cfg.header), cfg)
    _emit(to_json(_envelope("detect", _config_echo(cfg), report=rep.to_dict())), args.output)


def simulate_dataset(spec: dict, seed: int | None = None, mu: float | None = None):
    """Build the dataset a ``simulate`` spec describes; returns it with the resolved spec."""
    spec = dict(spec)
    known = {"n", "m", "seed", "noise", "change", "scale", "delta", "mu"}
    unknown = set(spec) - known
    if unknown:
        raise ParameterError(f"unknown simulate keys {sorted(unknown)}")
    if "n" not in spec:
        raise ParameterError("simulate spec needs 'n'")
    if seed is not None:
        spec["seed"] = seed
    if mu is not None:
        spec["mu"] = mu
    spec.setdefault("m", 51)
    spec.setdefault("seed", 0)
    spec.setdefault("noise", {})
    spec.setdefault("scale", 0.0)
    spec.setdefault("delta", [1.0])
    spec.setdefault("mu", None)
    grid = Grid.uniform(int(spec["m"]))
    noise = gen_noise(NoiseSpec(**spec["noise"]), int(spec["n"]), grid, spec["seed"])
    coeffs = np.asarray(spec["delta"], dtype=float)
    delta = coeffs @ fourier_basis(grid, coeffs.size)
    change = spec.get("change")
    if change is None and spec["scale"]:
        raise ParameterError("a nonzero scale needs a 'change' entry")
    xs = noise if change is None else inject(noise, delta, parse_change(change), float(spec["scale"]))
    if spec["mu"] is not None:
        xs = FSeries(xs.data + np.asarray(spec["mu"], dtype=float), grid)
    return xs, spec


def cmd_simulate(args) -> None:
    xs, spec = simulate_dataset(_load_json(args.spec), args.seed, args.mu)
    comments = [f"fchange {__version__} simulate", "config " + json.dumps(spec, sort_keys=True)]
    if args.output is None or args.output == "-":
        write_csv(xs, sys.stdout, header=args.header, comments=comments)
    else:
        write_csv(xs, args.output, header=args.header, comments=comments)


def _eigenvalues_arg(text: str) -> np.ndarray:
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid eigenvalue array: {exc.msg}") from None
    else:
        values = _load_json(text)
    lam = np.asarray(values, dtype=float)
    if lam.ndim != 1 or lam.size == 0 or not np.all(np.isfinite(lam)):
        raise InputError("eigenvalues must be a non-empty flat array of finite numbers")
    return -np.sort(-lam)


def cmd_critvals(args) -> None:
    for a in args.alpha:
        if not 0 < a < 1:
            raise ParameterError("alpha must lie in (0, 1)")
    cfg = _run_config(args, args.from_data)
    if args.from_data:
        spec, bw = estimate_spectrum(read_csv(args.from_data, header=args.header), cfg.kernel, cfg.bandwidth)
        lam = spec.eigenvalues
        d = choose_d(spec, cfg.d, cfg.energy) if cfg.method == "pc" else None
    else:
        lam, bw = _eigenvalues_arg(args.eigenvalues), None
        if cfg.method == "pc" and cfg.d is None:
            share = np.cumsum(lam) / lam.sum()
            target = 0.9 if cfg.energy is None else cfg.energy
            d = int(np.searchsorted(share, target * (1 - 1e-12)) + 1)
        else:
            d = cfg.d
    lim = limit_for(cfg.method, lam, d, cfg.weight, cfg.reps, cfg.steps, cfg.seed, cfg.threads)
    pairs = [{"alpha": a, "critical_value": crit_value(lim, a)} for a in args.alpha]
    echo = _config_echo(cfg)
    echo.update(alpha=args.alpha, num_components=d, eigenvalues_from="data" if args.from_data else "list")
    if bw is not None:
        echo["bandwidth_used"] = bw
    if args.format == "json":
        _emit(to_json(_envelope("critvals", echo, eigenvalues=lam, critical_values=pairs)), args.output)
    else:
        comments = [f"fchange {__version__} critvals schema {SCHEMA_VERSION}", "config " + json.dumps(echo, sort_keys=True)]
        _emit(_table_csv(pairs, comments), args.output)


def cmd_power_study(args) -> None:
    raw = _load_json(args.spec)
    if not isinstance(raw, dict):
        raise InputError("study spec must be a JSON object")
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.threads is not None:
        raw["threads"] = args.threads
    study = StudySpec.from_dict(raw)
    rows = rows_as_dicts(power_study(study))
    echo = {k: getattr(study, k) for k in study.__dataclass_fields__}
    comments = [f"fchange {__version__} power-study schema {SCHEMA_VERSION}",
                f"seed {study.seed}", "config " + json.dumps(echo, sort_keys=True)]
    _emit(_table_csv(rows, comments), args.output)


COMMANDS = {"detect": cmd_detect, "simulate": cmd_simulate, "critvals": cmd_critvals, "power-study": cmd_power_study}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (DegeneracyError, NumericalError) as exc:
        print(f"fchange: degenerate data: {exc}", file=sys.stderr)
        return 3
    except (InputError, ParameterError, DimensionError, OSError, KeyError, TypeError) as exc:
        print(f"fchange: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
