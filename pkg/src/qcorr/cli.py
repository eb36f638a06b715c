"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 search budget
exhausted without a counterexample.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import absolute as ab
from .errors import BudgetExhausted, InvalidInput, QcorrError
from .report import (
    PROPERTIES,
    analyze,
    family_state,
    state_hash,
    sweep,
    threshold_table,
)
from .settings import DEFAULT_TOLERANCES, SEED_ENV_VAR, Tolerances, default_seed
from .states import DensityMatrix, load_state

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_EXHAUSTED = 0, 1, 2, 3
TOLERANCE_KEYS = ("herm", "psd", "eq", "trace")


class UsageError(InvalidInput):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# Formatting
# --------------------------------------------------------------------------


def fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def round_sig(obj: Any, digits: int) -> Any:
    """Round every float in a JSON-like structure to ``digits`` significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x, digits)) if math.isfinite(x) else str(x)
    if isinstance(obj, dict):
        return {k: round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    return obj


def dump(obj: Any, digits: int) -> str:
    return json.dumps(round_sig(obj, digits), indent=2, sort_keys=False)


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


def read_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[qcorr]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"config {path}: {exc}") from exc
    return {k: v.strip().strip('"') for k, v in parser["qcorr"].items()}


def resolve_settings(args) -> tuple[Tolerances, int]:
    cfg = read_config(args.config)
    unknown = set(cfg) - set(TOLERANCE_KEYS) - {"seed"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = {}
    for key in TOLERANCE_KEYS:
        raw = getattr(args, f"tol_{key}")
        if raw is None and key in cfg:
            raw = cfg[key]
        if raw is not None:
            try:
                values[key] = float(raw)
            except ValueError as exc:
                raise UsageError(f"tolerance {key} must be a number, got {raw!r}") from exc
            if not values[key] > 0:
                raise UsageError(f"tolerance {key} must be positive")
    tols = DEFAULT_TOLERANCES.replace(**values)
    seed = args.seed
    if seed is None and "seed" in cfg:
        seed = cfg["seed"]
    try:
        seed = default_seed() if seed is None else int(seed)
    except ValueError as exc:
        raise UsageError(f"seed must be an integer (check --seed, config or ${SEED_ENV_VAR})") from exc
    return tols, seed


# --------------------------------------------------------------------------
# State specification
# --------------------------------------------------------------------------


def load_spec(args, tols: Tolerances) -> tuple[DensityMatrix, dict[str, Any]]:
    if (args.file is None) == (args.family is None):
        raise UsageError("give exactly one of --file or --family")
    if args.file is not None:
        try:
            rho = load_state(args.file, tols)
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
        return rho, {"file": str(args.file), "matrix_sha256": state_hash(rho)}
    params = {}
    for name in ("w", "lam", "theta"):
        value = getattr(args, name)
        if value is not None:
            params["lambda" if name == "lam" else name] = value
    rho = family_state(args.family, params)
    return rho, {"family": args.family, "params": params}


def _add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--file", help="JSON state file")
    p.add_argument("--family", choices=("werner", "gisin"))
    p.add_argument("--w", type=float, help="Werner parameter")
    p.add_argument("--lambda", dest="lam", type=float, help="Gisin mixing parameter")
    p.add_argument("--theta", type=float, help="Gisin angle")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_analyze(args, out) -> int:
    tols, seed = resolve_settings(args)
    rho, desc = load_spec(args, tols)
    rep = analyze(rho, desc, seed=seed, tolerances=tols, with_discord=not args.no_discord)
    if args.format == "json":
        out.write(dump(rep.as_dict(), args.digits) + "\n")
        return EXIT_OK
    lines = [f"state: {json.dumps(desc)}", f"dims: {rep.dims[0]}x{rep.dims[1]}", ""]
    lines.append(f"{'property':<26}{'holds':<7}margin")
    for k, v in rep.verdicts.items():
        lines.append(f"{k:<26}{str(v.holds).lower():<7}{fmt(v.margin, args.digits)}")
    for k, v in rep.absolute.items():
        lines.append(f"{k:<26}{str(v.holds).lower():<7}{fmt(v.margin, args.digits)}")
    lines.append("")
    for k, v in rep.entropy.as_dict().items():
        lines.append(f"{k:<26}{fmt(v, args.digits)}")
    for k, v in rep.discord.items():
        lines.append(f"{k:<26}{fmt(v, args.digits)}")
    lines.append(f"{'classicality':<26}{rep.classicality}")
    lines.append(f"{'hierarchy consistent':<26}{str(rep.consistent).lower()}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def parse_range(text: str) -> tuple[str, np.ndarray]:
    """NAME=START:STOP:COUNT, inclusive of both ends."""
    try:
        name, spec = text.split("=", 1)
        start, stop, count = spec.split(":")
        values = np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise UsageError(f"bad --range {text!r}; expected NAME=START:STOP:COUNT") from exc
    if int(count) < 1:
        raise UsageError(f"--range {text!r} needs a positive count")
    return name.strip(), values


def parse_fixed(text: str) -> tuple[str, float]:
    try:
        name, value = text.split("=", 1)
        return name.strip(), float(value)
    except ValueError as exc:
        raise UsageError(f"bad --fixed {text!r}; expected NAME=VALUE") from exc


def cmd_sweep(args, out) -> int:
    tols, _ = resolve_settings(args)
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    for p in props:
        if p not in PROPERTIES:
            raise UsageError(f"unknown property {p!r}; choose from {', '.join(PROPERTIES)}")
    ranges = [parse_range(r) for r in args.range]
    if not ranges:
        raise UsageError("sweep needs at least one --range")
    fixed = dict(parse_fixed(f) for f in args.fixed)
    names = [n for n, _ in ranges]
    points = [{**fixed, **dict(zip(names, combo))} for combo in itertools.product(*(v for _, v in ranges))]
    rows = sweep(args.family, points, props, tols) if props else [[] for _ in points]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names + props)
    if props:
        for pt, row in zip(points, rows):
            writer.writerow([fmt(pt[n], args.digits) for n in names] + [fmt(x, args.digits) for x in row])
    text = buf.getvalue()
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror}") from exc
    else:
        out.write(text)
    return EXIT_OK


def cmd_tables(args, out) -> int:
    rows = threshold_table(tol=args.tol)
    if args.format == "json":
        out.write(dump([r.as_dict() for r in rows], args.digits) + "\n")
        return EXIT_OK
    lines = [f"{'family':<8}{'parameter':<11}{'property':<24}{'boundary':<16}bracket"]
    for r in rows:
        lines.append(
            f"{r.family:<8}{r.parameter:<11}{r.property:<24}{fmt(r.boundary, args.digits):<16}{fmt(r.bracket_width, 3)}"
        )
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_search(args, out) -> int:
    tols, seed = resolve_settings(args)
    rho, desc = load_spec(args, tols)
    if rho.dims != (2, 2):
        raise UsageError("search needs a two-qubit state")
    if args.budget < 1:
        raise UsageError("--budget must be positive")
    try:
        verdict = ab.falsify_absolute(rho, args.property, args.budget, seed, strict=True)
    except BudgetExhausted as exc:
        out.write(dump({
            "schema_version": 1, "state": desc, "property": args.property, "seed": seed,
            "result": "none found", "budget": args.budget, "best_margin": exc.best_margin,
        }, args.digits) + "\n")
        return EXIT_EXHAUSTED
    u = verdict.counterexample
    after = ab.ordinary_margin(ab.Property(args.property), ab.conjugate_matrix(rho, u))
    out.write(dump({
        "schema_version": 1, "state": desc, "property": args.property, "seed": seed,
        "result": "counterexample", "evaluated": verdict.details["evaluated"],
        "unitary": [[[float(z.real), float(z.imag)] for z in row] for row in u.matrix],
        "margin_after": after, "holds_after": after >= 0,
    }, args.digits) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=9, help="significant digits in output (default 9)")
    common.add_argument("--config", help="key=value file with tolerances (herm, psd, eq, trace) and seed")
    common.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV_VAR} or built-in)")
    for key in TOLERANCE_KEYS:
        common.add_argument(f"--tol-{key}", dest=f"tol_{key}", type=float)

    parser = _Parser(prog="qcorr", description="Correlation properties of bipartite quantum states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="classify one state")
    _add_state_args(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--no-discord", action="store_true", help="skip numerical discord")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", parents=[common], help="CSV of property margins over a parameter grid")
    p.add_argument("--family", choices=("werner", "gisin"), required=True)
    p.add_argument("--range", action="append", default=[], help="NAME=START:STOP:COUNT (repeatable)")
    p.add_argument("--fixed", action="append", default=[], help="NAME=VALUE (repeatable)")
    p.add_argument("--properties", default=",".join(PROPERTIES), help="comma-separated property names")
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", parents=[common], help="Werner and Gisin threshold tables")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--tol", type=float, default=1e-9, help="bisection tolerance")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("search", parents=[common], help="look for a conjugation breaking a property")
    _add_state_args(p)
    p.add_argument("--property", choices=[x.value for x in ab.Property], required=True)
    p.add_argument("--budget", type=int, default=10000)
    p.set_defaults(func=cmd_search)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.digits < 1 or args.digits > 17:
        print("qcorr: error: --digits must be between 1 and 17", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args, out)
    except (InvalidInput, ValueError) as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QcorrError as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"qcorr: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
