"""Command-line driver: compute, design, worst-case, analyze, table1.

Every command builds a :class:`Report` holding an exact JSON payload plus a
flat list of rows used for the CSV and Markdown renderings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import lp
from .errors import HypothesisViolated, NoFiniteBound, PoAError, ValidationError
from .game import (CCE_CAP, NASH_CAP, NAMED_GAMES, ExplicitGame, brute_force_poa, enumerate_nash,
                   optimal_cost, parse_game_data, worst_cce_value)
from .poa import fixed_rule_panel, optimal_rules, poa_lp
from .resource_types import BASIS_FAMILIES, DEFAULT_BASIS_DIGITS, TypeSet, basis_types, make_type, type_set
from .scalar import FLOAT, RATIONAL, format_scalar, parse_scalar, to_decimal_string
from .smoothness import PAIR_CAP, generalized_poa, robust_poa
from .worstcase import build_worst_case, verify_worst_case

log = logging.getLogger("poakit")

FORMATS = ("json", "csv", "md")
CSV_DIGITS = 12


@dataclass
class RunConfig:
    arithmetic: str = RATIONAL
    nash_cap: int = NASH_CAP
    cce_cap: int = CCE_CAP
    pair_cap: int = PAIR_CAP
    max_bits: Optional[int] = lp.DEFAULT_MAX_BITS
    restricted: bool = True
    nonneg: bool = False
    digits: int = DEFAULT_BASIS_DIGITS
    out: Optional[Path] = None
    fmt: Optional[str] = None

    def __post_init__(self):
        for name in ("nash_cap", "cce_cap", "pair_cap", "digits"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.max_bits is not None and self.max_bits <= 0:
            raise ValidationError("max_bits must be positive")
        if self.fmt is not None and self.fmt not in FORMATS:
            raise ValidationError(f"unknown format {self.fmt!r}")


@dataclass
class Report:
    data: dict
    rows: list = field(default_factory=list)
    files: dict = field(default_factory=dict)   # extra outputs: path -> JSON object
    exit_code: int = 0


# --------------------------------------------------------------------------
# inputs


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: invalid JSON ({exc})") from None


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def parse_game(text: str) -> ExplicitGame:
    """Game from its JSON text; schema errors name the offending path."""
    return parse_game_data(_load_json(text, "game"))


def parse_values(text: Optional[str]) -> Optional[list[Fraction]]:
    if text is None:
        return None
    try:
        return [parse_scalar(v.strip()) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"bad value list {text!r}") from None


def named_game(name: str, values=None, n: Optional[int] = None) -> ExplicitGame:
    if name == "footnote2":
        if values and len(values) != 1:
            raise ValidationError("footnote2 takes a single value v")
        return NAMED_GAMES[name](values[0] if values else 1)
    if name == "fig1":
        return NAMED_GAMES[name](tuple(values) if values else (1, 1, 1, 1), n or 2)
    raise ValidationError(f"unknown named game {name!r}; choose from {sorted(NAMED_GAMES)}")


def load_game(spec: str, values=None, n: Optional[int] = None) -> ExplicitGame:
    """A game file path, or the name of a built-in instance."""
    if spec in NAMED_GAMES and not Path(spec).exists():
        return named_game(spec, values, n)
    return parse_game(_read(spec))


def load_types(path) -> TypeSet:
    try:
        return TypeSet.from_json(_load_json(_read(path), "types"))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"types file: malformed ({exc})") from None


def resolve_types(basis: Optional[str], types_file, n: Optional[int], cfg: RunConfig) -> TypeSet:
    if (basis is None) == (types_file is None):
        raise ValidationError("give exactly one of --basis or --types")
    if basis is not None:
        if n is None:
            raise ValidationError("--basis needs --n")
        return basis_types(basis, n, cfg.digits)
    types = load_types(types_file)
    if n is not None and n != types.n:
        raise ValidationError(f"--n {n} disagrees with the types file (n={types.n})")
    return types


def load_costs(path, n: Optional[int]) -> tuple[int, list[tuple[str, list]]]:
    """Cost curves from JSON: ``{"n": 3, "costs": {"name": [c(1), ...]}}``, a list of
    curves, or a type set (its cost curves are used)."""
    data = _load_json(_read(path), "costs")
    curves = None
    if isinstance(data, dict) and "costs" in data:
        costs = data["costs"]
        if isinstance(costs, dict):
            curves = [(str(k), list(v)) for k, v in costs.items()]
        elif isinstance(costs, list):
            curves = [(f"c{k + 1}", list(v)) for k, v in enumerate(costs)]
        n = n or data.get("n")
    elif isinstance(data, list) and data and all(isinstance(v, list) for v in data):
        curves = [(f"c{k + 1}", list(v)) for k, v in enumerate(data)]
    else:
        types = TypeSet.from_json(data)
        curves = [(t.name, list(t.c[1:])) for t in types]
        n = n or types.n
    if not curves:
        raise ValidationError("costs: no cost curves given")
    n = n or len(curves[0][1])
    for name, c in curves:
        if len(c) != n:
            raise ValidationError(f"costs.{name}: {len(c)} entries, expected {n}")
    return n, curves


# --------------------------------------------------------------------------
# commands


def cmd_compute(types: TypeSet, cfg: RunConfig, label: str = "") -> Report:
    result = poa_lp(types, restricted=cfg.restricted, arithmetic=cfg.arithmetic)
    data = result.to_json()
    data["arithmetic"] = cfg.arithmetic
    data["index_set"] = "restricted" if cfg.restricted else "full"
    row = {"types": label or ",".join(types.names), "n": types.n, "poa": result.poa,
           "lambda": result.lam, "mu": result.mu, "rho": result.rho, "attained": result.attained}
    return Report(data, [row], exit_code=0 if result.bounded else NoFiniteBound.exit_code)


def _fixed_poa(name, n, c, f, cfg):
    try:
        res = poa_lp(type_set(make_type(name, n, c, f)), arithmetic=cfg.arithmetic)
    except ValidationError:
        return None
    return res.poa


def cmd_design(n: int, curves: Sequence[tuple[str, list]], cfg: RunConfig) -> Report:
    names = [name for name, _ in curves]
    rules = optimal_rules([c for _, c in curves], n, cfg.nonneg, arithmetic=cfg.arithmetic, names=names)
    data = rules.to_json()
    rows = []
    fixed = {}
    for rule in rules.rules:
        panel = fixed_rule_panel(rule.c)
        fixed[rule.name] = {k: _fixed_poa(rule.name, n, rule.c, f, cfg) for k, f in panel.items()}
        rows.append({"cost": rule.name, "n": n, "poa": rule.poa, "rho": rule.rho,
                     "average_rule_poa": fixed[rule.name]["average"],
                     "marginal_rule_poa": fixed[rule.name]["marginal"],
                     "f": None if rule.f_star is None else " ".join(format_scalar(v) for v in rule.f_star)})
    data["fixed_rules"] = {name: {k: None if v is None else format_scalar(v) for k, v in d.items()}
                           for name, d in fixed.items()}
    if rules.poa is not None:
        check = poa_lp(rules.type_set(), arithmetic=cfg.arithmetic)
        data["roundtrip_poa"] = None if check.poa is None else format_scalar(check.poa)
        if cfg.arithmetic == RATIONAL and check.poa != rules.poa:
            log.warning("designed rules re-evaluate to %s, expected %s", check.poa, rules.poa)
    return Report(data, rows, exit_code=0 if rules.poa is not None else NoFiniteBound.exit_code)


def cmd_worst_case(types: TypeSet, cfg: RunConfig, verify: bool = True) -> Report:
    inst = build_worst_case(types)
    data = {"game": inst.game.to_json(), "sidecar": inst.sidecar(),
            "lp_poa": format_scalar(inst.lp_value)}
    row = {"types": ",".join(types.names), "n": types.n, "construction": inst.construction,
           "declared_poa": inst.declared_poa, "resources": len(inst.game.resources),
           "players": inst.game.n}
    if verify:
        report = verify_worst_case(inst, cap=cfg.nash_cap)
        data["verification"] = report.to_json()
        row["brute_force_poa"] = report.brute_force_poa
        row["passed"] = report.passed
    files = {}
    if cfg.out is not None:
        # the instance itself goes to --out in game format; the report stays on stdout
        files[cfg.out] = inst.game.to_json()
        files[cfg.out.with_suffix(".sidecar.json")] = inst.sidecar()
    return Report(data, [row], files)


def cmd_analyze(game: ExplicitGame, cfg: RunConfig) -> Report:
    nash = enumerate_nash(game, cfg.nash_cap)
    opt = optimal_cost(game, cfg.nash_cap)
    data = {"players": game.n, "resources": len(game.resources), "profiles": game.n_profiles,
            "nash": [list(a) for a in nash], "optimal_cost": format_scalar(opt)}
    poa = None
    if nash and opt > 0:
        poa = brute_force_poa(game, cfg.nash_cap)
    data["poa"] = None if poa is None else format_scalar(poa)
    metrics = {"poa": poa, "optimal_cost": opt}
    notes = []
    if game.n_profiles <= cfg.cce_cap and opt > 0:
        value, _ = worst_cce_value(game, cfg.cce_cap, cfg.arithmetic)
        metrics["worst_cce_ratio"] = value / opt
        data["worst_cce_cost"] = format_scalar(value)
        data["worst_cce_ratio"] = format_scalar(value / opt)
    else:
        notes.append("worst CCE skipped (cap or zero optimum)")
    for key, fn in (("rpoa", robust_poa), ("gpoa", generalized_poa)):
        try:
            cert = fn([game], cap=cfg.pair_cap, arithmetic=cfg.arithmetic)
            data[key] = cert.to_json()
            metrics[key] = cert.bound
        except (HypothesisViolated, NoFiniteBound) as exc:
            data[key] = None
            metrics[key] = None
            notes.append(f"{key}: {exc}")
    data["notes"] = notes
    rows = [{"metric": k, "value": v} for k, v in metrics.items()]
    return Report(data, rows)


def cmd_table1(n: int, cfg: RunConfig, families: Sequence[str] = BASIS_FAMILIES) -> Report:
    rows, entries = [], []
    for family in families:
        rep = cmd_compute(basis_types(family, n, cfg.digits), cfg, family)
        entries.append({"basis": family, **{k: rep.data[k] for k in ("poa", "lambda", "mu", "attained")}})
        r = rep.rows[0]
        rows.append({"basis": family, "lambda": r["lambda"], "mu": r["mu"], "poa": r["poa"]})
    return Report({"n": n, "arithmetic": cfg.arithmetic, "rows": entries}, rows)


# --------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (Fraction, float)):
        return to_decimal_string(v, CSV_DIGITS)
    return str(v)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.data, indent=2) + "\n"
    columns = list(dict.fromkeys(k for row in report.rows for k in row))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in report.rows:
            w.writerow([_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
        lines += ["| " + " | ".join(_cell(row.get(c)) for c in columns) + " |" for row in report.rows]
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown format {fmt!r}")


def emit(report: Report, cfg: RunConfig, default_fmt: str = "json", stream=None):
    text = render(report, cfg.fmt or default_fmt)
    if cfg.out is None or cfg.out in report.files:
        (stream or sys.stdout).write(text)
    else:
        cfg.out.write_text(text)
    for path, obj in report.files.items():
        Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="arithmetic", action="store_const", const=RATIONAL,
                      help="exact rational arithmetic (default)")
    mode.add_argument("--float", dest="arithmetic", action="store_const", const=FLOAT,
                      help="binary64 arithmetic with a 1e-9 tolerance")
    idx = common.add_mutually_exclusive_group()
    idx.add_argument("--restricted-only", dest="restricted", action="store_const", const=True,
                     help="use the boundary index set (default)")
    idx.add_argument("--full-index-set", dest="restricted", action="store_const", const=False)
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", dest="fmt", choices=FORMATS)
    common.add_argument("--nash-cap", type=int, default=NASH_CAP)
    common.add_argument("--cce-cap", type=int, default=CCE_CAP)
    common.add_argument("--pair-cap", type=int, default=PAIR_CAP)
    common.add_argument("--max-bits", type=int, default=lp.DEFAULT_MAX_BITS,
                        help="rational denominator limit in the simplex")
    common.add_argument("--digits", type=int, default=DEFAULT_BASIS_DIGITS,
                        help="precision of irrational basis latencies")

    p = argparse.ArgumentParser(prog="poakit", description="Price-of-anarchy computation for resource allocation games.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="exact PoA of a type set")
    c.add_argument("--basis", metavar="FAMILY", help="affine, quadratic, cubic, sqrt, log or polynomial(d)")
    c.add_argument("--types", type=Path)
    c.add_argument("--n", type=int)

    d = sub.add_parser("design", parents=[common], help="optimal distribution rules for cost curves")
    d.add_argument("--costs", type=Path, help="JSON cost curves")
    d.add_argument("--basis", metavar="FAMILY", help="use the cost curves of a basis family")
    d.add_argument("--n", type=int)
    d.add_argument("--nonneg-rules", dest="nonneg", action="store_true")

    w = sub.add_parser("worst-case", parents=[common], help="game attaining the LP value")
    w.add_argument("--basis", metavar="FAMILY")
    w.add_argument("--types", type=Path)
    w.add_argument("--n", type=int)
    w.add_argument("--no-verify", dest="verify", action="store_false")

    a = sub.add_parser("analyze", parents=[common], help="brute-force analysis of an explicit game")
    a.add_argument("--game", required=True, help="game JSON file, or footnote2 / fig1")
    a.add_argument("--values", help="comma-separated resource values for a named game")
    a.add_argument("--n", type=int, help="player count for fig1")

    t = sub.add_parser("table1", parents=[common], help="PoA of the five basis families")
    t.add_argument("--n", type=int, default=25)
    return p


def _config(args) -> RunConfig:
    return RunConfig(
        arithmetic=args.arithmetic or RATIONAL,
        nash_cap=args.nash_cap,
        cce_cap=args.cce_cap,
        pair_cap=args.pair_cap,
        max_bits=args.max_bits,
        restricted=True if args.restricted is None else args.restricted,
        nonneg=getattr(args, "nonneg", False),
        digits=args.digits,
        out=args.out,
        fmt=args.fmt,
    )


def _basis_ok(basis):
    if basis is not None and basis not in BASIS_FAMILIES and not basis.startswith("polynomial("):
        raise ValidationError(f"unknown basis family {basis!r}")


def run(args, cfg: RunConfig) -> Report:
    if args.command == "compute":
        _basis_ok(args.basis)
        return cmd_compute(resolve_types(args.basis, args.types, args.n, cfg), cfg, args.basis or "")
    if args.command == "design":
        if (args.costs is None) == (args.basis is None):
            raise ValidationError("give exactly one of --costs or --basis")
        if args.costs is not None:
            n, curves = load_costs(args.costs, args.n)
        else:
            _basis_ok(args.basis)
            if args.n is None:
                raise ValidationError("--basis needs --n")
            n = args.n
            curves = [(t.name, list(t.c[1:])) for t in basis_types(args.basis, n, cfg.digits)]
        return cmd_design(n, curves, cfg)
    if args.command == "worst-case":
        _basis_ok(args.basis)
        return cmd_worst_case(resolve_types(args.basis, args.types, args.n, cfg), cfg, args.verify)
    if args.command == "analyze":
        return cmd_analyze(load_game(args.game, parse_values(args.values), args.n), cfg)
    if args.command == "table1":
        if args.n < 1:
            raise ValidationError("--n must be >= 1")
        return cmd_table1(args.n, cfg)
    raise ValidationError(f"unknown command {args.command!r}")


def _setup_logging():
    level = os.environ.get("POA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING) if not level.isdigit() else int(level),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        with lp.bit_limit(cfg.max_bits):
            report = run(args, cfg)
        emit(report, cfg, "md" if args.command == "table1" else "json")
    except PoAError as exc:
        print(f"poakit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if report.exit_code:
        print("poakit: no finite price-of-anarchy bound", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
