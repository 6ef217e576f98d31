"""Command-line entry point: ``chaincore {value,allocate,core-check,report}``.

Exit codes: 0 ok, 1 input error, 2 core violation, 3 size guard exceeded,
4 rule not applicable to the situation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from chaincore import allocation as alloc_mod
from chaincore.errors import CapacityError, ChainCoreError, DomainError, InputError, ValidationError
from chaincore.game import (
    CharacteristicFunction,
    build,
    check_monotonicity,
    check_positivity,
    check_superadditivity,
)
from chaincore.io import load_cache, parse_document, parse_number, save_cache, solver_config
from chaincore.model import CoalitionPair
from chaincore.report import (
    FORMATS,
    allocation_doc,
    axiom_doc,
    base_document,
    core_doc,
    emit_report,
    set_label,
    pretty,
    structure_doc,
)

EXIT_OK, EXIT_INPUT, EXIT_CORE, EXIT_GUARD, EXIT_MISMATCH = 0, 1, 2, 3, 4
RULES = {"altruistic": "altruistic", "sc": "sc", "sc-star": "sc_star"}


class RuleMismatch(ChainCoreError):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--cache-dir", default=".chaincore-cache", help="cache directory (default: %(default)s)")
    p.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    p.add_argument("--resolution", type=int, help="initial grid points per axis")
    p.add_argument("--rounds", type=int, help="grid refinement rounds")
    p.add_argument("--max-dims", type=int, help="largest number of decision variables per coalition")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("-o", "--out", help="write the report here instead of standard output")
    p.add_argument("-v", "--verbose", action="store_true", help="progress on the error stream")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="chaincore",
        description="Profit allocation in retailer/supplier distribution chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", parents=[common], help="characteristic-function table")
    p.add_argument("situation")
    p.add_argument("--coalition", help='one pair only, e.g. "R=2;S=1,2" (ids; empty side allowed)')

    p = sub.add_parser("allocate", parents=[common], help="compute an allocation rule")
    p.add_argument("situation")
    p.add_argument("rule", choices=sorted(RULES))
    p.add_argument("--axioms", action="store_true", help="append the five axiom checks")

    p = sub.add_parser("core-check", parents=[common], help="test core membership")
    p.add_argument("situation")
    p.add_argument("source", help="rule name (altruistic, sc, sc-star) or a JSON file with n+m payoffs")
    p.add_argument("--supplier-max", metavar="J", help="also maximise supplier J's payoff over the core")

    p = sub.add_parser("report", parents=[common], help="full analysis of a situation")
    p.add_argument("situation")
    return parser


def _log(args, msg: str) -> None:
    if args.verbose:
        print(msg, file=sys.stderr)


def _game(args) -> CharacteristicFunction:
    doc = parse_document(args.situation)
    for w in doc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    overrides = dict(doc.solver)
    for key, flag in (("initial_resolution", args.resolution), ("rounds", args.rounds), ("max_dims", args.max_dims)):
        if flag is not None:
            overrides[key] = flag
    config = solver_config(overrides)
    sit = doc.situation
    if not args.no_cache:
        cf = load_cache(sit, config, args.cache_dir)
        if cf is not None:
            _log(args, f"cache hit {cf.fingerprint[:12]}")
            return cf
    _log(args, f"building {(2**sit.n - 1) * 2**sit.m} coalition pairs")
    cf = build(sit, config, progress=(lambda p, v: _log(args, f"  R={p.retailers} S={p.suppliers} v={v:.6g}")))
    if not args.no_cache:
        try:
            save_cache(cf, args.cache_dir)
        except OSError as exc:
            print(f"warning: cache not written ({exc})", file=sys.stderr)
    return cf


def _lookup(ids: Sequence, token: str, kind: str) -> int:
    for k, ident in enumerate(ids):
        if str(ident) == token:
            return k
    raise InputError(f"unknown {kind} id {token!r}")


def parse_coalition(cf: CharacteristicFunction, spec: str) -> CoalitionPair:
    """Parse ``"R=1,2;S=1"`` with player ids into a pair."""
    sides = {"R": [], "S": []}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, rest = part.partition("=")
        key = key.strip().upper()
        if not sep or key not in sides:
            raise InputError(f"bad coalition spec {spec!r}; expected e.g. R=1,2;S=1")
        sides[key] = [t.strip() for t in rest.split(",") if t.strip()]
    sit = cf.situation
    r = [_lookup([x.id for x in sit.retailers], t, "retailer") for t in sides["R"]]
    s = [_lookup([x.id for x in sit.suppliers], t, "supplier") for t in sides["S"]]
    return CoalitionPair.of(r, s)


def _rule(cf: CharacteristicFunction, name: str) -> alloc_mod.Allocation:
    if name == "sc-star" and not cf.situation.unbounded:
        raise RuleMismatch("sc-star requires unbounded capacity")
    return {
        "altruistic": alloc_mod.altruistic,
        "sc": alloc_mod.sc_allocation,
        "sc-star": alloc_mod.sc_star_allocation,
    }[name](cf)


def _payoff_file(cf: CharacteristicFunction, path: str) -> alloc_mod.Allocation:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, list):
        raise InputError(f"{path}: expected a flat list of numbers")
    if len(raw) != cf.n + cf.m:
        raise InputError(f"{path}: {len(raw)} payoffs given, expected n + m = {cf.n + cf.m}")
    return alloc_mod.Allocation.external(
        [parse_number(x, f"{path}[{k}]") for k, x in enumerate(raw)], label=Path(path).name
    )


def _emit(args, doc: dict) -> None:
    text = emit_report(doc, args.format)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{args.out}: cannot write report ({exc.strerror or exc})") from None
    else:
        sys.stdout.write(text)


def cmd_value(args) -> int:
    cf = _game(args)
    pairs = None
    if args.coalition:
        pair = parse_coalition(cf, args.coalition)
        if pair.retailers == 0:
            raise InputError("retailer coalition must be nonempty")
        pairs = [pair]
    _emit(args, base_document(cf, pairs))
    return EXIT_OK


def _allocation_section(cf, doc, name, alloc, axioms: bool) -> None:
    doc.setdefault("allocations", {})[name] = allocation_doc(cf, alloc)
    doc.setdefault("core", {})[name] = core_doc(cf, alloc_mod.core_check(cf, alloc))
    if axioms:
        doc.setdefault("axioms", {})[name] = {
            a: axiom_doc(alloc_mod.axiom_check(cf, alloc, a)) for a in alloc_mod.AXIOMS
        }


def cmd_allocate(args) -> int:
    cf = _game(args)
    alloc = _rule(cf, args.rule)
    doc = base_document(cf)
    if cf.situation.unbounded:
        doc["optimal_suppliers"] = [cf.situation.suppliers[j].id for j in alloc_mod.optimal_suppliers(cf)]
    _allocation_section(cf, doc, args.rule, alloc, args.axioms)
    _emit(args, doc)
    return EXIT_OK


def cmd_core_check(args) -> int:
    cf = _game(args)
    if args.source in RULES:
        alloc, name = _rule(cf, args.source), args.source
    else:
        alloc, name = _payoff_file(cf, args.source), "external"
    report = alloc_mod.core_check(cf, alloc)
    doc = base_document(cf)
    doc["allocations"] = {name: allocation_doc(cf, alloc)}
    doc["core"] = {name: core_doc(cf, report)}
    if args.supplier_max is not None:
        j = _lookup([s.id for s in cf.situation.suppliers], args.supplier_max.strip(), "supplier")
        doc["supplier_max"] = {str(cf.situation.suppliers[j].id): alloc_mod.core_supplier_max(cf, j)}
    _emit(args, doc)
    if not report.member:
        sit = cf.situation

        def label(pair):
            r = set_label([sit.retailers[i].id for i in pair.retailer_indices])
            s = set_label([sit.suppliers[j].id for j in pair.supplier_indices])
            return f"R={r} S={s}"

        if report.worst_violation is not None:
            pair, deficit = report.worst_violation
            print(f"core violation: worst {label(pair)} short by {pretty(deficit)}", file=sys.stderr)
            for pair, deficit in report.violations:
                print(f"  {label(pair)} short by {pretty(deficit)}", file=sys.stderr)
        else:
            print(f"core violation: efficiency gap {report.efficiency_gap:.6g}", file=sys.stderr)
        return EXIT_CORE
    return EXIT_OK


def cmd_report(args) -> int:
    cf = _game(args)
    doc = base_document(cf)
    doc["structure"] = {
        r.check: structure_doc(r)
        for r in (check_positivity(cf), check_superadditivity(cf), check_monotonicity(cf))
    }
    rules = ["altruistic", "sc"]
    if cf.situation.unbounded:
        doc["optimal_suppliers"] = [cf.situation.suppliers[j].id for j in alloc_mod.optimal_suppliers(cf)]
        rules.append("sc-star")
    for name in rules:
        _allocation_section(cf, doc, name, _rule(cf, name), axioms=True)
    doc["supplier_max"] = {
        str(s.id): alloc_mod.core_supplier_max(cf, j) for j, s in enumerate(cf.situation.suppliers)
    }
    _emit(args, doc)
    return EXIT_OK


COMMANDS = {"value": cmd_value, "allocate": cmd_allocate, "core-check": cmd_core_check, "report": cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: invalid situation {args.situation}:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_INPUT
    except RuleMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except CapacityError as exc:
        print(f"error: size guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ChainCoreError as exc:
        print(f"error: internal fault: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
