"""Report documents and their JSON, CSV and Markdown renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Optional, Sequence

from chaincore.allocation import Allocation, AxiomResult, CoreReport
from chaincore.errors import DomainError
from chaincore.game import CharacteristicFunction, StructureReport
from chaincore.model import CoalitionPair

FORMATS = ("json", "csv", "markdown")
SIGNIFICANT = 12


def _round(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError(f"cannot emit non-finite number {x!r}")
    r = float(f"{x:.{SIGNIFICANT}g}")
    return 0.0 if r == 0 else r


def canonicalize(obj: Any) -> Any:
    """Round floats to 12 significant digits, recursively."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _round(obj)
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    if hasattr(obj, "tolist"):
        return canonicalize(obj.tolist())
    raise DomainError(f"cannot emit object of type {type(obj).__name__}")


def canonical_json(doc: dict) -> str:
    return json.dumps(canonicalize(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# --- document assembly ------------------------------------------------------


def _ids(cf: CharacteristicFunction, pair: CoalitionPair) -> tuple[list, list]:
    sit = cf.situation
    return (
        [sit.retailers[i].id for i in pair.retailer_indices],
        [sit.suppliers[j].id for j in pair.supplier_indices],
    )


def pair_doc(cf: CharacteristicFunction, pair: CoalitionPair) -> dict:
    r, s = _ids(cf, pair)
    return {"R": r, "S": s}


def value_rows(cf: CharacteristicFunction, pairs: Optional[Sequence[CoalitionPair]] = None) -> list:
    """v-table rows for nonempty retailer sets, in (R, S) bitmask order."""
    if pairs is None:
        pairs = [p for p in cf.pairs() if p.retailers]
    rows = []
    for pair in pairs:
        val, orders = cf.table[pair]
        row = pair_doc(cf, pair)
        row["value"] = val
        row["orders"] = None if orders is None else orders.tolist()
        rows.append(row)
    return rows


def base_document(cf: CharacteristicFunction, pairs=None) -> dict:
    sit = cf.situation
    return {
        "fingerprint": cf.fingerprint,
        "solver": cf.config.to_dict(),
        "retailers": [r.id for r in sit.retailers],
        "suppliers": [s.id for s in sit.suppliers],
        "capacity": "unbounded" if sit.unbounded else "bounded",
        "values": value_rows(cf, pairs),
    }


def allocation_doc(cf: CharacteristicFunction, alloc: Allocation) -> dict:
    sit = cf.situation
    doc = {
        "rule": alloc.rule,
        "payoffs": {
            "retailers": {str(r.id): alloc.payoffs[i] for i, r in enumerate(sit.retailers)},
            "suppliers": {str(s.id): alloc.payoffs[cf.n + j] for j, s in enumerate(sit.suppliers)},
        },
        "vector": list(alloc.payoffs),
        "beta": alloc.beta,
    }
    if alloc.label is not None:
        doc["label"] = alloc.label
    if alloc.argmin_witness is not None:
        r, j = alloc.argmin_witness
        doc["witness"] = {
            "R": [sit.retailers[i].id for i in CoalitionPair(r, 0).retailer_indices],
            "j": sit.suppliers[j].id,
        }
    return doc


def core_doc(cf: CharacteristicFunction, report: CoreReport) -> dict:
    doc = {
        "member": report.member,
        "checked": report.checked,
        "efficiency_gap": report.efficiency_gap,
        "worst_violation": None,
        "violations": [dict(pair_doc(cf, p), deficit=d) for p, d in report.violations],
    }
    if report.worst_violation is not None:
        p, d = report.worst_violation
        doc["worst_violation"] = dict(pair_doc(cf, p), deficit=d)
    return doc


def axiom_doc(result: AxiomResult) -> dict:
    return {"passed": result.passed, "margin": result.margin, "witness": result.witness}


def structure_doc(report: StructureReport) -> dict:
    return {"passed": report.passed, "checked": report.checked, "worst_margin": report.worst_margin}


# --- rendering ---------------------------------------------------------------


def set_label(ids: Sequence) -> str:
    return "{" + ",".join(str(i) for i in ids) + "}" if ids else "∅"


def pretty(x: Optional[float]) -> str:
    """Mixed fraction when a small denominator fits, else four decimals."""
    if x is None:
        return "-"
    frac = Fraction(x).limit_denominator(12)
    if abs(float(frac) - x) <= 1e-6 * (1 + abs(x)):
        whole = math.floor(abs(frac)) * (1 if frac >= 0 else -1)
        rest = abs(frac - whole)
        if rest == 0:
            return str(whole)
        if whole == 0:
            return f"{'-' if frac < 0 else ''}{rest.numerator}/{rest.denominator}"
        return f"{whole} {rest.numerator}/{rest.denominator}"
    return f"{x:.4f}"


def _require_values(doc: dict) -> None:
    if not doc.get("values"):
        raise DomainError("build required: the report has no characteristic-function values")


def to_csv(doc: dict) -> str:
    _require_values(doc)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["R", "S", "value", "orders"])
    for row in canonicalize(doc["values"]):
        orders = "" if row["orders"] is None else json.dumps(row["orders"])
        writer.writerow([" ".join(map(str, row["R"])), " ".join(map(str, row["S"])), row["value"], orders])
    return buf.getvalue()


def to_markdown(doc: dict) -> str:
    _require_values(doc)
    doc = canonicalize(doc)
    retailers = doc["retailers"]
    lines = [f"# Characteristic function ({doc['fingerprint'][:12]})", ""]
    head = ["R", "S"] + [f"q_{r}" for r in retailers] + ["v(R,S)"]
    lines.append("| " + " | ".join(head) + " |")
    lines.append("|" + "---|" * len(head))
    for row in doc["values"]:
        cells = [set_label(row["R"]), set_label(row["S"])]
        members = [str(r) for r in row["R"]]
        orders = row["orders"] or []
        for rid in retailers:
            if str(rid) in members:
                q = orders[members.index(str(rid))]
                cells.append("(" + ", ".join(pretty(v) for v in q) + ")")
            else:
                cells.append("-")
        cells.append(pretty(row["value"]))
        lines.append("| " + " | ".join(cells) + " |")

    if "optimal_suppliers" in doc:
        lines += ["", "M^o = " + set_label(doc["optimal_suppliers"])]
    for name, alloc in sorted(doc.get("allocations", {}).items()):
        lines += ["", f"## Allocation: {name}", ""]
        lines.append("| player | payoff |")
        lines.append("|---|---|")
        for rid, val in alloc["payoffs"]["retailers"].items():
            lines.append(f"| retailer {rid} | {pretty(val)} |")
        for sid, val in alloc["payoffs"]["suppliers"].items():
            lines.append(f"| supplier {sid} | {pretty(val)} |")
        if alloc.get("beta") is not None:
            lines += ["", f"beta = {pretty(alloc['beta'])}"]
        core = doc.get("core", {}).get(name)
        if core is not None:
            verdict = "in the core" if core["member"] else "NOT in the core"
            lines.append(f"core: {verdict} ({core['checked']} coalitions checked)")
        axioms = doc.get("axioms", {}).get(name)
        if axioms:
            lines.append(
                "axioms: " + ", ".join(f"{a} {'pass' if r['passed'] else 'fail'}" for a, r in sorted(axioms.items()))
            )
    if "structure" in doc:
        lines += ["", "## Structure", ""]
        for name, rep in sorted(doc["structure"].items()):
            lines.append(f"- {name}: {'pass' if rep['passed'] else 'fail'} ({rep['checked']} checked)")
    if "supplier_max" in doc:
        lines += ["", "## Largest core payoff per supplier", ""]
        for sid, val in sorted(doc["supplier_max"].items()):
            lines.append(f"- supplier {sid}: {pretty(val)}")
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        _require_values(doc)
        return canonical_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    if fmt == "markdown":
        return to_markdown(doc)
    raise DomainError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_report(doc: dict, fmt: str = "json", out=None) -> str:
    """Render ``doc`` and write it to ``out`` (a path) when given."""
    text = render(doc, fmt)
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
