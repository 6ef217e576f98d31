"""Situation files and the on-disk characteristic-function cache."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from chaincore.errors import InputError, ValidationError
from chaincore.game import CharacteristicFunction, fingerprint, restored, situation_payload
from chaincore.model import (
    CoalitionPair,
    MRSSituation,
    PiecewiseLinearFn,
    RetailerSpec,
    SupplierSpec,
    validate,
)
from chaincore.optimizer import SolverConfig

_TOP_KEYS = {"retailers", "suppliers", "capacity", "solver"}
_RETAILER_KEYS = {"id", "price"}
_SUPPLIER_KEYS = {"id", "wholesale", "cost"}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
CACHE_FORMAT = 1


@dataclass(frozen=True)
class SituationDocument:
    situation: MRSSituation
    solver: dict
    warnings: tuple[str, ...] = ()


def parse_number(raw: Any, where: str) -> float:
    """Number, or a string holding an exact decimal or a fraction like "2/3"."""
    if isinstance(raw, bool):
        raise InputError(f"{where}: expected a number, got a boolean")
    if isinstance(raw, (int, float)):
        value = float(raw)
    elif isinstance(raw, str):
        try:
            value = float(Fraction(raw.strip()))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot read {raw!r} as a number") from None
    else:
        raise InputError(f"{where}: expected a number, got {type(raw).__name__}")
    if not np.isfinite(value):
        raise InputError(f"{where}: number must be finite")
    return value


def _object(raw: Any, where: str, known: set, warnings: list) -> dict:
    if not isinstance(raw, dict):
        raise InputError(f"{where}: expected an object")
    for key in sorted(set(raw) - known):
        warnings.append(f"{where}.{key}: unknown key ignored")
    return raw


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise InputError(f"{where}: missing key {key!r}")
    return obj[key]


def _function(raw: Any, where: str, warnings: list) -> PiecewiseLinearFn:
    obj = _object(raw, where, {"knots"}, warnings)
    knots = _require(obj, "knots", where)
    if not isinstance(knots, list) or not knots:
        raise InputError(f"{where}.knots: expected a nonempty list of [x, y] pairs")
    pts = []
    for k, pair in enumerate(knots):
        at = f"{where}.knots[{k}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise InputError(f"{at}: expected an [x, y] pair")
        pts.append((parse_number(pair[0], f"{at}[0]"), parse_number(pair[1], f"{at}[1]")))
    try:
        return PiecewiseLinearFn.from_knots(pts)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def _ident(raw: Any, where: str):
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise InputError(f"{where}: id must be an integer or a string")
    return raw


def situation_from_data(data: Any) -> SituationDocument:
    """Build and validate a situation from already-decoded JSON data."""
    warnings: list[str] = []
    top = _object(data, "$", _TOP_KEYS, warnings)

    raw_r = _require(top, "retailers", "$")
    if not isinstance(raw_r, list):
        raise InputError("$.retailers: expected a list")
    retailers = []
    for k, item in enumerate(raw_r):
        at = f"$.retailers[{k}]"
        obj = _object(item, at, _RETAILER_KEYS, warnings)
        retailers.append(
            RetailerSpec(
                _ident(_require(obj, "id", at), f"{at}.id"),
                _function(_require(obj, "price", at), f"{at}.price", warnings),
            )
        )

    raw_s = _require(top, "suppliers", "$")
    if not isinstance(raw_s, list):
        raise InputError("$.suppliers: expected a list")
    suppliers = []
    for k, item in enumerate(raw_s):
        at = f"$.suppliers[{k}]"
        obj = _object(item, at, _SUPPLIER_KEYS, warnings)
        suppliers.append(
            SupplierSpec(
                _ident(_require(obj, "id", at), f"{at}.id"),
                _function(_require(obj, "wholesale", at), f"{at}.wholesale", warnings),
                _function(_require(obj, "cost", at), f"{at}.cost", warnings),
            )
        )

    raw_cap = _require(top, "capacity", "$")
    if raw_cap == "unbounded":
        capacity = None
    elif isinstance(raw_cap, list):
        rows = []
        for i, row in enumerate(raw_cap):
            if not isinstance(row, list):
                raise InputError(f"$.capacity[{i}]: expected a list")
            rows.append(tuple(parse_number(c, f"$.capacity[{i}][{j}]") for j, c in enumerate(row)))
        capacity = tuple(rows)
    else:
        raise InputError('$.capacity: expected a matrix or "unbounded"')

    solver = {}
    if "solver" in top:
        obj = _object(top["solver"], "$.solver", _SOLVER_KEYS, warnings)
        solver = {k: v for k, v in obj.items() if k in _SOLVER_KEYS}

    result = validate(MRSSituation(tuple(retailers), tuple(suppliers), capacity))
    if not result.ok:
        raise ValidationError(
            "; ".join(str(v) for v in result.violations), result.violations
        )
    warnings.extend(str(w) for w in result.warnings)
    return SituationDocument(result.situation, solver, tuple(warnings))


def parse_document(path) -> SituationDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror or exc})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return situation_from_data(data)


def parse_situation(path) -> MRSSituation:
    """Read a situation file and return the validated situation."""
    return parse_document(path).situation


def solver_config(overrides: dict) -> SolverConfig:
    """Default configuration updated with ``overrides``."""
    kinds = {f.name: f.type for f in fields(SolverConfig)}
    clean = {}
    for key, raw in overrides.items():
        if raw is None:
            continue
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise InputError(f"$.solver.{key}: expected a number")
        clean[key] = int(raw) if kinds[key] in ("int", int) else float(raw)
    try:
        return SolverConfig(**clean)
    except ValueError as exc:
        raise InputError(f"$.solver: {exc}") from None


# --- cache -----------------------------------------------------------------


def cache_file(cache_dir, fp: str) -> Path:
    return Path(cache_dir) / f"{fp}.json"


def _cache_payload(cf: CharacteristicFunction) -> dict:
    table = []
    for pair in sorted(cf.table, key=lambda p: (p.retailers, p.suppliers)):
        val, orders = cf.table[pair]
        table.append(
            {
                "R": pair.retailers,
                "S": pair.suppliers,
                "value": val,
                "orders": None if orders is None else orders.tolist(),
            }
        )
    return {
        "format": CACHE_FORMAT,
        "fingerprint": cf.fingerprint,
        "solver": cf.config.to_dict(),
        "situation": situation_payload(cf.situation),
        "table": table,
    }


def save_cache(cf: CharacteristicFunction, cache_dir) -> Path:
    """Write ``cf`` atomically; floats keep their full repr."""
    target = cache_file(cache_dir, cf.fingerprint)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_cache_payload(cf), sort_keys=True, separators=(",", ":"))
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return target


def load_cache(
    situation: MRSSituation, config: SolverConfig, cache_dir
) -> Optional[CharacteristicFunction]:
    """Cached characteristic function, or None on a miss or an unusable file."""
    fp = fingerprint(situation, config)
    path = cache_file(cache_dir, fp)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    if not isinstance(data, dict) or data.get("format") != CACHE_FORMAT or data.get("fingerprint") != fp:
        return None
    try:
        table = {}
        for row in data["table"]:
            pair = CoalitionPair(int(row["R"]), int(row["S"]))
            orders = None if row["orders"] is None else np.asarray(row["orders"], dtype=float)
            table[pair] = (float(row["value"]), orders)
    except (KeyError, TypeError, ValueError):
        return None
    if len(table) != (1 << situation.n) * (1 << situation.m):
        return None
    return restored(situation, config, table)
