"""The cooperative game induced by a chain: characteristic function and structure checks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from chaincore.errors import CapacityError, DomainError
from chaincore.model import CoalitionPair, MRSSituation, validated
from chaincore.optimizer import SolverConfig, coalition_objective, solve_coalition

#: Relative tolerance for comparisons between coalition values.
VALUE_RTOL = 1e-6


def value_tol(reference: float) -> float:
    return VALUE_RTOL * (1.0 + abs(reference))


def situation_payload(situation: MRSSituation) -> dict:
    """Plain-data form of a situation (ids, knots, capacity)."""
    return {
        "retailers": [
            {"id": r.id, "price": {"knots": [list(k) for k in r.price.knots]}}
            for r in situation.retailers
        ],
        "suppliers": [
            {
                "id": s.id,
                "wholesale": {"knots": [list(k) for k in s.wholesale.knots]},
                "cost": {"knots": [list(k) for k in s.cost.knots]},
            }
            for s in situation.suppliers
        ],
        "capacity": "unbounded"
        if situation.capacity is None
        else [list(row) for row in situation.capacity],
    }


def fingerprint(situation: MRSSituation, config: SolverConfig) -> str:
    blob = json.dumps(
        {"situation": situation_payload(situation), "solver": config.to_dict()},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class CharacteristicFunction:
    situation: MRSSituation
    config: SolverConfig
    fingerprint: str
    table: Mapping[CoalitionPair, tuple[float, Optional[np.ndarray]]] = field(repr=False)

    @property
    def n(self) -> int:
        return self.situation.n

    @property
    def m(self) -> int:
        return self.situation.m

    @property
    def grand(self) -> CoalitionPair:
        return CoalitionPair((1 << self.n) - 1, (1 << self.m) - 1)

    def v(self, retailers: int, suppliers: int) -> float:
        """Value of the pair given as bitmasks."""
        return self.table[CoalitionPair(retailers, suppliers)][0]

    def orders(self, pair: CoalitionPair) -> Optional[np.ndarray]:
        return self.table[pair][1]

    def pairs(self):
        """All pairs in (retailer mask, supplier mask) order."""
        return [CoalitionPair(r, s) for r in range(1 << self.n) for s in range(1 << self.m)]

    def with_value(self, pair: CoalitionPair, value: float) -> "CharacteristicFunction":
        """Copy with one value overwritten (used for fault injection)."""
        table = dict(self.table)
        table[pair] = (value, table[pair][1])
        return CharacteristicFunction(self.situation, self.config, self.fingerprint, table)


def build(
    situation: MRSSituation,
    config: SolverConfig = SolverConfig(),
    progress: Optional[Callable[[CoalitionPair, float], None]] = None,
) -> CharacteristicFunction:
    """Solve every coalition pair with a nonempty retailer set."""
    if not situation.is_validated:
        situation = validated(situation)
    if situation.n + situation.m > config.max_players:
        raise CapacityError(
            f"n + m = {situation.n + situation.m} exceeds max_players={config.max_players}"
        )
    table: dict[CoalitionPair, tuple[float, Optional[np.ndarray]]] = {}
    for s in range(1 << situation.m):
        table[CoalitionPair(0, s)] = (0.0, None)
    for r in range(1, 1 << situation.n):
        for s in range(1 << situation.m):
            pair = CoalitionPair(r, s)
            res = solve_coalition(situation, pair, config)
            table[pair] = (res.value, res.orders)
            if progress is not None:
                progress(pair, res.value)
    return CharacteristicFunction(situation, config, fingerprint(situation, config), table)


def value(cf: CharacteristicFunction, pair: CoalitionPair, expected_fingerprint: Optional[str] = None) -> float:
    """Cached value of ``pair``; never re-solves."""
    if expected_fingerprint is not None and expected_fingerprint != cf.fingerprint:
        raise DomainError("characteristic function was built for a different situation")
    try:
        return cf.table[pair][0]
    except KeyError:
        raise DomainError(f"unknown coalition pair {pair}") from None


def restored(situation, config, table) -> CharacteristicFunction:
    """Reassemble a characteristic function from cached data."""
    return CharacteristicFunction(situation, config, fingerprint(situation, config), table)


@dataclass(frozen=True)
class StructureReport:
    check: str
    passed: bool
    checked: int
    worst_margin: float
    violations: tuple = ()

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "checked": self.checked,
            "worst_margin": self.worst_margin,
            "violations": list(self.violations),
        }


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def check_positivity(cf: CharacteristicFunction) -> StructureReport:
    bad = []
    worst = np.inf
    checked = 0
    for pair in cf.pairs():
        if pair.retailers == 0:
            continue
        v = cf.table[pair][0]
        checked += 1
        worst = min(worst, v)
        if not v > 0:
            bad.append({"R": pair.retailers, "S": pair.suppliers, "value": v})
    return StructureReport("positivity", not bad, checked, float(worst), tuple(bad))


def check_superadditivity(cf: CharacteristicFunction) -> StructureReport:
    """v(R,S) + v(F,T) <= v(R|F, S|T) for disjoint retailer and supplier sets."""
    full_r, full_s = (1 << cf.n) - 1, (1 << cf.m) - 1
    v = {(p.retailers, p.suppliers): val for p, (val, _) in cf.table.items()}
    bad = []
    worst = np.inf
    checked = 0
    for r in range(full_r + 1):
        for f in _submasks(full_r & ~r):
            for s in range(full_s + 1):
                for t in _submasks(full_s & ~s):
                    joint = v[(r | f, s | t)]
                    margin = joint - v[(r, s)] - v[(f, t)]
                    checked += 1
                    worst = min(worst, margin)
                    if margin < -value_tol(joint):
                        bad.append({"R": r, "S": s, "F": f, "T": t, "margin": margin})
    return StructureReport("superadditivity", not bad, checked, float(worst), tuple(bad))


def check_monotonicity(cf: CharacteristicFunction) -> StructureReport:
    """v(R,S) <= v(F,T) whenever R is in F and S is in T."""
    full_r, full_s = (1 << cf.n) - 1, (1 << cf.m) - 1
    v = {(p.retailers, p.suppliers): val for p, (val, _) in cf.table.items()}
    bad = []
    worst = np.inf
    checked = 0
    for f in range(full_r + 1):
        for t in range(full_s + 1):
            big = v[(f, t)]
            for r in _submasks(f):
                for s in _submasks(t):
                    margin = big - v[(r, s)]
                    checked += 1
                    worst = min(worst, margin)
                    if margin < -value_tol(big):
                        bad.append({"R": r, "S": s, "F": f, "T": t, "margin": margin})
    return StructureReport("monotonicity", not bad, checked, float(worst), tuple(bad))


def check_stored_values(cf: CharacteristicFunction, rtol: float = 1e-9) -> list[CoalitionPair]:
    """Pairs whose stored value disagrees with the objective at the stored orders."""
    off = []
    for pair, (val, orders) in cf.table.items():
        if pair.retailers == 0:
            if val != 0.0:
                off.append(pair)
            continue
        again = coalition_objective(cf.situation, pair, orders)
        if abs(again - val) > rtol * max(1.0, abs(val)):
            off.append(pair)
    return off
