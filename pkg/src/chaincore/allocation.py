"""Allocation rules, axiom checks and core membership for chain games.

Payoff vectors are indexed retailers first (0 .. n-1), then suppliers
(n .. n+m-1). Coalitions are reported as bitmasks over zero-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from chaincore.errors import CoreEmptyError, DomainError, SolverFault
from chaincore.game import CharacteristicFunction, value_tol
from chaincore.model import CoalitionPair
from chaincore.optimizer import retailer_profits
from chaincore.simplex import OPTIMAL, UNBOUNDED, simplex_bland

RULES = ("altruistic", "sc", "sc_star", "external")
AXIOMS = ("EF", "SR", "RR", "PD", "PP")
FIXTURES = ("EF_fails", "SR_fails", "RR_fails", "PP_fails")

# relaxation of each core constraint in the supplier-max LP, relative to |v|
_LP_SLACK = 1e-10


@dataclass(frozen=True)
class Allocation:
    payoffs: tuple[float, ...]
    rule: str
    beta: Optional[float] = None
    #: (retailer bitmask R, supplier index j) achieving beta
    argmin_witness: Optional[tuple[int, int]] = None
    #: grand-coalition orders the rule was computed from
    orders: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    #: free-form name for external allocations (e.g. an independence fixture)
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise DomainError(f"unknown allocation rule {self.rule!r}")

    @classmethod
    def external(cls, payoffs: Sequence[float], label: Optional[str] = None) -> "Allocation":
        return cls(tuple(float(p) for p in payoffs), "external", label=label)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.payoffs, dtype=float)


def _grand_orders(cf: CharacteristicFunction) -> np.ndarray:
    orders = cf.orders(cf.grand)
    if orders is None:
        raise DomainError("build required: no orders stored for the grand coalition")
    return orders


def _check_efficient(cf: CharacteristicFunction, payoffs: np.ndarray, rule: str) -> None:
    total = cf.v(cf.grand.retailers, cf.grand.suppliers)
    if abs(payoffs.sum() - total) > value_tol(total):
        raise SolverFault(f"{rule} allocation sums to {payoffs.sum()!r}, expected {total!r}")


def _length_check(cf: CharacteristicFunction, x: Allocation) -> np.ndarray:
    arr = x.as_array()
    if arr.shape != (cf.n + cf.m,):
        raise DomainError(f"payoff vector has length {arr.size}, expected {cf.n + cf.m}")
    return arr


def altruistic(cf: CharacteristicFunction) -> Allocation:
    """Grand-coalition retailer profits to retailers, nothing to suppliers."""
    orders = _grand_orders(cf)
    retail = retailer_profits(cf.situation, cf.grand, orders)
    payoffs = np.concatenate([retail, np.zeros(cf.m)])
    _check_efficient(cf, payoffs, "altruistic")
    return Allocation(tuple(payoffs.tolist()), "altruistic", orders=orders)


def _gains(cf: CharacteristicFunction, xa: np.ndarray, denom: int = 1):
    """Yield (R mask, j, per-capita gain) in (R, j) lexicographic order."""
    full_s = (1 << cf.m) - 1
    for r in range(1, 1 << cf.n):
        members = CoalitionPair(r, 0).retailer_indices
        own = float(sum(xa[i] for i in members))
        for j in range(cf.m):
            yield r, j, (own - cf.v(r, full_s & ~(1 << j))) / (denom * len(members))


def beta(
    cf: CharacteristicFunction, suppliers: Optional[Sequence[int]] = None
) -> tuple[float, tuple[int, int]]:
    """Minimal per-capita gain of a retailer coalition over M minus one supplier.

    ``suppliers`` restricts the removed supplier j. The witness is the
    lexicographically smallest (R mask, j) whose gain lies within tolerance
    of the minimum; the returned value is that witness's gain.
    """
    allowed = range(cf.m) if suppliers is None else sorted(set(suppliers))
    if not allowed:
        raise DomainError("supplier restriction must be nonempty")
    for j in allowed:
        if not 0 <= j < cf.m:
            raise DomainError(f"supplier index {j} out of range")
    xa = altruistic(cf).as_array()
    rows = [(r, j, g) for r, j, g in _gains(cf, xa) if j in allowed]
    low = min(g for _, _, g in rows)
    tol = value_tol(cf.v(cf.grand.retailers, cf.grand.suppliers))
    r, j, g = next(t for t in rows if t[2] <= low + tol)
    return g, (r, j)


def _compensated(cf, xa, b, weights, rule, witness=None, label=None) -> Allocation:
    payoffs = np.concatenate([xa[: cf.n] - b, weights])
    return Allocation(
        tuple(payoffs.tolist()), rule, beta=b, argmin_witness=witness,
        orders=_grand_orders(cf), label=label,
    )


def _proportional_shares(cf: CharacteristicFunction, amount: float) -> np.ndarray:
    col = _grand_orders(cf).sum(axis=0)
    total = float(col.sum())
    if total <= 0:
        raise SolverFault("grand coalition orders nothing; contradicts positivity")
    return col * amount / total


def sc_allocation(cf: CharacteristicFunction) -> Allocation:
    """Retailers each give up beta; suppliers share |N| * beta pro rata to production."""
    xa = altruistic(cf).as_array()
    b, witness = beta(cf)
    shares = _proportional_shares(cf, cf.n * b)
    if np.any(shares < -value_tol(cf.n * b)):
        raise SolverFault("negative supplier compensation")
    alloc = _compensated(cf, xa, b, shares, "sc", witness)
    _check_efficient(cf, alloc.as_array(), "sc")
    return alloc


def optimal_suppliers(cf: CharacteristicFunction) -> tuple[int, ...]:
    """Suppliers j with v(N, {j}) = v(N, M)."""
    if not cf.situation.unbounded:
        raise DomainError("M^o defined for unbounded production only")
    full_r = cf.grand.retailers
    total = cf.v(full_r, cf.grand.suppliers)
    return tuple(j for j in range(cf.m) if abs(cf.v(full_r, 1 << j) - total) <= value_tol(total))


def sc_star_allocation(cf: CharacteristicFunction) -> Allocation:
    """Compensation computed against, and paid to, the optimal suppliers only."""
    opt = optimal_suppliers(cf)
    if not opt:
        raise SolverFault("no optimal supplier found in an unbounded situation")
    xa = altruistic(cf).as_array()
    b, witness = beta(cf, opt)
    total = cf.v(cf.grand.retailers, cf.grand.suppliers)
    if len(opt) >= 2 and abs(b) > value_tol(total):
        raise SolverFault(f"beta* = {b!r} with {len(opt)} optimal suppliers; expected 0")
    pay = np.zeros(cf.m)
    pay[list(opt)] = cf.n * b
    alloc = _compensated(cf, xa, b, pay, "sc_star", witness)
    _check_efficient(cf, alloc.as_array(), "sc_star")
    return alloc


@dataclass(frozen=True)
class CoreReport:
    member: bool
    #: (pair, deficit) with the largest deficit, or None
    worst_violation: Optional[tuple[CoalitionPair, float]]
    checked: int
    efficiency_gap: float
    #: every violated pair with its deficit, in enumeration order
    violations: tuple[tuple[CoalitionPair, float], ...] = ()


def core_check(cf: CharacteristicFunction, x: Allocation) -> CoreReport:
    """Efficiency plus every coalition constraint sum_{R u S} x >= v(R, S)."""
    arr = _length_check(cf, x)
    n = cf.n
    total = cf.v(cf.grand.retailers, cf.grand.suppliers)
    gap = float(arr.sum() - total)
    bad = []
    checked = 0
    for pair in cf.pairs():
        v = cf.v(pair.retailers, pair.suppliers)
        got = sum(arr[i] for i in pair.retailer_indices) + sum(
            arr[n + j] for j in pair.supplier_indices
        )
        deficit = float(v - got)
        checked += 1
        if deficit > value_tol(v):
            bad.append((pair, deficit))
    worst = None
    for item in bad:
        if worst is None or item[1] > worst[1]:
            worst = item
    member = not bad and abs(gap) <= value_tol(total)
    return CoreReport(member, worst, checked, gap, tuple(bad))


def core_lp(cf: CharacteristicFunction, objective: Sequence[float]) -> tuple[float, np.ndarray]:
    """Maximise ``objective @ y`` over the core; returns (value, maximiser).

    Solved through its dual with the Bland simplex: one equality row per
    player, a free multiplier for efficiency and one nonnegative multiplier
    per coalition constraint.
    """
    n, m = cf.n, cf.m
    k = n + m
    c_obj = np.asarray(objective, dtype=float)
    if c_obj.shape != (k,):
        raise DomainError(f"objective has length {c_obj.size}, expected {k}")
    total = cf.v(cf.grand.retailers, cf.grand.suppliers)
    pairs = [p for p in cf.pairs() if p.retailers or p.suppliers]
    A = np.zeros((k, 2 + len(pairs)))
    cost = np.zeros(2 + len(pairs))
    A[:, 0], A[:, 1] = 1.0, -1.0
    cost[0], cost[1] = total, -total
    for col, p in enumerate(pairs, start=2):
        for i in p.retailer_indices:
            A[i, col] = -1.0
        for j in p.supplier_indices:
            A[n + j, col] = -1.0
        v = cf.v(p.retailers, p.suppliers)
        cost[col] = -(v - _LP_SLACK * (1.0 + abs(v)))
    res = simplex_bland(cost, A, c_obj)
    if res.status == UNBOUNDED:
        raise CoreEmptyError("core empty; rerun with a tighter solver tolerance")
    if res.status != OPTIMAL:
        raise SolverFault(f"core linear program ended with status {res.status}")
    return res.value, res.duals


def core_supplier_max(cf: CharacteristicFunction, j: int) -> float:
    """Largest payoff supplier ``j`` (zero-based) can receive in the core."""
    if not 0 <= j < cf.m:
        raise DomainError(f"supplier index {j} out of range")
    e = np.zeros(cf.n + cf.m)
    e[cf.n + j] = 1.0
    return core_lp(cf, e)[0]


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    passed: bool
    witness: Optional[dict] = None
    #: smallest slack over all checked (in)equalities; negative on failure
    margin: float = 0.0


def axiom_check(cf: CharacteristicFunction, x: Allocation, axiom: str) -> AxiomResult:
    """Check one of EF, SR, RR, PD, PP; on failure report the first witness."""
    if axiom not in AXIOMS:
        raise DomainError(f"unknown axiom {axiom!r}; expected one of {AXIOMS}")
    arr = _length_check(cf, x)
    n, m = cf.n, cf.m
    total = cf.v(cf.grand.retailers, cf.grand.suppliers)
    tol = value_tol(total)
    xa = altruistic(cf).as_array()

    if axiom == "EF":
        diff = float(arr.sum() - total)
        ok = abs(diff) <= tol
        return AxiomResult("EF", ok, None if ok else {"sum": float(arr.sum()), "v": total}, tol - abs(diff))

    if axiom == "SR":
        full_s = (1 << m) - 1
        worst = np.inf
        for r in range(1, 1 << n):
            own = float(sum(arr[i] for i in CoalitionPair(r, 0).retailer_indices))
            for j in range(m):
                slack = own - cf.v(r, full_s & ~(1 << j))
                worst = min(worst, slack)
                if slack < -tol:
                    return AxiomResult("SR", False, {"R": r, "j": j, "deficit": -slack}, slack)
        return AxiomResult("SR", True, None, float(worst))

    if axiom == "RR":
        gains = list(_gains(cf, xa))
        worst = np.inf
        for i in range(n):
            best = min(abs(arr[i] - (xa[i] - g)) for r, _, g in gains if r >> i & 1)
            worst = min(worst, tol - best)
            if best > tol:
                return AxiomResult("RR", False, {"i": i, "closest": float(best)}, tol - best)
        return AxiomResult("RR", True, None, float(worst))

    if axiom == "PD":
        worst = np.inf
        for a in range(n):
            for b in range(a + 1, n):
                off = abs((arr[a] - arr[b]) - (xa[a] - xa[b]))
                worst = min(worst, tol - off)
                if off > tol:
                    return AxiomResult(
                        "PD", False,
                        {"i": a, "i2": b, "difference": float(arr[a] - arr[b]),
                         "expected": float(xa[a] - xa[b])},
                        tol - off,
                    )
        return AxiomResult("PD", True, None, float(worst if n > 1 else tol))

    col = _grand_orders(cf).sum(axis=0)
    scale = tol * (1.0 + float(col.max()))
    worst = np.inf
    for a in range(m):
        for b in range(a + 1, m):
            off = abs(arr[n + a] * col[b] - arr[n + b] * col[a])
            worst = min(worst, scale - off)
            if off > scale:
                return AxiomResult("PP", False, {"j": a, "j2": b, "cross_difference": float(off)}, scale - off)
    return AxiomResult("PP", True, None, float(worst if m > 1 else scale))


def independence_fixture(cf: CharacteristicFunction, variant: str) -> Allocation:
    """Allocation built to break exactly one axiom (on suitable games).

    EF_fails: SC retailer payoffs, suppliers get nothing.
    SR_fails: SC form with the maximal instead of the minimal per-capita gain.
    RR_fails: SC form with the per-capita gain halved.
    PP_fails: |N| * beta split equally over the suppliers.
    """
    if variant not in FIXTURES:
        raise DomainError(f"unknown fixture {variant!r}; expected one of {FIXTURES}")
    xa = altruistic(cf).as_array()
    b, witness = beta(cf)
    if variant == "EF_fails":
        pay = np.concatenate([xa[: cf.n] - b, np.zeros(cf.m)])
        return Allocation(tuple(pay.tolist()), "external", b, witness, _grand_orders(cf), variant)
    if variant == "SR_fails":
        r, j, g = max(_gains(cf, xa), key=lambda t: t[2])
        return _compensated(cf, xa, g, _proportional_shares(cf, cf.n * g), "external", (r, j), variant)
    if variant == "RR_fails":
        r, j, g = min(_gains(cf, xa, denom=2), key=lambda t: t[2])
        return _compensated(cf, xa, g, _proportional_shares(cf, cf.n * g), "external", (r, j), variant)
    pay = np.full(cf.m, cf.n * b / cf.m)
    return _compensated(cf, xa, b, pay, "external", witness, variant)
