"""Domain types for multi-retailer, multi-supplier distribution chains.

A chain is described by per-retailer selling-price functions, per-supplier
wholesale and production-cost functions, and a capacity matrix (or the
unbounded marker). Every function is continuous piecewise-linear with a
constant extension to the right of its last knot.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from chaincore.errors import DomainError, ValidationError

#: Slack used when checking the strict inequality wholesale > cost.
STRICT_MARGIN = 1e-9
_MONO_TOL = 1e-12


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function defined by its knots.

    Linear interpolation between knots, constant beyond the last knot.
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.xs) != len(self.ys) or not self.xs:
            raise DomainError("knot lists must be nonempty and of equal length")
        if self.xs[0] != 0.0:
            raise DomainError(f"first knot must be at x = 0, got {self.xs[0]!r}")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise DomainError("knot x-coordinates must be strictly increasing")
        if not all(np.isfinite(self.xs)) or not all(np.isfinite(self.ys)):
            raise DomainError("knots must be finite")

    @classmethod
    def from_knots(cls, knots: Iterable[Sequence[float]]) -> "PiecewiseLinearFn":
        pts = [(float(x), float(y)) for x, y in knots]
        return cls(tuple(p[0] for p in pts), tuple(p[1] for p in pts))

    @property
    def knots(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))

    @property
    def slopes(self) -> np.ndarray:
        xs, ys = np.asarray(self.xs), np.asarray(self.ys)
        return np.diff(ys) / np.diff(xs)

    def __call__(self, q):
        """Vectorised evaluation; ``q`` may be a scalar or an array."""
        return np.interp(q, self.xs, self.ys)

    def scaled(self, factor: float) -> "PiecewiseLinearFn":
        return PiecewiseLinearFn(self.xs, tuple(factor * y for y in self.ys))


def eval_fn(f: PiecewiseLinearFn, q: float) -> float:
    """Evaluate ``f`` at a single nonnegative quantity."""
    if q < 0:
        raise DomainError(f"quantity must be nonnegative, got {q!r}")
    return float(np.interp(q, f.xs, f.ys))


def min_envelope(fns: Sequence[PiecewiseLinearFn]) -> PiecewiseLinearFn:
    """Pointwise minimum of piecewise-linear functions.

    The result's knots are the union of the input knots plus every crossing
    point between two inputs inside a common linear piece.
    """
    if not fns:
        raise DomainError("min_envelope requires at least one function")
    if len(fns) == 1:
        return fns[0]
    grid = sorted({x for f in fns for x in f.xs})
    extra: list[float] = []
    for lo, hi in zip(grid, grid[1:]):
        at_lo = [float(f(lo)) for f in fns]
        at_hi = [float(f(hi)) for f in fns]
        for a in range(len(fns)):
            for b in range(a + 1, len(fns)):
                d_lo = at_lo[a] - at_lo[b]
                d_hi = at_hi[a] - at_hi[b]
                if d_lo * d_hi < 0:
                    # both functions are linear on [lo, hi]
                    extra.append(lo + (hi - lo) * d_lo / (d_lo - d_hi))
    xs = sorted(set(grid) | set(extra))
    ys = [min(float(f(x)) for f in fns) for x in xs]
    return PiecewiseLinearFn(tuple(xs), tuple(ys))


def find_q_star(p: PiecewiseLinearFn) -> float:
    """Smallest quantity at which the price function reaches zero."""
    if p.ys[0] <= 0:
        raise ValidationError("price must be positive at q = 0")
    for (x0, y0), (x1, y1) in zip(p.knots, p.knots[1:]):
        if y1 <= 0:
            if y1 == 0 and y0 == 0:
                return x0
            # root of the linear piece through (x0, y0), (x1, y1)
            return x0 + (x1 - x0) * y0 / (y0 - y1)
    raise ValidationError("price never vanishes")


@dataclass(frozen=True)
class RetailerSpec:
    id: Hashable
    price: PiecewiseLinearFn
    q_star: Optional[float] = None


@dataclass(frozen=True)
class SupplierSpec:
    id: Hashable
    wholesale: PiecewiseLinearFn
    cost: PiecewiseLinearFn


@dataclass(frozen=True)
class CoalitionPair:
    """A retailer coalition and a supplier coalition, both as bitmasks."""

    retailers: int
    suppliers: int

    @classmethod
    def of(cls, retailers: Iterable[int] = (), suppliers: Iterable[int] = ()) -> "CoalitionPair":
        """Build from zero-based indices."""
        r = 0
        for i in retailers:
            r |= 1 << i
        s = 0
        for j in suppliers:
            s |= 1 << j
        return cls(r, s)

    @property
    def retailer_indices(self) -> tuple[int, ...]:
        return _bits(self.retailers)

    @property
    def supplier_indices(self) -> tuple[int, ...]:
        return _bits(self.suppliers)

    def check(self, n: int, m: int) -> None:
        if self.retailers < 0 or self.suppliers < 0 or self.retailers >> n or self.suppliers >> m:
            raise DomainError(f"coalition {self} references players outside N={n}, M={m}")


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class MRSSituation:
    """Retailers N, suppliers M and capacity matrix (``None`` = unbounded)."""

    retailers: tuple[RetailerSpec, ...]
    suppliers: tuple[SupplierSpec, ...]
    capacity: Optional[tuple[tuple[float, ...], ...]]
    _envelopes: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def n(self) -> int:
        return len(self.retailers)

    @property
    def m(self) -> int:
        return len(self.suppliers)

    @property
    def unbounded(self) -> bool:
        return self.capacity is None

    @property
    def is_validated(self) -> bool:
        return all(r.q_star is not None for r in self.retailers)

    @property
    def q_star(self) -> np.ndarray:
        if not self.is_validated:
            raise DomainError("situation has not been validated")
        return np.array([r.q_star for r in self.retailers], dtype=float)

    def effective_capacity(self) -> np.ndarray:
        """Capacity matrix; unbounded entries become the retailer's q*."""
        qs = self.q_star
        if self.capacity is None:
            return np.repeat(qs[:, None], self.m, axis=1)
        return np.asarray(self.capacity, dtype=float)

    def cost_envelope(self, suppliers: int) -> PiecewiseLinearFn:
        """Shared production cost of a supplier coalition (bitmask)."""
        env = self._envelopes.get(suppliers)
        if env is None:
            env = min_envelope([self.suppliers[j].cost for j in _bits(suppliers)])
            self._envelopes[suppliers] = env
        return env

    def scaled(self, factor: float) -> "MRSSituation":
        """Multiply every price, wholesale and cost function by ``factor``."""
        return MRSSituation(
            tuple(replace(r, price=r.price.scaled(factor)) for r in self.retailers),
            tuple(
                replace(s, wholesale=s.wholesale.scaled(factor), cost=s.cost.scaled(factor))
                for s in self.suppliers
            ),
            self.capacity,
        )


@dataclass(frozen=True)
class Violation:
    subject: str
    rule: str
    quantity: Optional[float] = None

    def __str__(self) -> str:
        at = "" if self.quantity is None else f" (at q = {self.quantity:g})"
        return f"{self.subject}: {self.rule}{at}"


@dataclass(frozen=True)
class ValidationResult:
    situation: Optional[MRSSituation]
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_non_increasing(f: PiecewiseLinearFn, upto: float = np.inf) -> Optional[float]:
    for (x0, y0), (x1, y1) in zip(f.knots, f.knots[1:]):
        if x0 >= upto:
            break
        if y1 > y0 + _MONO_TOL * (1 + abs(y0)):
            return x0
    return None


def _check_qf_non_decreasing(f: PiecewiseLinearFn) -> Optional[float]:
    """First quantity where q*f(q) decreases, or None.

    On a piece f(q) = a + b q the product has derivative a + 2 b q, which is
    linear, so checking both ends of every piece is exact.
    """
    for (x0, y0), (x1, y1) in zip(f.knots, f.knots[1:]):
        b = (y1 - y0) / (x1 - x0)
        a = y0 - b * x0
        tol = _MONO_TOL * (1 + abs(a))
        if a + 2 * b * x0 < -tol:
            return x0
        if a + 2 * b * x1 < -tol:
            return x1
    if f.ys[-1] < 0:
        return f.xs[-1]
    return None


def validate(situation: MRSSituation) -> ValidationResult:
    """Check the standing assumptions; fill in each retailer's q*.

    Violations are returned as data. The product ``q * cost(q)`` being
    non-decreasing is reported as a warning only.
    """
    bad: list[Violation] = []
    warn: list[Violation] = []
    n, m = situation.n, situation.m
    if n < 1:
        bad.append(Violation("situation", "at least one retailer required"))
    if m < 1:
        bad.append(Violation("situation", "at least one supplier required"))

    retailers = []
    for r in situation.retailers:
        name = f"retailer {r.id}"
        q_star = None
        try:
            q_star = find_q_star(r.price)
        except ValidationError as exc:
            bad.append(Violation(name, str(exc)))
        at = _check_non_increasing(r.price, upto=np.inf if q_star is None else q_star)
        if at is not None:
            bad.append(Violation(name, "price must be non-increasing", at))
        retailers.append(replace(r, q_star=q_star))

    for s in situation.suppliers:
        name = f"supplier {s.id}"
        for label, f in (("wholesale", s.wholesale), ("cost", s.cost)):
            if min(f.ys) <= 0:
                bad.append(Violation(name, f"{label} must be positive", f.xs[int(np.argmin(f.ys))]))
            at = _check_non_increasing(f)
            if at is not None:
                bad.append(Violation(name, f"{label} must be non-increasing", at))
        at = _check_qf_non_decreasing(s.wholesale)
        if at is not None:
            bad.append(Violation(name, "q*wholesale(q) must be non-decreasing", at))
        at = _check_qf_non_decreasing(s.cost)
        if at is not None:
            warn.append(Violation(name, "q*cost(q) is not non-decreasing", at))
        # both functions are linear between consecutive union knots
        for x in sorted(set(s.wholesale.xs) | set(s.cost.xs)):
            if s.wholesale(x) < s.cost(x) + STRICT_MARGIN:
                bad.append(Violation(name, "wholesale must exceed cost", x))
                break

    for r in situation.retailers:
        for s in situation.suppliers:
            if not r.price.ys[0] > s.wholesale.ys[0]:
                bad.append(
                    Violation(f"retailer {r.id}", f"p(0) > w_j(0) required for supplier {s.id}", 0.0)
                )

    if situation.capacity is not None:
        cap = situation.capacity
        if len(cap) != n or any(len(row) != m for row in cap):
            bad.append(Violation("capacity", f"capacity must be a {n}x{m} matrix"))
        elif not all(np.isfinite(c) and c > 0 for row in cap for c in row):
            bad.append(Violation("capacity", "capacity entries must be positive and finite"))

    ids = [r.id for r in situation.retailers]
    if len(set(ids)) != len(ids):
        bad.append(Violation("situation", "retailer ids must be unique"))
    ids = [s.id for s in situation.suppliers]
    if len(set(ids)) != len(ids):
        bad.append(Violation("situation", "supplier ids must be unique"))

    if bad:
        return ValidationResult(None, tuple(bad), tuple(warn))
    validated = MRSSituation(tuple(retailers), situation.suppliers, situation.capacity)
    return ValidationResult(validated, (), tuple(warn))


def validated(situation: MRSSituation) -> MRSSituation:
    """Validate and return the enriched situation, raising on violations."""
    result = validate(situation)
    if not result.ok:
        raise ValidationError("; ".join(str(v) for v in result.violations), result.violations)
    return result.situation
