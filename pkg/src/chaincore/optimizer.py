"""Coalition profit objective and its deterministic maximisation.

The feasible set for a retailer coalition R is the box
``0 <= q_ij <= min(capacity_ij, q*_i)`` intersected with the row-sum
constraints ``sum_j q_ij <= q*_i``. Order matrices are arrays of shape
``(|R|, m)`` whose rows follow the ascending retailer indices of R.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from chaincore.errors import CapacityError, DomainError
from chaincore.model import CoalitionPair, MRSSituation, eval_fn

_TIE_RTOL = 1e-11
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    initial_resolution: int = 33
    rounds: int = 8
    shrink: float = 0.5
    tol: float = 1e-6
    max_dims: int = 9
    # per-axis resolution is lowered until the grid fits this budget
    max_grid_points: int = 2_000_000
    max_players: int = 16
    coord_tol: float = 1e-9
    max_coord_cycles: int = 200

    def __post_init__(self) -> None:
        if self.initial_resolution < 2:
            raise DomainError("initial_resolution must be at least 2")
        if not 0 < self.shrink < 1:
            raise DomainError("shrink must lie in (0, 1)")
        if self.rounds < 0 or self.max_dims < 1:
            raise DomainError("rounds must be >= 0 and max_dims >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptResult:
    value: float
    orders: np.ndarray
    retailers: tuple[int, ...]
    iterations: int
    resolution_reached: float


def _check_orders(situation: MRSSituation, pair: CoalitionPair, q) -> np.ndarray:
    pair.check(situation.n, situation.m)
    q = np.asarray(q, dtype=float)
    shape = (len(pair.retailer_indices), situation.m)
    if q.shape != shape:
        raise DomainError(f"order matrix has shape {q.shape}, expected {shape}")
    if np.any(q < 0):
        raise DomainError("order quantities must be nonnegative")
    return q


def retailer_profits(situation: MRSSituation, pair: CoalitionPair, q) -> np.ndarray:
    """Profit of each retailer in R when supplier coalition S shares costs.

    Suppliers in S charge the shared production cost evaluated at the total
    quantity R orders from S; the others charge their wholesale price at the
    total quantity R orders from them.
    """
    q = _check_orders(situation, pair, q)
    S = set(pair.supplier_indices)
    col = q.sum(axis=0)
    unit = np.empty(situation.m)
    if S:
        shared = eval_fn(situation.cost_envelope(pair.suppliers), float(sum(col[j] for j in S)))
    for j, sup in enumerate(situation.suppliers):
        unit[j] = shared if j in S else eval_fn(sup.wholesale, float(col[j]))
    out = np.empty(len(q))
    for row, i in enumerate(pair.retailer_indices):
        x = float(q[row].sum())
        out[row] = eval_fn(situation.retailers[i].price, x) * x - float(np.dot(unit, q[row]))
    return out


def coalition_objective(situation: MRSSituation, pair: CoalitionPair, q) -> float:
    """Joint profit of the coalition pair at order matrix ``q``."""
    return float(retailer_profits(situation, pair, q).sum())


def supplier_profit(
    situation: MRSSituation, j: int, pair: CoalitionPair, q, i: int
) -> float:
    """Margin supplier ``j`` in S earns on retailer ``i``'s order.

    ``(w_j(q_Rj) - c_S(q_RS)) * q_ij`` with R, S taken from ``pair``.
    """
    if j not in pair.supplier_indices:
        raise DomainError(f"supplier {j} is not in the supplier coalition")
    rows = pair.retailer_indices
    if i not in rows:
        raise DomainError(f"retailer {i} is not in the retailer coalition")
    q = _check_orders(situation, pair, q)
    col = q.sum(axis=0)
    q_rs = float(sum(col[k] for k in pair.supplier_indices))
    margin = eval_fn(situation.suppliers[j].wholesale, float(col[j])) - eval_fn(
        situation.cost_envelope(pair.suppliers), q_rs
    )
    return margin * float(q[rows.index(i), j])


def batch_objective(situation: MRSSituation, pair: CoalitionPair, Z: np.ndarray) -> np.ndarray:
    """Objective for a stack of order matrices ``Z`` of shape (K, |R|, m)."""
    rows = pair.retailer_indices
    x = Z.sum(axis=2)
    col = Z.sum(axis=1)
    total = np.zeros(Z.shape[0])
    for r, i in enumerate(rows):
        total += situation.retailers[i].price(x[:, r]) * x[:, r]
    S = pair.supplier_indices
    for j, sup in enumerate(situation.suppliers):
        if j not in S:
            total -= sup.wholesale(col[:, j]) * col[:, j]
    if S:
        ys = col[:, list(S)].sum(axis=1)
        total -= situation.cost_envelope(pair.suppliers)(ys) * ys
    return total


def _box(situation: MRSSituation, pair: CoalitionPair) -> tuple[np.ndarray, np.ndarray]:
    rows = list(pair.retailer_indices)
    qs = situation.q_star[rows]
    ub = np.minimum(situation.effective_capacity()[rows], qs[:, None])
    return ub.ravel(), qs


def _axis_resolution(requested: int, dims: int, budget: int) -> int:
    res = requested
    while res > 2 and res**dims > budget:
        res -= 1
    return res


def _tie_tol(value: float) -> float:
    return _TIE_RTOL * (1.0 + abs(value))


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    for u, v in zip(a, b):
        if u != v:
            return u < v
    return False


def _grid_best(situation, pair, lo, hi, res, qs):
    """Best feasible point on the grid; first in row-major order among ties.

    The grid is the product of one sub-grid per retailer row, so row terms
    are evaluated once per sub-grid and broadcast; only the column-coupled
    purchase costs are evaluated on the full product.
    """
    axes = [np.linspace(a, b, res) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    rows = pair.retailer_indices
    nr, m = len(rows), situation.m
    S = pair.supplier_indices
    total = 0.0
    cols = [0.0] * m
    shared = 0.0
    for r, i in enumerate(rows):
        mesh = np.meshgrid(*axes[r * m : (r + 1) * m], indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        x = pts.sum(axis=1)
        rev = situation.retailers[i].price(x) * x
        rev[x > qs[r]] = -np.inf
        shape = [1] * nr
        shape[r] = len(pts)
        total = total + rev.reshape(shape)
        for j in range(m):
            cols[j] = cols[j] + pts[:, j].reshape(shape)
        if S:
            shared = shared + pts[:, list(S)].sum(axis=1).reshape(shape)
    for j, sup in enumerate(situation.suppliers):
        if j not in S:
            total = total - sup.wholesale(cols[j]) * cols[j]
    if S:
        shared = np.broadcast_to(shared, np.shape(total))
        total = total - situation.cost_envelope(pair.suppliers)(shared) * shared
    vals = np.ravel(total)
    top = vals.max()
    if not np.isfinite(top):
        return None, -np.inf
    k = int(np.flatnonzero(vals >= top - _tie_tol(top))[0])
    coords = np.unravel_index(k, tuple(len(ax) for ax in axes))
    point = np.array([axes[a][c] for a, c in enumerate(coords)])
    return point, float(vals[k])


def _golden_max(f, a: float, b: float, tol: float) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc >= fd else d


def solve_coalition(
    situation: MRSSituation, pair: CoalitionPair, config: SolverConfig = SolverConfig()
) -> OptResult:
    """Maximise the coalition objective over the feasible order set.

    Uniform grid, then repeated shrinking grids centred on the incumbent,
    then cyclic coordinate-wise golden-section polishing. Ties break toward
    the lexicographically smallest order matrix.
    """
    pair.check(situation.n, situation.m)
    rows = pair.retailer_indices
    if not rows:
        raise DomainError("retailer coalition must be nonempty")
    m = situation.m
    dims = len(rows) * m
    if dims > config.max_dims:
        raise CapacityError(
            f"{dims} decision variables exceed max_dims={config.max_dims}; "
            "use a coarser configuration or raise max_dims"
        )
    ub, qs = _box(situation, pair)
    res = _axis_resolution(config.initial_resolution, dims, config.max_grid_points)

    def value_at(flat: np.ndarray) -> float:
        return float(batch_objective(situation, pair, flat.reshape(1, len(rows), m))[0])

    lo, hi = np.zeros(dims), ub.copy()
    edge = float(ub.max())
    inc, inc_val = _grid_best(situation, pair, lo, hi, res, qs)
    spacing = float((hi - lo).max()) / (res - 1)
    iterations = 1
    for _ in range(config.rounds):
        if spacing < config.tol * edge:
            break
        width = config.shrink * (hi - lo)
        lo = np.clip(inc - width / 2, 0.0, ub - width)
        hi = lo + width
        # keep the outer bound exact so boundary optima stay on the grid
        hi = np.where(np.isclose(hi, ub, rtol=0, atol=1e-12 * edge), ub, hi)
        point, val = _grid_best(situation, pair, lo, hi, res, qs)
        iterations += 1
        spacing = float((hi - lo).max()) / (res - 1)
        if point is None:
            continue
        if val > inc_val + _tie_tol(inc_val) or (
            val >= inc_val - _tie_tol(inc_val) and _lex_less(point, inc)
        ):
            inc, inc_val = point, val

    step = np.maximum(2.0 * (hi - lo) / (res - 1), config.coord_tol)
    for _ in range(config.max_coord_cycles):
        iterations += 1
        moved = 0.0
        for k in range(dims):
            r = k // m
            row_rest = float(inc[r * m : (r + 1) * m].sum() - inc[k])
            a = max(0.0, inc[k] - step[k])
            b = min(ub[k], qs[r] - row_rest, inc[k] + step[k])
            if b <= a:
                continue
            trial = inc.copy()

            def along(t: float) -> float:
                trial[k] = t
                return value_at(trial)

            t_best = _golden_max(along, a, b, config.coord_tol)
            cand_t, cand_v = inc[k], inc_val
            for t in (t_best, a, b):
                v = along(t)
                if v > cand_v + _tie_tol(cand_v):
                    cand_t, cand_v = t, v
            if cand_t != inc[k]:
                moved = max(moved, abs(cand_t - inc[k]))
                inc = inc.copy()
                inc[k] = cand_t
                inc_val = cand_v
        if moved < config.coord_tol:
            break

    orders = inc.reshape(len(rows), m)
    orders = np.where(orders < 0, 0.0, orders)
    return OptResult(
        value=coalition_objective(situation, pair, orders),
        orders=orders,
        retailers=rows,
        iterations=iterations,
        resolution_reached=spacing,
    )


def _flat_knots(fns) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.concatenate([np.asarray(f.xs, dtype=float) for f in fns])
    ys = np.concatenate([np.asarray(f.ys, dtype=float) for f in fns])
    off = np.cumsum([0] + [len(f.xs) for f in fns]).astype(np.int64)
    return xs, ys, off


def brute_force_oracle(
    situation: MRSSituation,
    pair: CoalitionPair,
    resolution: int,
    max_points: float = 1e8,
) -> float:
    """Best objective over the full uniform grid, no refinement.

    A lower-bound certificate for ``solve_coalition``. Raises
    ``CapacityError`` when ``resolution ** dims`` exceeds ``max_points``.
    """
    from chaincore._oracle import grid_max

    pair.check(situation.n, situation.m)
    rows = pair.retailer_indices
    if not rows:
        raise DomainError("retailer coalition must be nonempty")
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    m = situation.m
    dims = len(rows) * m
    if float(resolution) ** dims > max_points:
        raise CapacityError(f"{resolution}^{dims} grid points exceed the limit of {max_points:g}")
    ub, qs = _box(situation, pair)
    axes = np.stack([np.linspace(0.0, u, resolution) for u in ub])
    pxs, pys, poff = _flat_knots([situation.retailers[i].price for i in rows])
    wxs, wys, woff = _flat_knots([s.wholesale for s in situation.suppliers])
    in_s = np.zeros(m, dtype=np.bool_)
    in_s[list(pair.supplier_indices)] = True
    if pair.suppliers:
        env = situation.cost_envelope(pair.suppliers)
        cxs, cys = np.array(env.xs), np.array(env.ys)
    else:
        cxs, cys = np.zeros(1), np.zeros(1)
    best, _ = grid_max(axes, len(rows), m, pxs, pys, poff, wxs, wys, woff, cxs, cys, in_s, qs)
    return float(best)
