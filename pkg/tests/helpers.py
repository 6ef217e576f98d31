"""Shared builders for tests: fixture paths and random valid situations."""

from pathlib import Path

import numpy as np

from chaincore.model import MRSSituation, PiecewiseLinearFn, RetailerSpec, SupplierSpec, validated

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Example 2 of the fixtures, as exact fractions where useful
TABLE1 = {
    (0b01, 0b00): 40 / 3, (0b01, 0b01): 15.0, (0b01, 0b10): 70 / 3, (0b01, 0b11): 100 / 3,
    (0b10, 0b00): 100 / 3, (0b10, 0b01): 36.5, (0b10, 0b10): 130 / 3, (0b10, 0b11): 54.0,
    (0b11, 0b00): 160 / 3, (0b11, 0b01): 185 / 3, (0b11, 0b10): 220 / 3, (0b11, 0b11): 340 / 3,
}
TABLE1_ORDERS = {
    (0b01, 0b00): [[0, 10]], (0b01, 0b01): [[10, 0]], (0b01, 0b10): [[0, 10]],
    (0b01, 0b11): [[10, 10]], (0b10, 0b00): [[0, 10]], (0b10, 0b01): [[10, 3]],
    (0b10, 0b10): [[0, 10]], (0b10, 0b11): [[9, 9]],
    (0b11, 0b00): [[0, 10], [0, 10]], (0b11, 0b01): [[10, 5 / 3], [10, 10 / 3]],
    (0b11, 0b10): [[0, 10], [0, 10]], (0b11, 0b11): [[10, 10], [10, 10]],
}
# as printed in the source table for the unbounded two-retailer example
TABLE3 = {
    (0b01, 0b00): 800 / 3, (0b01, 0b01): 600.0, (0b01, 0b10): 275.0, (0b01, 0b11): 600.0,
    (0b10, 0b00): 1960 / 3, (0b10, 0b01): 1920.0, (0b10, 0b10): 770.0, (0b10, 0b11): 1920.0,
    (0b11, 0b00): 3110 / 3, (0b11, 0b01): 2904.5, (0b11, 0b10): 4027 / 3, (0b11, 0b11): 2904.5,
}
TABLE4 = {(0b1, 0b00): 800 / 3, (0b1, 0b01): 600.0, (0b1, 0b10): 600.0, (0b1, 0b11): 600.0}

F = PiecewiseLinearFn.from_knots


def _non_increasing(rng, y0, y_end, x_end, pieces):
    """Knots of a non-increasing function from (0, y0) to (x_end, y_end)."""
    xs = np.sort(rng.uniform(0, x_end, pieces - 1)) if pieces > 1 else np.array([])
    ys = np.sort(rng.uniform(y_end, y0, pieces - 1))[::-1] if pieces > 1 else np.array([])
    knots = [(0.0, y0)] + list(zip(xs.tolist(), ys.tolist())) + [(x_end, y_end)]
    out = [knots[0]]
    for x, y in knots[1:]:
        if x > out[-1][0] + 1e-6:
            out.append((x, y))
    return out


def random_situation(rng: np.random.Generator, n: int, m: int, bounded: bool = True) -> MRSSituation:
    """A random situation that passes validation."""
    suppliers = []
    w_heads = []
    for j in range(m):
        w0 = rng.uniform(2.0, 6.0)
        # slope small enough that q * w(q) stays non-decreasing
        x_end = rng.uniform(10.0, 40.0)
        w_end = rng.uniform(0.55, 0.9) * w0
        wholesale = F([(0.0, w0), (x_end, w_end)])
        c0 = rng.uniform(0.3, 0.95) * w_end
        c_end = rng.uniform(0.3, 1.0) * c0
        cost = F(_non_increasing(rng, c0, c_end, rng.uniform(5.0, 40.0), int(rng.integers(1, 3))))
        suppliers.append(SupplierSpec(j + 1, wholesale, cost))
        w_heads.append(w0)
    retailers = []
    for i in range(n):
        p0 = max(w_heads) + rng.uniform(0.5, 5.0)
        q_star = rng.uniform(10.0, 60.0)
        knots = _non_increasing(rng, p0, 0.0, q_star, int(rng.integers(1, 3)))
        retailers.append(RetailerSpec(i + 1, F(knots)))
    capacity = None
    if bounded:
        capacity = tuple(tuple(float(rng.uniform(2.0, 30.0)) for _ in range(m)) for _ in range(n))
    return validated(MRSSituation(tuple(retailers), tuple(suppliers), capacity))
