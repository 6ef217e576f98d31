import numpy as np
import pytest

from helpers import TABLE1, TABLE4

from chaincore.errors import CapacityError, DomainError
from chaincore.game import (
    build,
    check_monotonicity,
    check_positivity,
    check_stored_values,
    check_superadditivity,
    fingerprint,
    value,
)
from chaincore.model import CoalitionPair
from chaincore.optimizer import SolverConfig


def test_table1_values(cf2):
    for (r, s), want in TABLE1.items():
        assert cf2.v(r, s) == pytest.approx(want, abs=1e-6)


def test_table4_values(cf5):
    for (r, s), want in TABLE4.items():
        assert cf5.v(r, s) == pytest.approx(want, abs=1e-6)


def test_unbounded_single_entries(cf4):
    assert cf4.v(0b10, 0b01) == pytest.approx(1920, abs=1e-6)
    assert cf4.v(0b01, 0b10) == pytest.approx(275, abs=1e-6)


def test_table_shape_and_empty_rows(cf2):
    assert len(cf2.table) == 16
    for s in range(4):
        assert cf2.v(0, s) == 0.0 and cf2.orders(CoalitionPair(0, s)) is None


def test_value_lookup(cf2):
    assert value(cf2, CoalitionPair(0b10, 0b01)) == pytest.approx(36.5)
    assert value(cf2, CoalitionPair(0, 0b11)) == 0.0
    assert value(cf2, cf2.grand) == pytest.approx(340 / 3)
    with pytest.raises(DomainError):
        value(cf2, CoalitionPair(8, 0))
    with pytest.raises(DomainError):
        value(cf2, cf2.grand, expected_fingerprint="0" * 64)


def test_player_guard(ex2):
    with pytest.raises(CapacityError):
        build(ex2, SolverConfig(max_players=3))


def test_structure_checks_pass(cf2, cf4, cf5):
    for cf in (cf2, cf4, cf5):
        for check in (check_positivity, check_superadditivity, check_monotonicity):
            rep = check(cf)
            assert rep.passed, (check.__name__, rep.violations[:3])
        assert check_stored_values(cf) == []


def test_superadditivity_instances(cf2, cf4):
    assert cf2.v(1, 1) + cf2.v(2, 2) <= cf2.v(3, 3)
    assert cf4.v(1, 1) + cf4.v(2, 2) <= cf4.v(3, 3)


def test_zero_margin_monotonicity(cf5):
    rep = check_monotonicity(cf5)
    assert rep.passed and rep.worst_margin == pytest.approx(0.0, abs=1e-9)


def test_fault_injection(cf2):
    broken = cf2.with_value(CoalitionPair(0b01, 0b01), 0.0)
    rep = check_positivity(broken)
    assert not rep.passed and len(rep.violations) == 1
    assert check_stored_values(broken) == [CoalitionPair(0b01, 0b01)]
    inflated = cf2.with_value(CoalitionPair(0b01, 0b01), 500.0)
    assert not check_superadditivity(inflated).passed
    assert not check_monotonicity(inflated).passed


def test_value_dominates_supplier_free(cf2, cf4):
    for cf in (cf2, cf4):
        for pair in cf.pairs():
            assert cf.v(pair.retailers, pair.suppliers) >= cf.v(pair.retailers, 0) - 1e-9


def test_complementary_splits(cf2, cf4):
    for cf in (cf2, cf4):
        full_r, full_s = cf.grand.retailers, cf.grand.suppliers
        top = cf.v(full_r, full_s)
        for pair in cf.pairs():
            rest = cf.v(full_r & ~pair.retailers, full_s & ~pair.suppliers)
            assert top >= cf.v(pair.retailers, pair.suppliers) + rest - 1e-6 * (1 + top)


def test_rebuild_bit_identical(ex2, cf2):
    again = build(ex2)
    assert again.fingerprint == cf2.fingerprint
    for pair, (val, orders) in cf2.table.items():
        val2, orders2 = again.table[pair]
        assert val == val2
        assert (orders is None and orders2 is None) or np.array_equal(orders, orders2)


def test_fingerprint_depends_on_config(ex2):
    assert fingerprint(ex2, SolverConfig()) != fingerprint(ex2, SolverConfig(rounds=3))
    assert fingerprint(ex2, SolverConfig()) == fingerprint(ex2, SolverConfig())
