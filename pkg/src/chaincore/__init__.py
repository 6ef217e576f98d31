"""Cooperative profit allocation for chains of retailers and suppliers."""

from chaincore.allocation import (
    Allocation,
    CoreReport,
    altruistic,
    axiom_check,
    beta,
    core_check,
    core_supplier_max,
    independence_fixture,
    optimal_suppliers,
    sc_allocation,
    sc_star_allocation,
)
from chaincore.errors import (
    CapacityError,
    ChainCoreError,
    CoreEmptyError,
    DomainError,
    InputError,
    SolverFault,
    ValidationError,
)
from chaincore.game import CharacteristicFunction, build, value
from chaincore.model import (
    CoalitionPair,
    MRSSituation,
    PiecewiseLinearFn,
    RetailerSpec,
    SupplierSpec,
    validate,
    validated,
)
from chaincore.optimizer import SolverConfig, brute_force_oracle, solve_coalition

__version__ = "0.1.0"
