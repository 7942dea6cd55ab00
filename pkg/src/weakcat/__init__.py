"""Weak-measurement simulation of pre/post-selected interferometer scenarios."""
from .qstate import CompositeBasis, LinearOperator, StateVector
from .scenarios import Scenario, builtin, builtin_scenarios, evaluate_scenario
from .weakval import PrePostEnsemble, weak_value

__version__ = "0.1.0"

__all__ = [
    "CompositeBasis",
    "LinearOperator",
    "PrePostEnsemble",
    "Scenario",
    "StateVector",
    "builtin",
    "builtin_scenarios",
    "evaluate_scenario",
    "weak_value",
]
