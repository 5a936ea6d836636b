"""Enumeration of minimal phenotype controls for synchronous Boolean networks."""
from .benders import EnumerationReport, enumerate_controls
from .cnf import ClauseSet, build_clauses
from .dynamics import (
    AttractorWitness,
    ControlVector,
    TrapSpaceVector,
    apply_control,
    enumerate_attractors,
    is_trap_space,
    oracle_max_forbidden_length,
    oracle_minimal_controls,
)
from .network import BooleanNetwork, augment_phenotype, make_network, parse_bnet, read_bnet
from .verify import max_forbidden_length, verify_feasibility, verify_minimality

__version__ = "0.1.0"

__all__ = [
    "AttractorWitness", "BooleanNetwork", "ClauseSet", "ControlVector", "EnumerationReport",
    "TrapSpaceVector", "apply_control", "augment_phenotype", "build_clauses", "enumerate_attractors",
    "enumerate_controls", "is_trap_space", "make_network", "max_forbidden_length",
    "oracle_max_forbidden_length", "oracle_minimal_controls", "parse_bnet", "read_bnet",
    "verify_feasibility", "verify_minimality",
]
