"""Explicit-state model checking of asynchronous shared-variable process
networks, with partial order reduction driven by dependence relations
extracted from compositionally built local state graphs."""

from .composition import CompositionError, compose, compose_all
from .cra import Constraint, CRAResult, apply_constraint, build_local_sgs, extract_constraints, run_cra
from .dependence import DependenceOracle, build_conditional_deps, build_oracle, extract_dependence, visible_transitions
from .dsl import Diagnostic, DslError, parse_system, parse_with_diagnostics, print_system
from .model import (
    ENV,
    DisabledTransitionError,
    DomainOverflowError,
    ModelError,
    ProcessDef,
    StateGraph,
    SystemDef,
    TransitionDef,
    VariableDecl,
    enabled,
    fire,
    in_pred,
    isomorphic,
)
from .por import AmpleSelector, ample, explore_por
from .reachability import InvalidWitnessError, SearchStats, explore_full, replay
from .semantics import CompiledSystem

__version__ = "0.1.0"

__all__ = [
    "AmpleSelector", "CRAResult", "CompiledSystem", "CompositionError", "Constraint",
    "DependenceOracle", "Diagnostic", "DisabledTransitionError", "DomainOverflowError",
    "DslError", "ENV", "InvalidWitnessError", "ModelError", "ProcessDef", "SearchStats",
    "StateGraph", "SystemDef", "TransitionDef", "VariableDecl", "ample", "apply_constraint",
    "build_conditional_deps", "build_local_sgs", "build_oracle", "compose", "compose_all",
    "enabled", "explore_full", "explore_por", "extract_constraints", "extract_dependence",
    "fire", "in_pred", "isomorphic", "parse_system", "parse_with_diagnostics", "print_system",
    "replay", "run_cra", "visible_transitions",
]
