"""Managed multi-context systems: grounded equilibria, timed evolution and run-time execution."""
from .terms import Atom, Compound, Const, Term, Var, apply_subst, is_ground, make_list, term_depth, unify
from .logic import (BeliefSet, DefiniteLogic, DefiniteRule, ElementaryAction, KnowledgeBase, Logic,
                    OpStatement, acc_definite, action, apply_update, mng_add, mng_threshold_new)
from .directory import Directory, Reachability, select_preferred
from .bridge import (LOCAL, BodyLiteral, BridgeRule, BridgeRulePattern, Designator, DirQuery, Name,
                     TriggerSpec, applicable_heads, ground_instances, instantiate_patterns,
                     potential_grade, preground, triggered_heads, validate_rule)
from .system import (Config, Context, System, SystemState, app, dump, grounded_equilibrium,
                     initial_state, is_equilibrium, is_timed_equilibrium, step)
from .runtime import (ConstantDelay, RandomDelay, RuntimeVersion, Scenario, TableDelay, TickEntry,
                      execute_rule, run_scenario, theorem_violations)
from .query import QuerySpec, decide_query
from .dsl import (DiagnosticError, build_system, load_system, parse_atom, parse_scenario,
                  parse_system, render, render_scenario)

__all__ = [
    "Atom", "Compound", "Const", "Term", "Var", "apply_subst", "is_ground", "make_list", "term_depth",
    "unify", "BeliefSet", "DefiniteLogic", "DefiniteRule", "ElementaryAction", "KnowledgeBase", "Logic",
    "OpStatement", "acc_definite", "action", "apply_update", "mng_add", "mng_threshold_new", "Directory",
    "Reachability", "select_preferred", "LOCAL", "BodyLiteral", "BridgeRule", "BridgeRulePattern",
    "Designator", "DirQuery", "Name", "TriggerSpec", "applicable_heads", "ground_instances",
    "instantiate_patterns", "potential_grade", "preground", "triggered_heads", "validate_rule", "Config",
    "Context", "System", "SystemState", "app", "dump", "grounded_equilibrium", "initial_state",
    "is_equilibrium", "is_timed_equilibrium", "step", "ConstantDelay", "RandomDelay", "RuntimeVersion",
    "Scenario", "TableDelay", "TickEntry", "execute_rule", "run_scenario", "theorem_violations", "QuerySpec",
    "decide_query", "DiagnosticError", "build_system", "load_system", "parse_atom", "parse_scenario",
    "parse_system", "render", "render_scenario",
]

__version__ = "0.1.0"
