"""System assembly, belief states, grounded equilibria and timed stepping."""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import (Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple,
                    Optional, Sequence, Set, Tuple)

from .bridge import (BridgeRule, BridgeRulePattern, TriggerRecord, TriggerSpec,
                     applicable_heads, instantiate_patterns, preground, triggered_heads,
                     unresolved_roles, validate_rule)
from .directory import Directory, Reachability
from .logic import (BUILTIN_ACTIONS, DEFAULT_DEPTH_BOUND, LOGICS, MANAGEMENT, UPDATES,
                    BeliefSet, ElementaryAction, KnowledgeBase, Logic,
                    ManagementFunction, OpStatement, UpdateFunction, apply_update)
from .terms import Atom

log = logging.getLogger(__name__)

SYSTEM = "@system"
DIRECTORY_ACTIONS = frozenset({"dir_register", "dir_deregister", "dir_join", "dir_leave",
                               "reach_add", "reach_remove"})


class StepError(RuntimeError):
    def __init__(self, ctx: str, message: str):
        super().__init__(f"{ctx}: {message}")
        self.ctx = ctx


class ValidationError(ValueError):
    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class Config:
    depth_bound: int = DEFAULT_DEPTH_BOUND
    cap: int = 10_000
    latency: int = 1
    max_latency: int = 64


@dataclass(frozen=True)
class Context:
    name: str
    kb: KnowledgeBase = KnowledgeBase()
    rules: Tuple[BridgeRule, ...] = ()
    patterns: Tuple[BridgeRulePattern, ...] = ()
    triggers: Mapping[str, TriggerSpec] = field(default_factory=dict)
    prefs: Tuple[Atom, ...] = ()
    actions: FrozenSet[str] = BUILTIN_ACTIONS
    logic: str = "definite"
    mng: str = "add"
    update: str = "standard"

    def rule(self, rule_id: str) -> Optional[BridgeRule]:
        for r in self.rules:
            if r.id == rule_id:
                return r
        return None


@dataclass
class System:
    contexts: Dict[str, Context]
    directory: Optional[Directory] = None
    reach: Reachability = Reachability()
    config: Config = Config()
    management: Dict[str, ManagementFunction] = field(default_factory=lambda: dict(MANAGEMENT))
    updates: Dict[str, UpdateFunction] = field(default_factory=lambda: dict(UPDATES))
    logics: Dict[str, Logic] = field(default_factory=dict)

    def __post_init__(self):
        if self.directory is None:
            self.directory = Directory(frozenset(self.contexts))
        for name, ctx in self.contexts.items():
            if ctx.logic not in self.logics:
                if ctx.logic not in LOGICS:
                    raise ValidationError([f"context {name}: unknown logic {ctx.logic!r}"])
                self.logics[ctx.logic] = LOGICS[ctx.logic](self.config.depth_bound)

    def logic(self, name: str) -> Logic:
        return self.logics[self.contexts[name].logic]

    def validate(self) -> List[str]:
        problems = []
        for name, ctx in self.contexts.items():
            if ctx.mng not in self.management:
                problems.append(f"context {name}: unknown management function {ctx.mng!r}")
            if ctx.update not in self.updates:
                problems.append(f"context {name}: unknown update function {ctx.update!r}")
            ids = [r.id for r in ctx.rules] + [p.id for p in ctx.patterns]
            for dup in sorted({i for i in ids if ids.count(i) > 1}):
                problems.append(f"context {name}: duplicate rule id {dup}")
            everything = list(ctx.rules) + list(ctx.patterns)
            for r in everything:
                others = [o for o in everything if o is not r]
                problems.extend(f"context {name}: {v}" for v in validate_rule(r, ctx.kb, others))
                for l in r.body:
                    c = l.context(name)
                    if c is not None and c not in self.contexts:
                        problems.append(f"context {name}: rule {r.id} queries unknown context {c}")
            for rid in ctx.triggers:
                if rid not in ids:
                    problems.append(f"context {name}: trigger for unknown rule {rid}")
        for role, names in self.directory.roles.items():
            for n in names:
                if n not in self.contexts:
                    problems.append(f"directory role {role}: unknown context {n}")
        if self.reach.pairs is not None:
            for a, b in self.reach.pairs:
                for n in (a, b):
                    if n not in self.contexts:
                        problems.append(f"reach {a} -> {b}: unknown context {n}")
        return problems


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str
    ctx: str
    detail: str

    def line(self) -> str:
        return f"tick={self.tick} event={self.kind} ctx={self.ctx} detail={self.detail}"

    def as_dict(self) -> Dict[str, object]:
        return {"tick": self.tick, "event": self.kind, "ctx": self.ctx, "detail": self.detail}


Grtr = Optional[Mapping[str, FrozenSet[TriggerRecord]]]


@dataclass(frozen=True)
class SystemState:
    system: System = field(compare=False, repr=False)
    T: int
    contexts: Mapping[str, Context]
    dir: Directory
    reach: Reachability
    beliefs: Mapping[str, BeliefSet]
    grtr: Grtr
    events: Tuple[Event, ...] = field(default=(), compare=False)

    def kb(self, name: str) -> KnowledgeBase:
        return self.contexts[name].kb

    def visible_beliefs(self) -> Dict[str, BeliefSet]:
        """Belief sets of contexts currently participating (per the directory)."""
        return {n: b for n, b in self.beliefs.items() if self.dir.is_member(n)}


# -- helpers ---------------------------------------------------------------

def _beliefs(system: System, contexts: Mapping[str, Context]) -> Dict[str, BeliefSet]:
    return {n: system.logic(n).acc_select(c.kb) for n, c in contexts.items()}


def pregrounded_rules(state: SystemState, notes: Optional[List[Event]] = None) -> Dict[str, List[BridgeRule]]:
    out = {}
    for name, ctx in state.contexts.items():
        rules = []
        for r in ctx.rules:
            versions = preground(r, state.dir, ctx.prefs, name)
            if not versions and notes is not None:
                notes.append(Event(state.T, "role_unresolved", name,
                                   f"{r.id} {','.join(unresolved_roles(r, state.dir, name))}"))
            rules.extend(versions)
        out[name] = rules
    return out


def app(state: SystemState, beliefs: Optional[Mapping[str, BeliefSet]] = None,
        notes: Optional[List[Event]] = None) -> Dict[str, FrozenSet[OpStatement]]:
    """Applicable heads per destination context in ``state``."""
    if beliefs is None:
        beliefs = state.visible_beliefs()
    return applicable_heads(pregrounded_rules(state, notes), beliefs, state.grtr, state.reach)


def _manage(system: System, ctx: Context, stmts: Iterable[OpStatement], kb: KnowledgeBase) -> KnowledgeBase:
    stmts = list(stmts)
    if not stmts:
        return kb
    return system.management[ctx.mng](stmts, kb)


def _new_records(state_T: int, contexts: Mapping[str, Context], beliefs: Mapping[str, BeliefSet],
                 grtr: Mapping[str, FrozenSet[TriggerRecord]]) -> Dict[str, List[TriggerRecord]]:
    fresh: Dict[str, List[TriggerRecord]] = {}
    for name, ctx in contexts.items():
        known = {(r.rule_id, r.head) for r in grtr.get(name, ())}
        heads = triggered_heads(ctx.rules, ctx.triggers, beliefs[name])
        fresh[name] = [TriggerRecord(rid, h, state_T) for rid, h in sorted(heads, key=str)
                       if (rid, h) not in known]
    return fresh


def _accumulate(grtr, fresh) -> Dict[str, FrozenSet[TriggerRecord]]:
    return {n: frozenset(grtr.get(n, frozenset()) | set(fresh.get(n, ()))) for n in set(grtr) | set(fresh)}


# -- initial state and grounded equilibria ---------------------------------

def initial_state(system: System, reactive: bool = False) -> SystemState:
    """State at T=0.  ``reactive=True`` disables trigger bookkeeping."""
    problems = system.validate()
    if problems:
        raise ValidationError(problems)
    contexts = dict(system.contexts)
    beliefs = _beliefs(system, contexts)
    grtr: Grtr = None
    events: List[Event] = []
    if not reactive:
        fresh = _new_records(0, contexts, beliefs, {})
        grtr = _accumulate({}, fresh)
        events.extend(Event(0, "trigger", n, f"{r.rule_id} {r.head}") for n in sorted(fresh) for r in fresh[n])
    return SystemState(system, 0, contexts, system.directory, system.reach, beliefs, grtr, tuple(events))


def _round_heads(state: SystemState, memo: Dict) -> Dict[str, Set[OpStatement]]:
    """Applicable heads of a reactive state, reusing rules whose sources did not change."""
    beliefs = state.visible_beliefs()
    fresh: Dict = {}
    out: Dict[str, Set[OpStatement]] = {}
    for owner, rs in pregrounded_rules(state).items():
        heads = out.setdefault(owner, set())
        for r in rs:
            sources = sorted({l.context(owner) for l in r.body if not l.builtin})
            key = (owner, r, tuple(beliefs.get(n) for n in sources))
            found = memo.get(key)
            if found is None:
                found = applicable_heads({owner: [r]}, beliefs, None, state.reach)[owner]
            fresh[key] = found
            heads |= found
    memo.clear()
    memo.update(fresh)
    return out


def _apply_round(state: SystemState, memo: Optional[Dict] = None) -> SystemState:
    heads = app(state) if memo is None else _round_heads(state, memo)
    contexts = {}
    beliefs = {}
    for name, ctx in state.contexts.items():
        kb = _manage(state.system, ctx, heads.get(name, ()), ctx.kb)
        contexts[name] = replace(ctx, kb=kb)
        if kb == ctx.kb:
            beliefs[name] = state.beliefs[name]
        else:
            beliefs[name] = state.system.logic(name).acc_select(kb)
    return replace(state, T=state.T + 1, contexts=contexts, beliefs=beliefs, events=())


def iterate_data_states(system: System) -> Iterator[SystemState]:
    """Data states of grade 0, 1, 2, ... under simultaneous rule application."""
    state = initial_state(system, reactive=True)
    memo: Dict = {}
    yield state
    while True:
        state = _apply_round(state, memo)
        yield state


class EquilibriumResult(NamedTuple):
    state: SystemState
    steps: int
    reached_fixpoint: bool


def _same_kbs(a: SystemState, b: SystemState) -> bool:
    return all(a.contexts[n].kb == b.contexts[n].kb for n in a.contexts)


def grounded_equilibrium(system: System, kappa: Optional[int] = None) -> EquilibriumResult:
    """Iterate simultaneous bridge-rule application up to ``kappa`` rounds.

    ``kappa=None`` asks for grade infinity, bounded by ``system.config.cap``.
    Stops early once a round leaves every knowledge base unchanged.
    """
    if kappa is None:
        nonmono = sorted(n for n, c in system.contexts.items()
                         if not getattr(system.management[c.mng], "monotonic", False))
        if nonmono:
            log.warning("unbounded grade requested with non-monotonic management in %s", ", ".join(nonmono))
        limit = system.config.cap
    else:
        if kappa < 1:
            raise ValueError("grade must be positive")
        limit = kappa
    it = iterate_data_states(system)
    state = next(it)
    steps = 0
    while steps < limit:
        nxt = next(it)
        steps += 1
        if _same_kbs(state, nxt):
            return EquilibriumResult(state, steps, True)
        state = nxt
    return EquilibriumResult(state, steps, is_equilibrium(state))


def is_equilibrium(state: SystemState) -> bool:
    """Every belief set equals the selected consequence of managing its own app set."""
    heads = app(state)
    system = state.system
    for name, ctx in state.contexts.items():
        kb = _manage(system, ctx, heads.get(name, ()), ctx.kb)
        if system.logic(name).acc_select(kb) != state.beliefs[name]:
            return False
    return True


def is_timed_equilibrium(state: SystemState) -> bool:
    return is_equilibrium(state)


# -- timed stepping --------------------------------------------------------

def step_seed(seed: int, T: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{T}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _names(a: ElementaryAction) -> List[str]:
    return [p.pred for p in a.payload]


def apply_directory_action(directory: Directory, reach: Reachability, a: ElementaryAction,
                           known: Iterable[str]) -> Tuple[Directory, Reachability]:
    known = set(known)
    names = _names(a)
    arity = {"dir_register": 2, "dir_deregister": 2, "dir_join": 1, "dir_leave": 1,
             "reach_add": 2, "reach_remove": 2}[a.name]
    if len(names) != arity:
        raise ValueError(f"{a.name} expects {arity} arguments, got {len(names)}")
    ctx_args = names[1:] if a.name.startswith("dir_register") or a.name == "dir_deregister" else names
    for n in ctx_args:
        if n not in known:
            raise ValueError(f"{a.name}: unknown context {n}")
    if a.name == "dir_register":
        directory = directory.register(*names)
    elif a.name == "dir_deregister":
        directory = directory.deregister(*names)
    elif a.name == "dir_join":
        directory = directory.join(names[0])
    elif a.name == "dir_leave":
        directory = directory.leave(names[0])
    elif a.name == "reach_add":
        reach = reach.add(*names)
    else:
        reach = reach.remove(*names)
    return directory, reach


def split_actions(state: SystemState, actions: Mapping[str, Iterable[ElementaryAction]]):
    """Separate context updates from directory/reach actions; check declarations."""
    updates: Dict[str, List[ElementaryAction]] = {}
    system_actions: List[ElementaryAction] = []
    for name in sorted(actions):
        acts = sorted(actions[name], key=str)
        if name != SYSTEM and name not in state.contexts:
            raise StepError(name, "unknown context")
        for a in acts:
            if a.name in DIRECTORY_ACTIONS:
                system_actions.append(a)
            elif name == SYSTEM:
                raise StepError(name, f"action {a.name} is not a directory action")
            elif a.name not in state.contexts[name].actions:
                raise StepError(name, f"undeclared action {a.name}")
            else:
                updates.setdefault(name, []).append(a)
    return updates, system_actions


def step(state: SystemState, actions: Optional[Mapping[str, Iterable[ElementaryAction]]] = None,
         seed: int = 0) -> SystemState:
    """Advance one time point: update, apply bridge rules checked at T, grow rules."""
    if state.grtr is None:
        raise ValueError("step needs a timed state (initial_state with reactive=False)")
    system = state.system
    actions = actions or {}
    T = state.T
    updates, system_actions = split_actions(state, actions)
    events: List[Event] = []

    heads = app(state, notes=events)
    contexts: Dict[str, Context] = {}
    for name, ctx in state.contexts.items():
        kb = ctx.kb
        acts = updates.get(name, [])
        if acts:
            try:
                kb = apply_update(system.updates[ctx.update], kb, acts, step_seed(seed, T, name))
            except (ValueError, RuntimeError) as exc:
                raise StepError(name, str(exc)) from exc
            events.append(Event(T + 1, "update", name, " ".join(map(str, acts))))
        stmts = sorted(heads.get(name, ()), key=str)
        try:
            kb = _manage(system, ctx, stmts, kb)
        except (ValueError, RuntimeError) as exc:
            raise StepError(name, str(exc)) from exc
        for st in stmts:
            events.append(Event(T + 1, "apply", name, str(st)))
        known_ids = {r.id for r in ctx.rules}
        grown = [r for r in instantiate_patterns(ctx.patterns, state.beliefs[name], T, system.contexts,
                                                 warn=lambda m, n=name: events.append(Event(T + 1, "warning", n, m)))
                 if r.id not in known_ids]
        for r in grown:
            events.append(Event(T + 1, "instance", name, str(r)))
        contexts[name] = replace(ctx, kb=kb, rules=ctx.rules + tuple(grown))

    directory, reach = state.dir, state.reach
    for a in system_actions:
        try:
            directory, reach = apply_directory_action(directory, reach, a, system.contexts)
        except ValueError as exc:
            raise StepError(SYSTEM, str(exc)) from exc
        events.append(Event(T + 1, "directory", SYSTEM, str(a)))

    beliefs = _beliefs(system, contexts)
    fresh = _new_records(T + 1, contexts, beliefs, state.grtr)
    for name in sorted(fresh):
        events.extend(Event(T + 1, "trigger", name, f"{r.rule_id} {r.head}") for r in fresh[name])
    return SystemState(system, T + 1, contexts, directory, reach, beliefs,
                       _accumulate(state.grtr, fresh), tuple(events))


# -- rendering -------------------------------------------------------------

def dump(state: SystemState) -> str:
    """Canonical text of a state: sorted contexts, sorted atoms."""
    lines = [f"T={state.T}"]
    for name in sorted(state.contexts):
        ctx = state.contexts[name]
        b = state.beliefs[name]
        lines.append(f"context {name}")
        lines.append(f"  kb {{{', '.join(sorted(map(str, ctx.kb.facts)))}}}")
        lines.append(f"  beliefs {{{', '.join(map(str, b.sorted()))}}}" + (" truncated" if b.truncated else ""))
        for r in sorted(ctx.rules, key=lambda r: r.id):
            lines.append(f"  rule {r}")
        if state.grtr is not None:
            for rec in sorted(state.grtr.get(name, ()), key=lambda r: (r.rule_id, str(r.head), r.since)):
                lines.append(f"  triggered {rec.rule_id} {rec.head} since {rec.since}")
    lines.extend(state.dir.describe())
    lines.extend(state.reach.describe())
    return "\n".join(lines) + "\n"


def digest(state: SystemState) -> str:
    return hashlib.sha256(dump(state).encode()).hexdigest()[:16]
