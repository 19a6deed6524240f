"""Asynchronous bridge-rule execution over integer ticks.

A :class:`Simulator` owns a mutable copy of a timed system state and advances
it one tick at a time.  Triggered rules run as small state machines that
query one body literal per hop, each hop costing the latency reported by a
:class:`DelayModel`.  With persistence on, every literal that succeeds pins
the membership of its atom in the source context until the rule completes;
updates that would flip a pinned atom wait in a per-context queue.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

from .bridge import (BodyLiteral, BridgeRule, DirQuery, applicable_heads, body_holds,
                     instantiate_patterns, potential_grade, preground, unresolved_roles)
from .directory import Directory, Reachability
from .logic import BeliefSet, ElementaryAction, KnowledgeBase, OpStatement, apply_update, eval_builtin
from .system import (SYSTEM, Context, Event, StepError, System, SystemState, _accumulate,
                     _new_records, apply_directory_action, initial_state, is_timed_equilibrium,
                     split_actions, step, step_seed)
from .terms import Atom, Subst, apply_subst, match, unify

# -- delays ----------------------------------------------------------------


class DelayModel:
    """Latency in ticks for a query from ``querier`` to ``source``."""

    def latency(self, source: str, querier: str, tick: int, key: str) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantDelay(DelayModel):
    ticks: int = 1

    def latency(self, source, querier, tick, key):
        return self.ticks


@dataclass(frozen=True)
class TableDelay(DelayModel):
    table: Mapping[str, int] = field(default_factory=dict)  # keyed by source context
    default: int = 1

    def latency(self, source, querier, tick, key):
        return self.table.get(source, self.default)


@dataclass(frozen=True)
class RandomDelay(DelayModel):
    low: int = 0
    high: int = 3
    seed: int = 0

    def latency(self, source, querier, tick, key):
        rng = random.Random(f"{self.seed}/{source}/{querier}/{tick}/{key}")
        return rng.randint(self.low, self.high)


# -- records ---------------------------------------------------------------

SUCCESSFUL = "successful"
FAILED = "failed"


@dataclass(frozen=True)
class LiteralRecord:
    literal: BodyLiteral
    tick: int
    ok: bool
    reason: str = ""

    def __str__(self) -> str:
        text = f"{self.literal}[{self.tick}]"
        return text if self.ok else f"{text}!{self.reason}"


@dataclass(frozen=True)
class RuntimeVersion:
    exec_id: str
    owner: str
    rule: BridgeRule
    start: int
    records: Tuple[LiteralRecord, ...]
    status: str
    head: Optional[Atom] = None
    completed: Optional[int] = None
    failed_at: Optional[int] = None
    reason: str = ""
    persistence: bool = True

    @property
    def rule_id(self) -> str:
        return self.rule.id

    @property
    def successful(self) -> bool:
        return self.status == SUCCESSFUL

    @property
    def timestamps(self) -> List[int]:
        out = [r.tick for r in self.records]
        if self.completed is not None:
            out.append(self.completed)
        return out

    def ground_rule(self) -> BridgeRule:
        body = tuple(r.literal for r in self.records)
        return replace(self.rule, head_atom=self.head, body=body)

    def __str__(self) -> str:
        body = ", ".join(map(str, self.records))
        if self.successful:
            head = f"{self.head}[{self.completed}]"
        else:
            head = f"{self.rule.head_atom}[failed:{self.failed_at}:{self.reason}]"
        return f"{head} <- {body}" if body else head


@dataclass(frozen=True)
class Lease:
    ctx: str
    atom: Atom
    holder: str
    since: int


@dataclass(frozen=True)
class Snapshot:
    beliefs: Mapping[str, BeliefSet]
    reach: Reachability
    grtr: Mapping[str, frozenset]


@dataclass
class TickEntry:
    tick: int
    actions: Dict[str, List[ElementaryAction]] = field(default_factory=dict)
    execs: List[Tuple[str, str]] = field(default_factory=list)


@dataclass
class Scenario:
    ticks: List[TickEntry] = field(default_factory=list)

    def at(self, tick: int) -> Optional[TickEntry]:
        for t in self.ticks:
            if t.tick == tick:
                return t
        return None

    @property
    def last_tick(self) -> int:
        return max((t.tick for t in self.ticks), default=0)


@dataclass
class _Exec:
    exec_id: str
    owner: str
    variants: List[BridgeRule]
    init: Subst
    start: int
    variant: int = 0
    idx: int = 0
    subst: Subst = field(default_factory=dict)
    due: int = 0
    hop_start: int = 0
    timeout: bool = False
    records: List[LiteralRecord] = field(default_factory=list)

    @property
    def rule(self) -> BridgeRule:
        return self.variants[self.variant]


@dataclass
class ScenarioResult:
    state: SystemState
    versions: List[RuntimeVersion]
    events: List[Event]
    snapshots: Dict[int, Snapshot]

    def log_lines(self) -> List[str]:
        return [e.line() for e in self.events]


# -- simulator -------------------------------------------------------------

class Simulator:
    def __init__(self, state: SystemState, delays: Optional[DelayModel] = None,
                 persistence: bool = True, seed: int = 0):
        if state.grtr is None:
            raise ValueError("simulator needs a timed state")
        self.system: System = state.system
        self.now = state.T
        self.contexts: Dict[str, Context] = dict(state.contexts)
        self.dir: Directory = state.dir
        self.reach: Reachability = state.reach
        self.beliefs: Dict[str, BeliefSet] = dict(state.beliefs)
        self.grtr: Dict[str, frozenset] = dict(state.grtr)
        self.delays = delays or ConstantDelay(self.system.config.latency)
        self.persistence = persistence
        self.seed = seed
        self.events: List[Event] = []
        self.versions: List[RuntimeVersion] = []
        self.running: List[_Exec] = []
        self.leases: List[Lease] = []
        self.deferred: Dict[str, List[Tuple[str, object]]] = {}
        self.snapshots: Dict[int, Snapshot] = {}
        self._serial = 0
        self._pending_records = {n: sorted(recs, key=lambda r: (r.rule_id, str(r.head)))
                                 for n, recs in state.grtr.items()}

    # -- state views

    def state(self) -> SystemState:
        return SystemState(self.system, self.now, dict(self.contexts), self.dir, self.reach,
                           dict(self.beliefs), dict(self.grtr), tuple(self.events))

    def visible(self) -> Dict[str, BeliefSet]:
        return {n: b for n, b in self.beliefs.items() if self.dir.is_member(n)}

    def emit(self, kind: str, ctx: str, detail: str) -> None:
        self.events.append(Event(self.now, kind, ctx, detail))

    def _acc(self, name: str, kb: KnowledgeBase) -> BeliefSet:
        return self.system.logic(name).acc_select(kb)

    def _set_kb(self, name: str, kb: KnowledgeBase) -> None:
        self.contexts[name] = replace(self.contexts[name], kb=kb)
        self.beliefs[name] = self._acc(name, kb)

    # -- leases

    def _flips_lease(self, name: str, kb: KnowledgeBase) -> bool:
        pinned = [l for l in self.leases if l.ctx == name]
        if not pinned:
            return False
        new = self._acc(name, kb)
        old = self.beliefs[name]
        return any((l.atom in old) != (l.atom in new) for l in pinned)

    def _system_action_blocked(self, a: ElementaryAction) -> bool:
        names = [p.pred for p in a.payload]
        if a.name == "dir_leave":
            return any(l.ctx == names[0] for l in self.leases)
        if a.name == "reach_remove":
            holders = {e.exec_id for e in self.running if e.owner == names[0]}
            return any(l.ctx == names[1] and l.holder in holders for l in self.leases)
        return False

    def _try_item(self, name: str, kind: str, payload) -> bool:
        """Apply one queued item if no lease blocks it.  Returns False if blocked."""
        if kind == "system":
            if self._system_action_blocked(payload):
                return False
            try:
                self.dir, self.reach = apply_directory_action(self.dir, self.reach, payload, self.contexts)
            except ValueError as exc:
                raise StepError(SYSTEM, str(exc)) from exc
            self.emit("directory", SYSTEM, str(payload))
            return True
        ctx = self.contexts[name]
        if kind == "update":
            acts, seed = payload
            kb = apply_update(self.system.updates[ctx.update], ctx.kb, acts, seed)
            label = " ".join(map(str, acts))
        else:
            kb = self.system.management[ctx.mng]([payload], ctx.kb)
            label = str(payload)
        if self.persistence and self._flips_lease(name, kb):
            return False
        self._set_kb(name, kb)
        self.emit("update" if kind == "update" else "apply", name, label)
        return True

    def _submit(self, name: str, kind: str, payload) -> None:
        queue = self.deferred.setdefault(name, [])
        if not queue and self._try_item(name, kind, payload):
            return
        queue.append((kind, payload))
        label = " ".join(map(str, payload[0])) if kind == "update" else str(payload)
        self.emit("deferred", name, label)

    def _drain(self) -> None:
        for name in sorted(self.deferred):
            queue = self.deferred[name]
            while queue and self._try_item(name, *queue[0]):
                queue.pop(0)
        self.deferred = {n: q for n, q in self.deferred.items() if q}

    # -- launching

    def launch(self, owner: str, rule_id: str, init: Optional[Subst] = None) -> Optional[str]:
        ctx = self.contexts.get(owner)
        rule = ctx.rule(rule_id) if ctx else None
        if rule is None:
            raise StepError(owner, f"unknown rule {rule_id}")
        variants = preground(rule, self.dir, ctx.prefs, owner)
        if any(isinstance(l.source, DirQuery) for l in rule.body):
            slots = [i for i, l in enumerate(rule.body) if isinstance(l.source, DirQuery)]
            order = ["+".join(str(v.body[i].source) for i in slots) for v in variants]
            self.emit("preground", owner, f"{rule_id} [{','.join(order)}]")
        if not variants:
            self.emit("role_unresolved", owner, f"{rule_id} {','.join(unresolved_roles(rule, self.dir, owner))}")
            return None
        self._serial += 1
        ex = _Exec(f"e{self._serial}", owner, variants, dict(init or {}), self.now)
        self._reset(ex)
        self.running.append(ex)
        self.emit("launch", owner, f"{ex.exec_id} {rule_id} {apply_subst(rule.head_atom, ex.init)}")
        return ex.exec_id

    def _reset(self, ex: _Exec) -> None:
        ex.idx = 0
        ex.subst = dict(ex.init)
        ex.records = []
        ex.start = self.now
        self._schedule(ex)

    def _schedule(self, ex: _Exec) -> None:
        ex.hop_start = self.now
        latency = self._hop(ex)
        ex.timeout = latency > self.system.config.max_latency
        ex.due = self.now + (self.system.config.max_latency if ex.timeout else latency)

    def _hop(self, ex: _Exec) -> int:
        if ex.idx >= len(ex.rule.body):
            return 0
        l = ex.rule.body[ex.idx]
        src = l.context(ex.owner)
        if l.builtin or src == ex.owner:
            return 0
        return self.delays.latency(src, ex.owner, self.now, f"{ex.exec_id}/{ex.variant}/{ex.idx}")

    # -- advancing

    def _resolve(self, ex: _Exec, l: BodyLiteral, beliefs) -> Tuple[bool, str, Subst, Atom]:
        atom = apply_subst(l.atom, ex.subst)
        if l.builtin:
            s2 = next(eval_builtin(atom, ex.subst), None)
            ok = (s2 is not None) != l.negated
            return ok, "" if ok else "comparison", (s2 if (s2 is not None and not l.negated) else ex.subst), atom
        src = l.context(ex.owner)
        if src != ex.owner and not self.reach.allows(ex.owner, src):
            return False, "unreachable", ex.subst, atom
        belief = beliefs.get(src)
        if belief is None:
            return False, "absent", ex.subst, atom
        if l.negated:
            if not atom.ground:
                return False, "nonground-negative", ex.subst, atom
            ok = atom not in belief
            return ok, "" if ok else "negation", ex.subst, atom
        for fact in belief.sorted_candidates(atom):
            s2 = match(atom, fact, ex.subst)
            if s2 is not None:
                return True, "", s2, fact
        return False, "no-answer", ex.subst, atom

    def _advance(self, ex: _Exec, beliefs, completions: List[_Exec]) -> bool:
        """Run due hops; returns False once the execution is finished."""
        while ex.due <= self.now:
            if ex.idx >= len(ex.rule.body):
                completions.append(ex)
                return False
            l = ex.rule.body[ex.idx]
            if ex.timeout:
                ok, reason, s2, atom = False, "timeout", ex.subst, apply_subst(l.atom, ex.subst)
            else:
                ok, reason, s2, atom = self._resolve(ex, l, beliefs)
            rec = LiteralRecord(replace(l, atom=atom), self.now, ok, reason)
            ex.records.append(rec)
            if not ok:
                self._fail(ex, reason)
                return self._fallback(ex)
            ex.subst = s2
            if self.persistence and not l.builtin:
                self.leases.append(Lease(l.context(ex.owner), atom, ex.exec_id, self.now))
            self.emit("literal", ex.owner, f"{ex.exec_id} {rec}")
            ex.idx += 1
            self._schedule(ex)
        return True

    def _release(self, ex: _Exec) -> None:
        held = [l for l in self.leases if l.holder == ex.exec_id]
        if held:
            self.leases = [l for l in self.leases if l.holder != ex.exec_id]
            self.emit("release", ex.owner, f"{ex.exec_id} {len(held)}")

    def _fail(self, ex: _Exec, reason: str) -> None:
        rv = RuntimeVersion(ex.exec_id, ex.owner, ex.rule, ex.start, tuple(ex.records), FAILED,
                            failed_at=ex.idx, reason=reason, persistence=self.persistence)
        self.versions.append(rv)
        self.emit("fail", ex.owner, f"{ex.exec_id} {rv}")
        self._release(ex)

    def _fallback(self, ex: _Exec) -> bool:
        if ex.variant + 1 < len(ex.variants):
            ex.variant += 1
            self._reset(ex)
            self.emit("fallback", ex.owner, f"{ex.exec_id} {ex.rule}")
            return True
        return False

    def _complete(self, ex: _Exec, beliefs) -> None:
        head = apply_subst(ex.rule.head_atom, ex.subst)
        rv = RuntimeVersion(ex.exec_id, ex.owner, ex.rule, ex.start, tuple(ex.records), SUCCESSFUL,
                            head=head, completed=self.now, persistence=self.persistence)
        self.versions.append(rv)
        self.emit("complete", ex.owner, f"{ex.exec_id} {rv}")
        if not self.persistence and not body_holds(rv.ground_rule(), beliefs, ex.owner):
            self.emit("divergence", ex.owner, f"{ex.exec_id} body no longer holds at {self.now}")
        self._release(ex)
        self._submit(ex.owner, "mng", OpStatement(ex.rule.head_op, head))

    # -- tick

    def _triggers(self) -> None:
        fresh = _new_records(self.now, self.contexts, self.beliefs, self.grtr)
        self.grtr = _accumulate(self.grtr, fresh)
        for name in sorted(fresh):
            for rec in fresh[name]:
                self.emit("trigger", name, f"{rec.rule_id} {rec.head}")
            self._pending_records.setdefault(name, []).extend(fresh[name])

    def _instantiate(self) -> None:
        for name in sorted(self.contexts):
            ctx = self.contexts[name]
            if not ctx.patterns:
                continue
            known = {r.id for r in ctx.rules}
            grown = [r for r in instantiate_patterns(ctx.patterns, self.beliefs[name], self.now, self.contexts,
                                                     warn=lambda m, n=name: self.emit("warning", n, m))
                     if r.id not in known]
            if grown:
                self.contexts[name] = replace(ctx, rules=ctx.rules + tuple(grown))
                for r in grown:
                    self.emit("instance", name, str(r))

    def _launch_pending(self) -> None:
        pending, self._pending_records = self._pending_records, {}
        for name in sorted(pending):
            ctx = self.contexts[name]
            for rec in pending[name]:
                rule = ctx.rule(rec.rule_id)
                init = unify(rule.head_atom, rec.head) or {}
                self.launch(name, rec.rule_id, init)

    def tick(self, entry: Optional[TickEntry] = None) -> None:
        """Process the current tick ``self.now`` and then advance the clock."""
        if entry is not None:
            updates, system_actions = split_actions(self.state(), entry.actions)
            for name in sorted(updates):
                self._submit(name, "update", (updates[name], step_seed(self.seed, self.now, name)))
            for a in system_actions:
                self._submit(SYSTEM, "system", a)
        self._instantiate()
        self._triggers()
        self._launch_pending()
        if entry is not None:
            for owner, rule_id in entry.execs:
                self.launch(owner, rule_id)
        beliefs = self.visible()
        self.snapshots[self.now] = Snapshot(beliefs, self.reach, dict(self.grtr))
        completions: List[_Exec] = []
        self.running = [ex for ex in self.running if self._advance(ex, beliefs, completions)]
        for ex in completions:
            self._complete(ex, beliefs)
        self._drain()
        self.now += 1

    def busy(self) -> bool:
        return bool(self.running or self.deferred or self._pending_records)


def _check_script(system: System, script: Scenario) -> None:
    ticks = [t.tick for t in script.ticks]
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise ValueError("scenario ticks must be strictly increasing")
    for t in script.ticks:
        for name in t.actions:
            if name != SYSTEM and name not in system.contexts:
                raise ValueError(f"tick {t.tick}: unknown context {name}")
        for owner, rule_id in t.execs:
            if owner not in system.contexts:
                raise ValueError(f"tick {t.tick}: unknown context {owner}")
            ctx = system.contexts[owner]
            if ctx.rule(rule_id) is None and rule_id not in {p.id for p in ctx.patterns}:
                raise ValueError(f"tick {t.tick}: unknown rule {owner}.{rule_id}")


def run_scenario(system: System, script: Optional[Scenario] = None, delays: Optional[DelayModel] = None,
                 seed: int = 0, persistence: bool = True, mode: str = "async",
                 horizon: Optional[int] = None) -> ScenarioResult:
    """Run a scripted scenario and return final state, run-time versions and the event log.

    ``mode="sync"`` replaces asynchronous execution by one synchronous step per
    tick (script tick N supplies the actions producing the state at N) and logs
    each context's belief set and the equilibrium flag per tick.
    """
    script = script or Scenario()
    _check_script(system, script)
    if mode == "sync":
        return _run_sync(system, script, seed, horizon)
    if mode != "async":
        raise ValueError(f"unknown mode {mode!r}")
    start = initial_state(system)
    sim = Simulator(start, delays, persistence, seed)
    sim.events.extend(start.events)
    if not script.ticks and horizon is None:
        return ScenarioResult(sim.state(), [], [], {})
    last = script.last_tick if horizon is None else horizon
    drain_limit = last + 4 * system.config.max_latency + 16
    while sim.now <= last or (horizon is None and sim.busy() and sim.now <= drain_limit):
        sim.tick(script.at(sim.now))
    return ScenarioResult(sim.state(), sim.versions, sim.events, sim.snapshots)


def _belief_text(b: BeliefSet) -> str:
    return "{" + ", ".join(map(str, b.sorted())) + "}"


def _run_sync(system: System, script: Scenario, seed: int, horizon: Optional[int]) -> ScenarioResult:
    if script.at(0) is not None:
        raise ValueError("sync mode scenarios start at tick 1")
    state = initial_state(system)
    events: List[Event] = []
    snapshots = {0: Snapshot(dict(state.beliefs), state.reach, dict(state.grtr))}
    last = script.last_tick if horizon is None else horizon
    for T in range(1, last + 1):
        entry = script.at(T)
        state = step(state, entry.actions if entry else {}, seed)
        events.extend(state.events)
        for name in sorted(state.beliefs):
            events.append(Event(T, "beliefs", name, _belief_text(state.beliefs[name])))
        events.append(Event(T, "equilibrium", SYSTEM, str(is_timed_equilibrium(state)).lower()))
        snapshots[T] = Snapshot(dict(state.beliefs), state.reach, dict(state.grtr))
    return ScenarioResult(state, [], events, snapshots)


def execute_rule(state: SystemState, owner: str, rule_id: str, delays: Optional[DelayModel] = None,
                 persistence: bool = True, seed: int = 0, script: Optional[Scenario] = None,
                 max_ticks: int = 1000) -> RuntimeVersion:
    """Run one rule from ``state`` until its run-time version is final.

    ``script`` may interleave updates at absolute ticks.  Returns the last
    version produced for the launched execution (after any fallbacks).
    """
    sim = Simulator(state, delays, persistence, seed)
    sim._pending_records = {}
    exec_id = sim.launch(owner, rule_id)
    if exec_id is None:
        raise StepError(owner, f"rule {rule_id} has no pre-ground version")
    start = sim.now
    while sim.now <= start + max_ticks:
        sim.tick(script.at(sim.now) if script else None)
        mine = [v for v in sim.versions if v.exec_id == exec_id]
        if mine and not any(ex.exec_id == exec_id for ex in sim.running):
            return mine[-1]
    raise RuntimeError(f"rule {rule_id} did not finish within {max_ticks} ticks")


def theorem_violations(result: ScenarioResult) -> List[str]:
    """Successful persistent run-time versions whose head is not applicable at completion.

    Also reports non-monotone timestamps and literals whose prefix was no
    longer entailed at the tick they resolved.
    """
    out = []
    for rv in result.versions:
        ts = rv.timestamps
        if any(b < a for a, b in zip(ts, ts[1:])) or (ts and ts[0] < rv.start):
            out.append(f"{rv.exec_id}: timestamps not monotone {ts}")
        if not (rv.successful and rv.persistence):
            continue
        snap = result.snapshots[rv.completed]
        heads = applicable_heads({rv.owner: [rv.rule]}, snap.beliefs, {rv.owner: snap.grtr.get(rv.owner, ())},
                                 snap.reach)
        if OpStatement(rv.rule.head_op, rv.head) not in heads[rv.owner]:
            out.append(f"{rv.exec_id}: head {rv.head} not applicable at {rv.completed}")
        g = rv.ground_rule()
        positives = [r for r in rv.records if not r.literal.negated]
        for i, rec in enumerate(positives, 1):
            if potential_grade(g, result.snapshots[rec.tick].beliefs, rv.owner) < i:
                out.append(f"{rv.exec_id}: grade below {i} at {rec.tick}")
    return out
