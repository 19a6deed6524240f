"""Context logics, knowledge bases, management and update functions."""
from __future__ import annotations

import hashlib
import random
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from typing import (Callable, Dict, FrozenSet, Iterable, Iterator, List,
                    NamedTuple, Optional, Sequence, Tuple)

from .terms import Atom, Const, Subst, apply_subst, as_int, match, unify, variables

DEFAULT_DEPTH_BOUND = 16

BUILTINS = frozenset({"<", "<=", "=<", ">", ">=", "=", "\\="})


class GroundingError(ValueError):
    """A statement handed to a management function still has variables."""


class ConfigurationError(ValueError):
    pass


class ManagementError(ValueError):
    pass


class UpdateContractError(RuntimeError):
    """An update function returned no candidate knowledge base."""


def is_builtin(atom: Atom) -> bool:
    return atom.pred in BUILTINS and atom.arity == 2


def eval_builtin(atom: Atom, s: Subst) -> Iterator[Subst]:
    """Evaluate a comparison under ``s``.  Non-ground comparisons fail."""
    left, right = (apply_subst(a, s) for a in atom.args)
    op = atom.pred
    if op == "=":
        out = unify(left, right, s)
        if out is not None:
            yield out
        return
    if not (left.ground and right.ground):
        return
    if op == "\\=":
        if left is not right:
            yield s
        return
    a, b = as_int(left), as_int(right)
    if a is None or b is None:
        return
    ok = {"<": a < b, "<=": a <= b, "=<": a <= b, ">": a > b, ">=": a >= b}[op]
    if ok:
        yield s


@dataclass(frozen=True)
class DefiniteRule:
    head: Atom
    body: Tuple[Atom, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} <- {', '.join(str(g) for g in self.body)}."

    def range_restricted(self) -> bool:
        bound = set()
        for g in self.body:
            bound.update(variables(g))
        return set(variables(self.head)) <= bound


@dataclass(frozen=True)
class KnowledgeBase:
    facts: FrozenSet[Atom] = frozenset()
    rules: Tuple[DefiniteRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))
        object.__setattr__(self, "rules", tuple(self.rules))
        for f in self.facts:
            if not f.ground:
                raise GroundingError(f"knowledge-base fact {f} is not ground")
        for r in self.rules:
            if not r.range_restricted():
                raise ConfigurationError(f"rule {r} is not range-restricted")

    def with_facts(self, add: Iterable[Atom] = (), remove: Iterable[Atom] = ()) -> "KnowledgeBase":
        add = frozenset(add)
        remove = frozenset(remove)
        facts = (self.facts - remove) | add
        if facts == self.facts:
            return self
        return KnowledgeBase(facts, self.rules)

    def digest(self) -> str:
        text = "\n".join(sorted(map(str, self.facts))) + "\n--\n" + "\n".join(map(str, self.rules))
        return hashlib.sha256(text.encode()).hexdigest()


class _Index:
    __slots__ = ("by_key",)

    def __init__(self, atoms: Iterable[Atom] = ()):
        self.by_key: Dict[Tuple[str, int], list] = defaultdict(list)
        for a in atoms:
            self.by_key[a.key].append(a)

    def add(self, a: Atom) -> None:
        self.by_key[a.key].append(a)

    def candidates(self, goal: Atom) -> Sequence[Atom]:
        return self.by_key.get(goal.key, ())


@dataclass(frozen=True)
class BeliefSet:
    atoms: FrozenSet[Atom] = frozenset()
    truncated: bool = False
    _index: Optional[_Index] = field(default=None, compare=False, repr=False, hash=False)
    _sorted: Optional[Dict] = field(default=None, compare=False, repr=False, hash=False)

    def __contains__(self, a: Atom) -> bool:
        return a in self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def candidates(self, goal: Atom) -> Sequence[Atom]:
        if self._index is None:
            object.__setattr__(self, "_index", _Index(self.atoms))
        return self._index.candidates(goal)

    def sorted_candidates(self, goal: Atom) -> List[Atom]:
        """Candidates in canonical text order; used where the first answer matters."""
        if self._sorted is None:
            object.__setattr__(self, "_sorted", {})
        out = self._sorted.get(goal.key)
        if out is None:
            out = sorted(self.candidates(goal), key=str)
            self._sorted[goal.key] = out
        return out

    def entails(self, a: Atom) -> bool:
        return a in self.atoms

    def sorted(self) -> List[Atom]:
        return sorted(self.atoms, key=str)


def solve(goals: Sequence[Atom], lookup: Callable[[Atom], Iterable[Atom]],
          s: Optional[Subst] = None) -> Iterator[Subst]:
    """Left-to-right conjunctive query over ground facts, builtins inline."""
    s = {} if s is None else s
    if not goals:
        yield s
        return
    goal, rest = goals[0], goals[1:]
    if is_builtin(goal):
        for s2 in eval_builtin(goal, s):
            yield from solve(rest, lookup, s2)
        return
    for fact in lookup(goal):
        s2 = match(goal, fact, s)
        if s2 is not None:
            yield from solve(rest, lookup, s2)


def acc_definite(kb: KnowledgeBase, depth_bound: int = DEFAULT_DEPTH_BOUND) -> BeliefSet:
    """Least model of a definite program, cut at a term depth bound.

    Rule consequences deeper than ``depth_bound`` are dropped and flag the
    result as truncated.  Facts stated in the knowledge base are always kept.
    """
    if depth_bound < 1:
        raise ValueError("depth_bound must be positive")
    model = set(kb.facts)
    index = _Index(model)
    truncated = False
    delta = set(model)
    first = True
    while delta or first:
        delta_index = _Index(delta)
        new = set()
        for rule in kb.rules:
            for s in _fire(rule, index, delta_index, first):
                head = apply_subst(rule.head, s)
                if not head.ground or head in model or head in new:
                    continue
                if head.depth > depth_bound:
                    truncated = True
                    continue
                new.add(head)
        first = False
        for a in new:
            index.add(a)
        model |= new
        delta = new
    return BeliefSet(frozenset(model), truncated)


def _fire(rule: DefiniteRule, full: _Index, delta: _Index, first: bool) -> Iterator[Subst]:
    positions = [i for i, g in enumerate(rule.body) if not is_builtin(g)]
    if not positions:
        if first:
            yield from solve(rule.body, full.candidates)
        return
    # semi-naive: at least one body atom comes from the last round's delta
    for pos in positions:
        yield from _solve_at(rule.body, pos, full, delta)


def _solve_at(body, pos, full: _Index, delta: _Index, s=None, i=0) -> Iterator[Subst]:
    s = {} if s is None else s
    if i == len(body):
        yield s
        return
    goal = body[i]
    if is_builtin(goal):
        for s2 in eval_builtin(goal, s):
            yield from _solve_at(body, pos, full, delta, s2, i + 1)
        return
    source = delta if i == pos else full
    for fact in source.candidates(goal):
        s2 = match(goal, fact, s)
        if s2 is not None:
            yield from _solve_at(body, pos, full, delta, s2, i + 1)


class Logic(ABC):
    """A context logic: knowledge bases, belief sets and acceptability."""

    name: str = "abstract"
    is_monotonic: bool = False

    @abstractmethod
    def wff_check(self, formula) -> bool: ...

    @abstractmethod
    def acc(self, kb: KnowledgeBase) -> List[BeliefSet]: ...

    def acc_select(self, kb: KnowledgeBase) -> BeliefSet:
        """Deterministically choose one acceptable belief set.

        Plug-in logics with several acceptable sets must override this.
        """
        options = self.acc(kb)
        if len(options) != 1:
            raise NotImplementedError(f"{self.name}: acc_select must be overridden for multi-valued ACC")
        return options[0]


class DefiniteLogic(Logic):
    name = "definite"
    is_monotonic = True

    def __init__(self, depth_bound: int = DEFAULT_DEPTH_BOUND):
        self.depth_bound = depth_bound
        self._cache: Dict[KnowledgeBase, BeliefSet] = {}

    def wff_check(self, formula) -> bool:
        if isinstance(formula, Atom):
            return formula.ground and not is_builtin(formula)
        if isinstance(formula, DefiniteRule):
            return formula.range_restricted()
        return False

    def acc(self, kb: KnowledgeBase) -> List[BeliefSet]:
        return [self.acc_select(kb)]

    def acc_select(self, kb: KnowledgeBase) -> BeliefSet:
        hit = self._cache.get(kb)
        if hit is None:
            hit = acc_definite(kb, self.depth_bound)
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[kb] = hit
        return hit


LOGICS: Dict[str, Callable[..., Logic]] = {"definite": DefiniteLogic}


# -- management ------------------------------------------------------------

class OpStatement(NamedTuple):
    op: str
    atom: Atom

    def __str__(self) -> str:
        return f"{self.op}({self.atom})"


ManagementFunction = Callable[[Iterable[OpStatement], KnowledgeBase], KnowledgeBase]


def _check_stmts(stmts: Iterable[OpStatement], allowed: FrozenSet[str]) -> List[OpStatement]:
    stmts = list(stmts)
    for st in stmts:
        if st.op not in allowed:
            raise ManagementError(f"operation {st.op!r} not handled (expects {sorted(allowed)})")
        if not st.atom.ground:
            raise GroundingError(f"operational statement {st} is not ground")
    return stmts


def mng_add(stmts: Iterable[OpStatement], kb: KnowledgeBase) -> KnowledgeBase:
    """Add every statement's atom to the facts."""
    stmts = _check_stmts(stmts, mng_add.ops)
    return kb.with_facts(add=(st.atom for st in stmts))


mng_add.ops = frozenset({"add"})
mng_add.monotonic = True


def _counter(kb: KnowledgeBase) -> Tuple[Atom, int]:
    counts = [f for f in kb.facts if f.pred == "count" and f.arity == 1]
    if len(counts) != 1:
        raise ConfigurationError(f"expected exactly one count/1 fact, found {len(counts)}")
    value = as_int(counts[0].args[0])
    if value is None:
        raise ConfigurationError(f"counter {counts[0]} is not an integer")
    return counts[0], value


def mng_threshold_new(stmts: Iterable[OpStatement], kb: KnowledgeBase) -> KnowledgeBase:
    """Assert new atoms, bumping ``count/1`` once per atom not already present."""
    stmts = _check_stmts(stmts, mng_threshold_new.ops)
    old, value = _counter(kb)
    fresh = {st.atom for st in stmts} - kb.facts
    if not fresh:
        return kb
    bumped = Atom("count", (Const(value + len(fresh)),))
    return kb.with_facts(add=fresh | {bumped}, remove={old})


mng_threshold_new.ops = frozenset({"new"})
mng_threshold_new.monotonic = False

MANAGEMENT: Dict[str, ManagementFunction] = {
    "add": mng_add,
    "threshold_new": mng_threshold_new,
}


# -- updates ---------------------------------------------------------------

OBSERVATION = "observation"
GENERIC = "generic"


class ElementaryAction(NamedTuple):
    name: str
    payload: Tuple[Atom, ...] = ()
    kind: str = GENERIC

    def __str__(self) -> str:
        return f"{self.name}({','.join(str(a) for a in self.payload)})"


CompoundAction = FrozenSet[ElementaryAction]
UpdateFunction = Callable[[KnowledgeBase, CompoundAction], Iterable[KnowledgeBase]]

BUILTIN_ACTIONS = frozenset({"assert", "retract", "observe"})


def action(name: str, *payload: Atom) -> ElementaryAction:
    kind = OBSERVATION if name == "observe" else GENERIC
    return ElementaryAction(name, tuple(payload), kind)


def standard_update(kb: KnowledgeBase, act: CompoundAction) -> List[KnowledgeBase]:
    """Apply retract, then observe, then assert.

    ``observe(p(...))`` models a sensor reading: it replaces every fact with
    the same predicate and arity.
    """
    remove, add = set(), set()
    for a in act:
        if a.name not in BUILTIN_ACTIONS:
            raise ManagementError(f"standard update cannot apply action {a.name!r}")
        for atom in a.payload:
            if not atom.ground:
                raise GroundingError(f"action payload {atom} is not ground")
    for a in act:
        if a.name == "retract":
            remove.update(a.payload)
    facts = set(kb.facts) - remove
    observed = {p.key for a in act if a.name == "observe" for p in a.payload}
    facts = {f for f in facts if f.key not in observed}
    for a in act:
        if a.name in ("observe", "assert"):
            add.update(a.payload)
    facts |= add
    return [KnowledgeBase(frozenset(facts), kb.rules)]


def identity_update(kb: KnowledgeBase, act: CompoundAction) -> List[KnowledgeBase]:
    return [kb]


UPDATES: Dict[str, UpdateFunction] = {
    "standard": standard_update,
    "identity": identity_update,
}


def apply_update(u: UpdateFunction, kb: KnowledgeBase, act: Iterable[ElementaryAction],
                 choice_seed: int = 0) -> KnowledgeBase:
    """Apply an update function and pick one result deterministically."""
    results = list(u(kb, frozenset(act)))
    if not results:
        raise UpdateContractError(f"update function {getattr(u, '__name__', u)!r} returned no knowledge base")
    if len(results) == 1:
        return results[0]
    results.sort(key=KnowledgeBase.digest)
    return results[random.Random(choice_seed).randrange(len(results))]
