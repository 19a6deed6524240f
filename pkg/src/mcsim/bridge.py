"""Bridge rules and patterns: validation, instantiation, grounding, triggering."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from typing import (Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping,
                    Optional, Sequence, Set, Tuple, Union)

from .directory import Directory, Reachability, select_preferred
from .logic import BeliefSet, KnowledgeBase, OpStatement, eval_builtin, is_builtin, solve
from .terms import Atom, Compound, Const, Subst, Term, apply_subst, match, variables

log = logging.getLogger(__name__)


# -- sources ---------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    ctx: str

    def __str__(self) -> str:
        return self.ctx


@dataclass(frozen=True)
class Designator:
    functor: str
    tag: str

    @property
    def term(self) -> Term:
        return Compound(self.functor, (Const(self.tag),))

    def __str__(self) -> str:
        return f"{self.functor}({self.tag})"


@dataclass(frozen=True)
class DirQuery:
    role: str

    def __str__(self) -> str:
        return f"{self.role}@Dir"


@dataclass(frozen=True)
class Local:
    def __str__(self) -> str:
        return ""


LOCAL = Local()
SourceRef = Union[Name, Designator, DirQuery, Local]


@dataclass(frozen=True)
class BodyLiteral:
    source: SourceRef
    atom: Atom
    negated: bool = False

    @property
    def builtin(self) -> bool:
        return is_builtin(self.atom)

    def context(self, owner: str) -> Optional[str]:
        if isinstance(self.source, Name):
            return self.source.ctx
        if isinstance(self.source, Local):
            return owner
        return None

    def __str__(self) -> str:
        core = str(self.atom) if isinstance(self.source, Local) else f"{self.source}:{self.atom}"
        return f"not {core}" if self.negated else core


@dataclass(frozen=True)
class Origin:
    kind: str = "static"
    pattern: Optional[str] = None
    time: Optional[int] = None

    def __str__(self) -> str:
        return self.kind if self.kind == "static" else f"instance({self.pattern},{self.time})"


STATIC = Origin()


@dataclass(frozen=True)
class BridgeRule:
    id: str
    head_op: str
    head_atom: Atom
    body: Tuple[BodyLiteral, ...] = ()
    origin: Origin = STATIC

    @property
    def head(self) -> OpStatement:
        return OpStatement(self.head_op, self.head_atom)

    @property
    def positives(self) -> Tuple[BodyLiteral, ...]:
        return tuple(l for l in self.body if not l.negated)

    @property
    def negatives(self) -> Tuple[BodyLiteral, ...]:
        return tuple(l for l in self.body if l.negated)

    @property
    def ground(self) -> bool:
        return self.head_atom.ground and all(l.atom.ground for l in self.body)

    @property
    def trigger_key(self) -> str:
        """Id whose trigger clause governs this rule (the pattern, for instances)."""
        return self.origin.pattern if self.origin.kind == "instance" else self.id

    def substitute(self, s: Subst) -> "BridgeRule":
        return replace(self, head_atom=apply_subst(self.head_atom, s),
                       body=tuple(replace(l, atom=apply_subst(l.atom, s)) for l in self.body))

    def with_sources(self, sources: Mapping[int, SourceRef], new_id: Optional[str] = None,
                     origin: Optional[Origin] = None, cls=None) -> "BridgeRule":
        body = tuple(replace(l, source=sources.get(i, l.source)) for i, l in enumerate(self.body))
        cls = cls or BridgeRule
        return cls(new_id or self.id, self.head_op, self.head_atom, body, origin or self.origin)

    def text(self) -> str:
        head = f"{self.head_op}({self.head_atom})"
        if not self.body:
            return f"{head}"
        return f"{head} <- {', '.join(map(str, self.body))}"

    def __str__(self) -> str:
        return f"{self.id}: {self.text()}"


class BridgeRulePattern(BridgeRule):
    """A bridge rule whose body sources may be context designators."""

    @property
    def designators(self) -> List[Designator]:
        seen: List[Designator] = []
        for l in self.body:
            if isinstance(l.source, Designator) and l.source not in seen:
                seen.append(l.source)
        return seen


@dataclass(frozen=True)
class TriggerSpec:
    rule_id: str
    guard: Tuple[Atom, ...] = ()

    def __str__(self) -> str:
        return ", ".join(map(str, self.guard)) if self.guard else "true"


@dataclass(frozen=True)
class TriggerRecord:
    """A (possibly partially instantiated) head enabled for a rule at ``since``."""

    rule_id: str
    head: Atom
    since: int

    def covers(self, rule_id: str, head: Atom) -> bool:
        return rule_id == self.rule_id and match(self.head, head, {}) is not None


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule_id: str
    condition: str
    detail: str
    position: Optional[int] = None

    def __str__(self) -> str:
        where = f" (literal {self.position + 1})" if self.position is not None else ""
        return f"rule {self.rule_id}: {self.condition}{where}: {self.detail}"


SUBS = "subs"


def _symbols(term: Term, out: Set[str]) -> None:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Const):
            out.add(t.name)
        elif isinstance(t, Compound):
            out.add(t.functor)
            stack.extend(t.args)


def _atom_symbols(atom: Atom, out: Set[str]) -> None:
    out.add(atom.pred)
    for a in atom.args:
        _symbols(a, out)


def _free_symbols(a: Atom, out: Set[str]) -> None:
    if a.pred == SUBS and a.arity == 2:
        # subs/2 legitimately mentions the designator in its first argument
        out.add(a.pred)
        _symbols(a.args[1], out)
    else:
        _atom_symbols(a, out)


def _kb_symbols(kb: KnowledgeBase) -> Set[str]:
    out: Set[str] = set()
    atoms: List[Atom] = list(kb.facts)
    for r in kb.rules:
        atoms.append(r.head)
        atoms.extend(r.body)
    for a in atoms:
        _free_symbols(a, out)
    return out


def validate_rule(r: BridgeRule, kb: Optional[KnowledgeBase] = None,
                  others: Iterable[BridgeRule] = ()) -> List[Violation]:
    """Check safety and designator placement; empty list means ok."""
    out: List[Violation] = []
    positive_vars: Set = set()
    for l in r.body:
        if not l.negated:
            positive_vars.update(variables(l.atom))
    for v in sorted(set(variables(r.head_atom)) - positive_vars, key=str):
        out.append(Violation(r.id, "unsafe head variable",
                             f"head variable {v} does not occur in a positive body literal"))
    seen_negative = None
    for i, l in enumerate(r.body):
        if l.negated and seen_negative is None:
            seen_negative = i
        elif not l.negated and seen_negative is not None:
            out.append(Violation(r.id, "positive after negative",
                                 f"positive literal {l} follows negative literal {r.body[seen_negative]}", i))
    designators = [(i, l.source) for i, l in enumerate(r.body) if isinstance(l.source, Designator)]
    if isinstance(r, BridgeRulePattern):
        if not designators:
            out.append(Violation(r.id, "pattern without designator",
                                 "a bridge-rule pattern needs at least one context designator"))
    else:
        for i, d in designators:
            out.append(Violation(r.id, "designator in bridge rule",
                                 f"context designator {d} may only occur in patterns", i))
    for i, l in enumerate(r.body):
        if l.builtin and not isinstance(l.source, Local):
            out.append(Violation(r.id, "remote comparison", f"comparison {l.atom} must be local", i))
    if designators:
        used: Set[str] = set(_kb_symbols(kb)) if kb is not None else set()
        for rule in itertools.chain([r], others):
            _free_symbols(rule.head_atom, used)
            for l in rule.body:
                _free_symbols(l.atom, used)
        for i, d in designators:
            clash = {d.functor, d.tag} & used
            if clash:
                out.append(Violation(r.id, "designator not fresh",
                                     f"{', '.join(sorted(clash))} of {d} occurs elsewhere", i))
    return out


# -- pattern instantiation -------------------------------------------------

def instance_id(base: str, names: Sequence[str]) -> str:
    return f"{base}[{','.join(names)}]"


def subs_targets(belief: BeliefSet, designator: Designator) -> List[str]:
    probe = Atom(SUBS, (designator.term, Const("_")))
    out = set()
    for fact in belief.candidates(probe):
        if fact.args[0] is designator.term and isinstance(fact.args[1], Const):
            out.add(fact.args[1].name)
    return sorted(out)


def instantiate_patterns(patterns: Iterable[BridgeRulePattern], belief: BeliefSet, T: int,
                         known: Iterable[str], warn: Optional[Callable[[str], None]] = None
                         ) -> List[BridgeRule]:
    """Valid instances of ``patterns`` under the subs/2 facts entailed by ``belief``."""
    known = set(known)
    out: List[BridgeRule] = []
    for p in patterns:
        designators = p.designators
        options = []
        for d in designators:
            names = []
            for c in subs_targets(belief, d):
                if c in known:
                    names.append(c)
                else:
                    msg = f"pattern {p.id}: subs binds {d} to unknown context {c}; instance dropped"
                    log.warning(msg)
                    if warn:
                        warn(msg)
            options.append(names)
        for combo in itertools.product(*options):
            mapping = dict(zip(designators, combo))
            sources = {i: Name(mapping[l.source]) for i, l in enumerate(p.body)
                       if isinstance(l.source, Designator)}
            out.append(p.with_sources(sources, instance_id(p.id, combo),
                                      Origin("instance", p.id, T), cls=BridgeRule))
    return out


# -- directory pre-grounding -----------------------------------------------

def unresolved_roles(r: BridgeRule, directory: Directory, owner: str) -> List[str]:
    return sorted({l.source.role for l in r.body if isinstance(l.source, DirQuery)
                   and not [c for c in directory.lookup(l.source.role) if c != owner]})


def preground(r: BridgeRule, directory: Directory, prefs: Sequence[Atom], owner: str) -> List[BridgeRule]:
    """Replace each ``role@Dir`` by directory candidates, most preferred first."""
    slots = [i for i, l in enumerate(r.body) if isinstance(l.source, DirQuery)]
    if not slots:
        return [r]
    ranked = []
    for i in slots:
        cands = [c for c in directory.lookup(r.body[i].source.role) if c != owner]
        if not cands:
            return []
        ranked.append(select_preferred(cands, prefs, directory))
    return [r.with_sources({i: Name(c) for i, c in zip(slots, combo)})
            for combo in itertools.product(*ranked)]


# -- grounding and applicability -------------------------------------------

BeliefState = Mapping[str, BeliefSet]


def _source_belief(l: BodyLiteral, beliefs: BeliefState, owner: str) -> Optional[BeliefSet]:
    if isinstance(l.source, (DirQuery, Designator)):
        raise ValueError(f"literal {l} must be pre-ground before evaluation")
    return beliefs.get(l.context(owner))


def literal_holds(l: BodyLiteral, beliefs: BeliefState, owner: str) -> bool:
    """Truth of a ground literal (negation: the atom is not in the source's beliefs)."""
    if l.builtin:
        sat = next(eval_builtin(l.atom, {}), None) is not None
        return sat != l.negated
    belief = _source_belief(l, beliefs, owner)
    if belief is None:
        # absent context: positive literals fail, and so do negative ones
        return False
    return (l.atom in belief) != l.negated


def resolve_positive(lits: Sequence[BodyLiteral], beliefs: BeliefState, owner: str,
                     s: Optional[Subst] = None, ordered: bool = False) -> Iterator[Subst]:
    s = {} if s is None else s
    if not lits:
        yield s
        return
    l, rest = lits[0], lits[1:]
    if l.builtin:
        for s2 in eval_builtin(l.atom, s):
            yield from resolve_positive(rest, beliefs, owner, s2, ordered)
        return
    belief = _source_belief(l, beliefs, owner)
    if belief is None:
        return
    facts = belief.sorted_candidates(l.atom) if ordered else belief.candidates(l.atom)
    for fact in facts:
        s2 = match(l.atom, fact, s)
        if s2 is not None:
            yield from resolve_positive(rest, beliefs, owner, s2, ordered)


def ground_instances(r: BridgeRule, beliefs: BeliefState, owner: str) -> List[BridgeRule]:
    """Ground instances whose positive body is entailed, by left-to-right resolution.

    Instances whose negative literals stay non-ground are dropped.
    """
    seen = set()
    out = []
    for s in resolve_positive(r.positives, beliefs, owner):
        g = r.substitute(s)
        if not g.ground or g in seen:
            continue
        seen.add(g)
        out.append(g)
    return out


def potential_grade(rho: BridgeRule, beliefs: BeliefState, owner: str) -> int:
    """Length of the longest prefix of positive literals entailed by ``beliefs``."""
    k = 0
    for l in rho.positives:
        if not literal_holds(l, beliefs, owner):
            break
        k += 1
    return k


def body_holds(rho: BridgeRule, beliefs: BeliefState, owner: str) -> bool:
    return all(literal_holds(l, beliefs, owner) for l in rho.body)


def reachable(rho: BridgeRule, owner: str, reach: Optional[Reachability]) -> bool:
    if reach is None:
        return True
    return all(reach.allows(owner, l.source.ctx) for l in rho.body if isinstance(l.source, Name))


def triggered_heads(rules: Iterable[BridgeRule], triggers: Mapping[str, TriggerSpec],
                    belief: BeliefSet) -> Set[Tuple[str, Atom]]:
    """(rule id, head) pairs enabled by the trigger guards under ``belief``.

    Rules without a trigger clause are always enabled.  Guard bindings are
    applied to the head, restricting later grounding.
    """
    out: Set[Tuple[str, Atom]] = set()
    for r in rules:
        spec = triggers.get(r.trigger_key)
        if spec is None or not spec.guard:
            out.add((r.id, r.head_atom))
            continue
        for s in solve(spec.guard, belief.candidates):
            out.add((r.id, apply_subst(r.head_atom, s)))
    return out


def is_triggered(rho: BridgeRule, records: Optional[Iterable[TriggerRecord]]) -> bool:
    if records is None:
        return True
    return any(rec.covers(rho.id, rho.head_atom) for rec in records)


def applicable_heads(rules: Mapping[str, Iterable[BridgeRule]], beliefs: BeliefState,
                     triggered: Optional[Mapping[str, Iterable[TriggerRecord]]] = None,
                     reach: Optional[Reachability] = None) -> Dict[str, FrozenSet[OpStatement]]:
    """Heads of triggered, reachable ground instances whose body holds.

    ``rules`` must already be pre-ground.  ``triggered=None`` treats every
    rule as triggered.
    """
    out: Dict[str, FrozenSet[OpStatement]] = {}
    for owner, rs in rules.items():
        records = None if triggered is None else list(triggered.get(owner, ()))
        heads = set()
        for r in rs:
            if records is not None and not any(rec.rule_id == r.id for rec in records):
                continue
            if not reachable(r, owner, reach):
                continue
            negatives = r.negatives
            for s in resolve_positive(r.positives, beliefs, owner):
                head = apply_subst(r.head_atom, s)
                if not head.ground:
                    continue
                op_head = OpStatement(r.head_op, head)
                if op_head in heads:
                    continue
                ok = True
                for l in negatives:
                    atom = apply_subst(l.atom, s)
                    if not atom.ground or not literal_holds(replace(l, atom=atom), beliefs, owner):
                        ok = False
                        break
                if not ok:
                    continue
                if records is not None and not any(rec.covers(r.id, head) for rec in records):
                    continue
                heads.add(op_head)
        out[owner] = frozenset(heads)
    return out
