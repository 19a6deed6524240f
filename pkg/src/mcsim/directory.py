"""Role directory, reachability graph and preferred-source selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .terms import Atom, unify

PreferenceCriterion = Tuple[Atom, ...]


@dataclass(frozen=True)
class Directory:
    """Participating contexts, their roles and the attributes used for ranking."""

    members: FrozenSet[str] = frozenset()
    roles: Mapping[str, FrozenSet[str]] = field(default_factory=dict)
    attrs: Mapping[str, FrozenSet[Atom]] = field(default_factory=dict)

    def lookup(self, role: str) -> List[str]:
        return sorted(n for n in self.roles.get(role, ()) if n in self.members)

    def is_member(self, name: str) -> bool:
        return name in self.members

    def register(self, role: str, name: str) -> "Directory":
        roles = dict(self.roles)
        roles[role] = frozenset(roles.get(role, frozenset()) | {name})
        return Directory(self.members | {name}, roles, self.attrs)

    def deregister(self, role: str, name: str) -> "Directory":
        roles = dict(self.roles)
        left = frozenset(roles.get(role, frozenset()) - {name})
        if left:
            roles[role] = left
        else:
            roles.pop(role, None)
        return Directory(self.members, roles, self.attrs)

    def join(self, name: str) -> "Directory":
        return Directory(self.members | {name}, self.roles, self.attrs)

    def leave(self, name: str) -> "Directory":
        return Directory(self.members - {name}, self.roles, self.attrs)

    def describe(self) -> List[str]:
        lines = [f"members {', '.join(sorted(self.members))}"]
        for role in sorted(self.roles):
            lines.append(f"role {role}: {', '.join(sorted(self.roles[role]))}")
        for name in sorted(self.attrs):
            lines.append(f"attrs {name}: {', '.join(sorted(map(str, self.attrs[name])))}")
        return lines


@dataclass(frozen=True)
class Reachability:
    """Directed (from, to) pairs.  ``pairs=None`` means every pair is allowed.

    Pairs are taken as given; no transitive closure is computed.
    """

    pairs: Optional[FrozenSet[Tuple[str, str]]] = None

    def allows(self, src: str, dst: str) -> bool:
        return src == dst or self.pairs is None or (src, dst) in self.pairs

    def add(self, src: str, dst: str) -> "Reachability":
        if self.pairs is None:
            return self
        return Reachability(self.pairs | {(src, dst)})

    def remove(self, src: str, dst: str) -> "Reachability":
        # removing from an unrestricted graph would need the full node set
        base = self.pairs if self.pairs is not None else frozenset()
        return Reachability(base - {(src, dst)})

    def describe(self) -> List[str]:
        if self.pairs is None:
            return ["reach unrestricted"]
        return [f"reach {a} -> {b}" for a, b in sorted(self.pairs)]


def _satisfies(pref: Atom, attrs: Iterable[Atom]) -> bool:
    return any(unify(pref, a) is not None for a in attrs)


def preference_score(name: str, prefs: Sequence[Atom], directory: Directory) -> int:
    attrs = directory.attrs.get(name, frozenset())
    return sum(1 for p in prefs if _satisfies(p, attrs))


def select_preferred(candidates: Iterable[str], prefs: Sequence[Atom],
                     directory: Directory) -> List[str]:
    """Rank candidates by how many preference atoms their attributes satisfy.

    Higher counts first, ties by name.  Candidates satisfying nothing are kept
    at the end, so the result is never empty for nonempty input.
    """
    candidates = set(candidates)
    if not candidates:
        raise ValueError("select_preferred needs at least one candidate")
    return sorted(candidates, key=lambda n: (-preference_score(n, prefs, directory), n))
