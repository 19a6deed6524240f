"""Existential and universal belief queries over a finite update horizon."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .logic import ElementaryAction
from .system import System, digest, initial_state, is_timed_equilibrium, step
from .terms import Atom

EXISTS = "exists"
FORALL = "forall"

Actions = Mapping[str, Iterable[ElementaryAction]]


@dataclass(frozen=True)
class QuerySpec:
    ctx: str
    belief: Atom
    horizon: int
    actions: Sequence[Actions] = ()
    mode: str = EXISTS

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.mode not in (EXISTS, FORALL):
            raise ValueError(f"mode must be {EXISTS!r} or {FORALL!r}")
        if not self.belief.ground:
            raise ValueError("target belief must be ground")
        if len(self.actions) > self.horizon:
            raise ValueError("more action sets than time points")

    def actions_at(self, t: int) -> Actions:
        """Actions producing the state at time ``t`` (1-based); empty past the list."""
        return self.actions[t - 1] if t - 1 < len(self.actions) else {}


@dataclass(frozen=True)
class TickRow:
    t: int
    equilibrium: bool
    member: bool
    digest: str


@dataclass
class QueryResult:
    answer: bool
    mode: str
    witness: Optional[int] = None
    witness_digest: Optional[str] = None
    table: List[TickRow] = field(default_factory=list)
    report: List[str] = field(default_factory=list)

    def lines(self) -> List[str]:
        out = [f"answer={str(self.answer).lower()} mode={self.mode}"]
        if self.witness is not None:
            out.append(f"witness t={self.witness} digest={self.witness_digest}")
        for row in self.table:
            out.append(f"t={row.t} equilibrium={str(row.equilibrium).lower()} "
                       f"member={str(row.member).lower()} digest={row.digest}")
        out.extend(f"note {r}" for r in self.report)
        return out

    def as_dict(self) -> Dict[str, object]:
        return {
            "answer": self.answer, "mode": self.mode, "witness": self.witness,
            "witness_digest": self.witness_digest,
            "table": [{"t": r.t, "equilibrium": r.equilibrium, "member": r.member, "digest": r.digest}
                      for r in self.table],
            "report": list(self.report),
        }


def decide_query(system: System, q: QuerySpec, seed: int = 0) -> QueryResult:
    """Step t' = 1..horizon and test the target at every timed-equilibrium point.

    With deterministic update selection there is one candidate state per time
    point, so "some" and "all" timed equilibria coincide there.  States that
    are not timed equilibria are skipped and listed in the report.
    """
    if q.ctx not in system.contexts:
        raise ValueError(f"unknown context {q.ctx}")
    state = initial_state(system)
    table: List[TickRow] = []
    report: List[str] = []
    witness = None
    witness_digest = None
    for t in range(1, q.horizon + 1):
        state = step(state, q.actions_at(t), seed)
        eq = is_timed_equilibrium(state)
        member = q.belief in state.beliefs[q.ctx]
        table.append(TickRow(t, eq, member, digest(state)))
        if not eq:
            report.append(f"t={t} skipped: not a timed equilibrium")
    eq_rows = [r for r in table if r.equilibrium]
    if q.mode == EXISTS:
        hits = [r for r in eq_rows if r.member]
        answer = bool(hits)
        if hits:
            witness, witness_digest = hits[0].t, hits[0].digest
        elif not eq_rows:
            report.append("no timed equilibrium within the horizon")
        else:
            report.append(f"{q.belief} absent from {q.ctx} at every equilibrium point")
    else:
        misses = [r for r in eq_rows if not r.member]
        answer = not misses
        if misses:
            witness, witness_digest = misses[0].t, misses[0].digest
        if not eq_rows:
            report.append("no timed equilibrium within the horizon; vacuously true")
    return QueryResult(answer, q.mode, witness, witness_digest, table, report)
