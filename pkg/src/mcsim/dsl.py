"""Parser and renderer for system descriptions (.mcx) and scenario scripts (.mcxs).

The grammar is documented in docs/grammar.md.  Parsing is a hand-written
tokenizer plus recursive descent; every diagnostic carries a line and column.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .bridge import (LOCAL, BodyLiteral, BridgeRule, BridgeRulePattern, Designator, DirQuery,
                     Name, TriggerSpec, validate_rule)
from .directory import Directory, Reachability
from .logic import (BUILTIN_ACTIONS, BUILTINS, LOGICS, MANAGEMENT, UPDATES, DefiniteRule,
                    ElementaryAction, KnowledgeBase, action)
from .runtime import Scenario, TickEntry
from .system import DIRECTORY_ACTIONS, SYSTEM, Config, Context, System
from .terms import NIL, Atom, Compound, Const, Term, Var, make_list

# -- diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    rule_id: Optional[str] = None

    def __str__(self) -> str:
        where = f" [rule {self.rule_id}]" if self.rule_id else ""
        return f"{self.line}:{self.col}: error: {self.message}{where}"


class DiagnosticError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = sorted(diagnostics, key=lambda d: (d.line, d.col, d.message))
        super().__init__("\n".join(map(str, self.diagnostics)))


Pos = Tuple[int, int]

# -- tokens ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<number>-?\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<op><-|:-|->|=<|<=|>=|\\=|[{}()\[\],;:.|@<>=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return self.line, self.col


def tokenize(text: str) -> List[Token]:
    out: List[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DiagnosticError([Diagnostic(line, i - line_start + 1, f"unexpected character {text[i]!r}")])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, i - line_start + 1))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = i + chunk.rindex("\n") + 1
        i = m.end()
    out.append(Token("eof", "", line, i - line_start + 1))
    return out


# -- documents -------------------------------------------------------------


@dataclass
class BridgeDecl:
    rule: BridgeRule
    trigger: Optional[TriggerSpec] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class ContextDecl:
    name: str
    logic: str = "definite"
    kb: List[DefiniteRule] = field(default_factory=list)
    subs: List[DefiniteRule] = field(default_factory=list)
    bridge: List[BridgeDecl] = field(default_factory=list)
    patterns: List[BridgeDecl] = field(default_factory=list)
    prefs: List[Atom] = field(default_factory=list)
    actions: Optional[List[str]] = None
    mng: str = "add"
    update: str = "standard"
    pos: Pos = field(default=(0, 0), compare=False)
    spans: Dict[str, Pos] = field(default_factory=dict, compare=False)


@dataclass
class SystemDocument:
    contexts: List[ContextDecl] = field(default_factory=list)
    roles: Dict[str, List[str]] = field(default_factory=dict)
    attrs: Dict[str, List[Atom]] = field(default_factory=dict)
    members: Optional[List[str]] = None
    reach: Optional[List[Tuple[str, str]]] = None
    config: Dict[str, int] = field(default_factory=dict)
    spans: Dict[str, Pos] = field(default_factory=dict, compare=False)

    def context(self, name: str) -> Optional[ContextDecl]:
        for c in self.contexts:
            if c.name == name:
                return c
        return None


@dataclass
class TickDecl:
    tick: int
    actions: Dict[str, List[ElementaryAction]] = field(default_factory=dict)
    execs: List[Tuple[str, str]] = field(default_factory=list)
    pos: Pos = field(default=(0, 0), compare=False)
    spans: List[Tuple[str, str, Pos]] = field(default_factory=list, compare=False)


@dataclass
class ScenarioDocument:
    ticks: List[TickDecl] = field(default_factory=list)

    def to_scenario(self) -> Scenario:
        return Scenario([TickEntry(t.tick, {k: list(v) for k, v in t.actions.items()}, list(t.execs))
                         for t in self.ticks])


CONFIG_KEYS = ("depth_bound", "cap", "latency", "max_latency")

# -- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.fresh = 0
        self.diagnostics: List[Diagnostic] = []

    # primitives

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Optional[Token] = None) -> DiagnosticError:
        tok = tok or self.tok
        return DiagnosticError([Diagnostic(tok.line, tok.col, message)])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "number":
            raise self.error(f"expected integer, found {self.tok.text or 'end of input'!r}")
        return int(self.advance().text)

    # terms

    def term(self) -> Term:
        t = self.tok
        if t.kind == "var":
            self.advance()
            if t.text == "_":
                self.fresh += 1
                return Var(f"_{self.fresh}")
            return Var(t.text)
        if t.kind == "number":
            self.advance()
            return Const(t.text)
        if self.at("["):
            return self.list_term()
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return Compound(t.text, self.args())
            return Const(t.text)
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def list_term(self) -> Term:
        self.expect("[")
        if self.at("]"):
            self.advance()
            return NIL
        items = [self.term()]
        while self.at(","):
            self.advance()
            items.append(self.term())
        tail: Term = NIL
        if self.at("|"):
            self.advance()
            tail = self.term()
        self.expect("]")
        return make_list(items, tail)

    def args(self) -> Tuple[Term, ...]:
        self.expect("(")
        out = [self.term()]
        while self.at(","):
            self.advance()
            out.append(self.term())
        self.expect(")")
        return tuple(out)

    def atom(self) -> Atom:
        t = self.ident("predicate")
        if self.at("("):
            return Atom(t.text, self.args())
        return Atom(t.text)

    def comparison_tail(self, left: Term) -> Atom:
        op = self.tok
        if not (op.kind == "op" and op.text in BUILTINS):
            raise self.error(f"expected a comparison operator, found {op.text or 'end of input'!r}")
        self.advance()
        return Atom(op.text, (left, self.term()))

    def goal(self) -> Atom:
        """An atom or a comparison."""
        t = self.tok
        if t.kind in ("var", "number") or self.at("["):
            return self.comparison_tail(self.term())
        a = self.atom()
        if self.tok.kind == "op" and self.tok.text in BUILTINS:
            left = Compound(a.pred, a.args) if a.args else Const(a.pred)
            return self.comparison_tail(left)
        return a

    def goals(self) -> Tuple[Atom, ...]:
        out = [self.goal()]
        while self.at(","):
            self.advance()
            out.append(self.goal())
        return tuple(out)

    def clause(self) -> DefiniteRule:
        self.fresh = 0
        head = self.atom()
        body: Tuple[Atom, ...] = ()
        if self.at("<-") or self.at(":-"):
            self.advance()
            body = self.goals()
        self.expect(".")
        return DefiniteRule(head, body)

    # bridge literals

    def literal(self) -> BodyLiteral:
        negated = False
        if self.at("not") and self.peek().kind in ("ident", "var", "number") or (
                self.at("not") and self.peek().text == "("):
            self.advance()
            negated = True
            if self.at("("):
                self.advance()
                lit = self.literal()
                self.expect(")")
                return BodyLiteral(lit.source, lit.atom, True)
        t = self.tok
        if t.kind in ("var", "number") or self.at("["):
            return BodyLiteral(LOCAL, self.comparison_tail(self.term()), negated)
        if t.kind != "ident":
            raise self.error(f"expected a body literal, found {t.text or 'end of input'!r}")
        nxt = self.peek()
        if nxt.text == "@":
            self.advance()
            self.advance()
            if self.tok.text != "Dir":
                raise self.error("expected 'Dir' after '@'")
            self.advance()
            self.expect(":")
            return BodyLiteral(DirQuery(t.text), self.atom(), negated)
        if nxt.text == ":":
            self.advance()
            self.advance()
            return BodyLiteral(Name(t.text), self.atom(), negated)
        a = self.atom()
        if self.at(":"):
            if len(a.args) != 1 or not isinstance(a.args[0], Const):
                raise self.error("a context designator has the form functor(tag)", t)
            self.advance()
            return BodyLiteral(Designator(a.pred, a.args[0].name), self.atom(), negated)
        if self.tok.kind == "op" and self.tok.text in BUILTINS:
            left = Compound(a.pred, a.args) if a.args else Const(a.pred)
            return BodyLiteral(LOCAL, self.comparison_tail(left), negated)
        return BodyLiteral(LOCAL, a, negated)

    def bridge_rule(self, pattern: bool) -> BridgeDecl:
        self.fresh = 0
        start = self.tok
        rid = self.ident("rule id")
        self.expect(":")
        op = self.ident("operation")
        self.expect("(")
        head = self.atom()
        self.expect(")")
        body: List[BodyLiteral] = []
        if self.at("<-") or self.at(":-"):
            self.advance()
            body.append(self.literal())
            while self.at(","):
                self.advance()
                body.append(self.literal())
        self.expect(";")
        trigger = None
        if self.at("trigger"):
            self.advance()
            self.expect(":")
            guard: Tuple[Atom, ...] = ()
            if self.at("true"):
                self.advance()
            else:
                guard = self.goals()
            self.expect(";")
            trigger = TriggerSpec(rid.text, guard)
        cls = BridgeRulePattern if pattern else BridgeRule
        return BridgeDecl(cls(rid.text, op.text, head, tuple(body)), trigger, start.pos)

    # blocks

    def block(self, item) -> None:
        self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block, expected '}'")
            item()
        self.expect("}")

    def name_list(self) -> List[str]:
        out = [self.ident("name").text]
        while self.at(","):
            self.advance()
            out.append(self.ident("name").text)
        return out

    def context(self, doc: SystemDocument) -> None:
        start = self.expect("context")
        name = self.ident("context name")
        c = ContextDecl(name.text, pos=start.pos)

        def item():
            key = self.ident("context section")
            c.spans[key.text] = key.pos
            if key.text == "logic":
                c.logic = self.ident("logic name").text
                self.expect(";")
            elif key.text in ("mng", "update"):
                setattr(c, key.text, self.ident(f"{key.text} function").text)
                self.expect(";")
            elif key.text in ("kb", "subs"):
                target = c.kb if key.text == "kb" else c.subs
                self.block(lambda: target.append(self.clause()))
            elif key.text in ("bridge", "pattern"):
                target = c.bridge if key.text == "bridge" else c.patterns
                self.block(lambda: target.append(self.bridge_rule(key.text == "pattern")))
            elif key.text == "prefs":
                def pref():
                    c.prefs.append(self.atom())
                    if self.at(",") or self.at(";"):
                        self.advance()
                self.block(pref)
            elif key.text == "actions":
                names: List[str] = []

                def act():
                    names.extend(self.name_list())
                    if self.at(";"):
                        self.advance()
                self.block(act)
                c.actions = names
            else:
                raise self.error(f"unknown context section {key.text!r}", key)

        self.block(item)
        doc.contexts.append(c)

    def dir_block(self, doc: SystemDocument) -> None:
        doc.spans["dir"] = self.expect("dir").pos

        def item():
            key = self.ident("role")
            if key.text == "attrs":
                who = self.ident("context name").text
                self.expect(":")
                atoms = [self.atom()]
                while self.at(","):
                    self.advance()
                    atoms.append(self.atom())
                doc.attrs.setdefault(who, []).extend(atoms)
                doc.spans[f"attrs {who}"] = key.pos
            elif key.text == "members":
                self.expect(":")
                doc.members = (doc.members or []) + self.name_list()
                doc.spans["members"] = key.pos
            else:
                self.expect(":")
                doc.roles.setdefault(key.text, []).extend(self.name_list())
                doc.spans[f"role {key.text}"] = key.pos
            self.expect(";")
        self.block(item)

    def reach_block(self, doc: SystemDocument) -> None:
        doc.spans["reach"] = self.expect("reach").pos
        doc.reach = doc.reach or []

        def item():
            a = self.ident("context name")
            self.expect("->")
            b = self.ident("context name")
            self.expect(";")
            doc.reach.append((a.text, b.text))
            doc.spans[f"reach {a.text} {b.text}"] = a.pos
        self.block(item)

    def config_block(self, doc: SystemDocument) -> None:
        self.expect("config")

        def item():
            key = self.ident("config key")
            if key.text not in CONFIG_KEYS:
                raise self.error(f"unknown config key {key.text!r}", key)
            doc.config[key.text] = self.integer()
            doc.spans[f"config {key.text}"] = key.pos
            self.expect(";")
        self.block(item)

    def system(self) -> SystemDocument:
        doc = SystemDocument()
        while self.tok.kind != "eof":
            if self.at("context"):
                self.context(doc)
            elif self.at("dir"):
                self.dir_block(doc)
            elif self.at("reach"):
                self.reach_block(doc)
            elif self.at("config"):
                self.config_block(doc)
            else:
                raise self.error(f"expected 'context', 'dir', 'reach' or 'config', found {self.tok.text!r}")
        return doc

    # scenarios

    def scenario(self) -> ScenarioDocument:
        doc = ScenarioDocument()
        last = None
        while self.tok.kind != "eof":
            start = self.expect("tick")
            num_tok = self.tok
            n = self.integer()
            if n < 0:
                raise self.error("tick index must be nonnegative", num_tok)
            if last is not None and n <= last:
                kind = "duplicate" if n == last else "non-increasing"
                self.diagnostics.append(Diagnostic(num_tok.line, num_tok.col, f"{kind} tick index {n}"))
            last = n if last is None else max(last, n)
            t = TickDecl(n, pos=start.pos)

            def item():
                if self.at("exec"):
                    self.advance()
                    owner = self.ident("context name")
                    self.expect(".")
                    rid = self.ident("rule id")
                    self.expect(";")
                    t.execs.append((owner.text, rid.text))
                    t.spans.append(("exec", f"{owner.text}.{rid.text}", owner.pos))
                    return
                who = self.ident("context name")
                self.expect(":")
                key = SYSTEM if who.text == "system" else who.text
                acts = t.actions.setdefault(key, [])
                while True:
                    self.fresh = 0
                    a_tok = self.ident("action name")
                    payload: Tuple[Atom, ...] = ()
                    if self.at("("):
                        self.advance()
                        items = [self.atom()]
                        while self.at(","):
                            self.advance()
                            items.append(self.atom())
                        self.expect(")")
                        payload = tuple(items)
                    for p in payload:
                        if not p.ground:
                            self.diagnostics.append(Diagnostic(a_tok.line, a_tok.col,
                                                               f"action payload {p} is not ground"))
                    acts.append(action(a_tok.text, *payload))
                    t.spans.append(("action", f"{key}.{a_tok.text}", a_tok.pos))
                    if self.at(","):
                        self.advance()
                        continue
                    break
                self.expect(";")
            self.block(item)
            doc.ticks.append(t)
        return doc


# -- semantic checks -------------------------------------------------------


def _check(doc: SystemDocument) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    names = [c.name for c in doc.contexts]
    seen = set()
    for c in doc.contexts:
        line, col = c.pos
        if c.name in seen:
            diags.append(Diagnostic(line, col, f"duplicate context name {c.name}"))
        seen.add(c.name)
        if c.logic not in LOGICS:
            diags.append(Diagnostic(*c.spans.get("logic", c.pos), f"unknown logic {c.logic!r}"))
        if c.mng not in MANAGEMENT:
            diags.append(Diagnostic(*c.spans.get("mng", c.pos), f"unknown management function {c.mng!r}"))
        if c.update not in UPDATES:
            diags.append(Diagnostic(*c.spans.get("update", c.pos), f"unknown update function {c.update!r}"))
        try:
            kb = _kb_of(c)
        except ValueError as exc:
            diags.append(Diagnostic(line, col, f"context {c.name}: {exc}"))
            kb = None
        rule_ids = [d.rule.id for d in c.bridge + c.patterns]
        all_rules = [d.rule for d in c.bridge + c.patterns]
        dup = set()
        for d in c.bridge + c.patterns:
            r = d.rule
            if rule_ids.count(r.id) > 1 and r.id not in dup:
                dup.add(r.id)
                diags.append(Diagnostic(*d.pos, f"duplicate rule id {r.id}", r.id))
            others = [o for o in all_rules if o is not r]
            for v in validate_rule(r, kb, others):
                diags.append(Diagnostic(*d.pos, f"{v.condition}: {v.detail}", r.id))
            for l in r.body:
                ref = l.context(c.name)
                if ref is not None and ref not in names:
                    diags.append(Diagnostic(*d.pos, f"unknown context {ref}", r.id))
    for role, members in doc.roles.items():
        for n in members:
            if n not in names:
                diags.append(Diagnostic(*doc.spans.get(f"role {role}", (0, 0)), f"directory role {role}: unknown context {n}"))
    for n in doc.attrs:
        if n not in names:
            diags.append(Diagnostic(*doc.spans.get(f"attrs {n}", (0, 0)), f"attrs for unknown context {n}"))
    for n in doc.members or ():
        if n not in names:
            diags.append(Diagnostic(*doc.spans.get("members", (0, 0)), f"unknown member {n}"))
    for a, b in doc.reach or ():
        for n in (a, b):
            if n not in names:
                diags.append(Diagnostic(*doc.spans.get(f"reach {a} {b}", (0, 0)), f"reach {a} -> {b}: unknown context {n}"))
    return diags


def _kb_of(c: ContextDecl) -> KnowledgeBase:
    facts = [r.head for r in c.kb + c.subs if not r.body]
    rules = [r for r in c.kb + c.subs if r.body]
    return KnowledgeBase(frozenset(facts), tuple(rules))


def parse_system(text: str) -> SystemDocument:
    """Parse and check a system description; raises DiagnosticError on problems."""
    doc = _Parser(text).system()
    diags = _check(doc)
    if diags:
        raise DiagnosticError(diags)
    return doc


def check_system(text: str) -> List[Diagnostic]:
    try:
        parse_system(text)
    except DiagnosticError as exc:
        return exc.diagnostics
    return []


def parse_scenario(text: str) -> ScenarioDocument:
    p = _Parser(text)
    doc = p.scenario()
    if p.diagnostics:
        raise DiagnosticError(p.diagnostics)
    return doc


def link_scenario(scenario: ScenarioDocument, system: SystemDocument) -> List[Diagnostic]:
    """Cross-check action and rule references of a scenario against a system."""
    diags: List[Diagnostic] = []
    by_name = {c.name: c for c in system.contexts}
    for t in scenario.ticks:
        for kind, ref, pos in t.spans:
            if kind == "exec":
                owner, rid = ref.split(".", 1)
                c = by_name.get(owner)
                if c is None:
                    diags.append(Diagnostic(*pos, f"unknown context {owner}"))
                elif rid not in {d.rule.id for d in c.bridge}:
                    diags.append(Diagnostic(*pos, f"unknown rule {owner}.{rid}"))
                continue
            who, name = ref.split(".", 1)
            if who == SYSTEM:
                if name not in DIRECTORY_ACTIONS:
                    diags.append(Diagnostic(*pos, f"{name} is not a directory action"))
                continue
            c = by_name.get(who)
            if c is None:
                diags.append(Diagnostic(*pos, f"unknown context {who}"))
                continue
            declared = set(c.actions) if c.actions is not None else set(BUILTIN_ACTIONS)
            if name not in declared and name not in DIRECTORY_ACTIONS:
                diags.append(Diagnostic(*pos, f"action {name} not declared in context {who}"))
    return diags


# -- building --------------------------------------------------------------


def build_system(doc: SystemDocument) -> System:
    config = Config(**doc.config)
    contexts: Dict[str, Context] = {}
    for c in doc.contexts:
        triggers = {d.trigger.rule_id: d.trigger for d in c.bridge + c.patterns if d.trigger is not None}
        actions = frozenset(c.actions) if c.actions is not None else BUILTIN_ACTIONS
        contexts[c.name] = Context(c.name, _kb_of(c), tuple(d.rule for d in c.bridge),
                                   tuple(d.rule for d in c.patterns), triggers, tuple(c.prefs),
                                   actions, c.logic, c.mng, c.update)
    members = frozenset(doc.members) if doc.members is not None else frozenset(contexts)
    directory = Directory(members, {r: frozenset(ns) for r, ns in doc.roles.items()},
                          {n: frozenset(a) for n, a in doc.attrs.items()})
    reach = Reachability(None if doc.reach is None else frozenset(doc.reach))
    return System(contexts, directory, reach, config)


def load_system(text: str) -> System:
    return build_system(parse_system(text))


# -- rendering -------------------------------------------------------------


def _render_bridge(d: BridgeDecl) -> List[str]:
    lines = [f"    {d.rule};"]
    if d.trigger is not None:
        lines.append(f"      trigger: {d.trigger};")
    return lines


def render(doc: SystemDocument) -> str:
    out: List[str] = []
    for c in doc.contexts:
        out.append(f"context {c.name} {{")
        out.append(f"  logic {c.logic};")
        if c.kb:
            out.append("  kb {")
            out.extend(f"    {r}" for r in c.kb)
            out.append("  }")
        if c.subs:
            out.append("  subs {")
            out.extend(f"    {r}" for r in c.subs)
            out.append("  }")
        for key, decls in (("bridge", c.bridge), ("pattern", c.patterns)):
            if decls:
                out.append(f"  {key} {{")
                for d in decls:
                    out.extend(_render_bridge(d))
                out.append("  }")
        if c.prefs:
            out.append(f"  prefs {{ {', '.join(map(str, c.prefs))} }}")
        if c.actions is not None:
            out.append(f"  actions {{ {', '.join(c.actions)} }}")
        out.append(f"  mng {c.mng};")
        out.append(f"  update {c.update};")
        out.append("}")
    if doc.roles or doc.attrs or doc.members is not None:
        out.append("dir {")
        if doc.members is not None:
            out.append(f"  members: {', '.join(doc.members)};")
        for role, names in doc.roles.items():
            out.append(f"  {role}: {', '.join(names)};")
        for n, atoms in doc.attrs.items():
            out.append(f"  attrs {n}: {', '.join(map(str, atoms))};")
        out.append("}")
    if doc.reach is not None:
        out.append("reach {")
        out.extend(f"  {a} -> {b};" for a, b in doc.reach)
        out.append("}")
    if doc.config:
        out.append("config {")
        out.extend(f"  {k} {v};" for k, v in doc.config.items())
        out.append("}")
    return "\n".join(out) + "\n"


def render_scenario(doc: ScenarioDocument) -> str:
    out: List[str] = []
    for t in doc.ticks:
        out.append(f"tick {t.tick} {{")
        for who, acts in t.actions.items():
            label = "system" if who == SYSTEM else who
            out.append(f"  {label}: {', '.join(map(str, acts))};")
        for owner, rid in t.execs:
            out.append(f"  exec {owner}.{rid};")
        out.append("}")
    return "\n".join(out) + "\n"


def parse_atom(text: str) -> Atom:
    """Parse a single atom or comparison, e.g. ``help_asked(bob,[chestpain],3,3,15,ambulance)``."""
    p = _Parser(text)
    a = p.goal()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after atom")
    return a
