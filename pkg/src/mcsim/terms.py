"""First-order terms, atoms, substitutions and unification.

Terms are hash-consed: constructing the same structure twice yields the same
object, so equality and hashing are O(1) even for very deep terms such as
``succ(succ(...(0)))``.  Depth, groundness and the canonical text are cached
on each node; nothing here recurses on ground subterms, which keeps the
engine clear of the interpreter recursion limit.
"""
from __future__ import annotations

from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

__all__ = [
    "Term", "Var", "Const", "Compound", "Atom", "Subst",
    "unify", "apply_subst", "is_ground", "variables", "term_depth",
    "make_list", "list_items", "as_int", "NIL",
]


class Term:
    __slots__ = ()

    ground: bool
    depth: int

    def __reduce__(self):
        raise NotImplementedError

    def __lt__(self, other: "Term") -> bool:
        return str(self) < str(other)


class Var(Term):
    __slots__ = ("name", "_hash", "__weakref__")
    _table: Dict[str, "Var"] = {}

    ground = False
    depth = 0

    def __new__(cls, name: str) -> "Var":
        try:
            return cls._table[name]
        except KeyError:
            pass
        self = object.__new__(cls)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("var", name)))
        cls._table[name] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Var, (self.name,))

    def __repr__(self) -> str:
        return f"Var({self.name!r})"

    def __str__(self) -> str:
        return self.name


class Const(Term):
    __slots__ = ("name", "_hash", "__weakref__")
    _table: Dict[str, "Const"] = {}

    ground = True
    depth = 0

    def __new__(cls, name) -> "Const":
        name = str(name)
        try:
            return cls._table[name]
        except KeyError:
            pass
        self = object.__new__(cls)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("const", name)))
        cls._table[name] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Const, (self.name,))

    def __repr__(self) -> str:
        return f"Const({self.name!r})"

    def __str__(self) -> str:
        return self.name


class Compound(Term):
    __slots__ = ("functor", "args", "ground", "depth", "_hash", "_text", "__weakref__")
    _table: Dict[Tuple[str, Tuple[Term, ...]], "Compound"] = {}

    def __new__(cls, functor: str, args: Iterable[Term]) -> "Compound":
        args = tuple(args)
        if not args:
            raise ValueError(f"compound term {functor!r} needs at least one argument")
        key = (functor, args)
        try:
            return cls._table[key]
        except KeyError:
            pass
        self = object.__new__(cls)
        set_ = object.__setattr__
        set_(self, "functor", functor)
        set_(self, "args", args)
        set_(self, "ground", all(a.ground for a in args))
        set_(self, "depth", 1 + max(a.depth for a in args))
        set_(self, "_hash", hash(key))
        set_(self, "_text", None)
        cls._table[key] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Compound, (self.functor, self.args))

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {self.args!r})"

    def __str__(self) -> str:
        if self._text is None:
            _render(self)
        return self._text


NIL = Const("[]")
_CONS = "."


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Compound(_CONS, (item, out))
    return out


def list_items(term: Term) -> Optional[Tuple[list, Term]]:
    """Split a cons chain into (items, tail); None if ``term`` is not a list cell."""
    if not (isinstance(term, Compound) and term.functor == _CONS and len(term.args) == 2):
        return None
    items = []
    while isinstance(term, Compound) and term.functor == _CONS and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items, term


def _text_of(t: Term) -> str:
    return t._text if isinstance(t, Compound) else str(t)


def _render(root: Compound) -> None:
    # post-order over uncached nodes, no recursion
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if node._text is not None:
            continue
        if not expanded:
            stack.append((node, True))
            for a in node.args:
                if isinstance(a, Compound) and a._text is None:
                    stack.append((a, False))
            continue
        split = list_items(node)
        if split is not None:
            items, tail = split
            # items/tail of a cons chain are rendered before the chain's cells
            pending = [t for t in items + [tail] if isinstance(t, Compound) and t._text is None]
            if pending:
                stack.append((node, True))
                for t in pending:
                    stack.append((t, False))
                continue
            body = ",".join(_text_of(t) for t in items)
            text = f"[{body}]" if tail is NIL else f"[{body}|{_text_of(tail)}]"
        else:
            text = f"{node.functor}({','.join(_text_of(a) for a in node.args)})"
        object.__setattr__(node, "_text", text)


class Atom:
    """A predicate applied to terms.  Also used for builtin comparisons."""

    __slots__ = ("pred", "args", "ground", "depth", "_hash", "_text", "__weakref__")
    _table: Dict[Tuple[str, Tuple[Term, ...]], "Atom"] = {}

    def __new__(cls, pred: str, args: Iterable[Term] = ()) -> "Atom":
        args = tuple(args)
        key = (pred, args)
        try:
            return cls._table[key]
        except KeyError:
            pass
        self = object.__new__(cls)
        set_ = object.__setattr__
        set_(self, "pred", pred)
        set_(self, "args", args)
        set_(self, "ground", all(a.ground for a in args))
        set_(self, "depth", max((a.depth for a in args), default=0))
        set_(self, "_hash", hash(key))
        set_(self, "_text", None)
        cls._table[key] = self
        return self

    def __setattr__(self, key, value):
        raise AttributeError("atoms are immutable")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> Tuple[str, int]:
        return self.pred, len(self.args)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Atom):
            return NotImplemented
        # atoms are interned
        return False

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Atom") -> bool:
        return str(self) < str(other)

    def __reduce__(self):
        return (Atom, (self.pred, self.args))

    def __repr__(self) -> str:
        return f"Atom({str(self)!r})"

    def __str__(self) -> str:
        if self._text is None:
            if not self.args:
                text = self.pred
            elif self.pred in BUILTIN_INFIX and len(self.args) == 2:
                text = f"{self.args[0]} {self.pred} {self.args[1]}"
            else:
                text = f"{self.pred}({','.join(str(a) for a in self.args)})"
            object.__setattr__(self, "_text", text)
        return self._text


BUILTIN_INFIX = frozenset({"<", "<=", "=<", ">", ">=", "=", "\\="})

Subst = Dict[Var, Term]
TermLike = Union[Term, Atom]


def is_ground(x: TermLike) -> bool:
    return x.ground


def term_depth(x: TermLike) -> int:
    """Nesting depth: 0 for constants/variables, 1 + max(args) for compounds.

    For an atom, the maximum depth over its arguments.
    """
    return x.depth


def variables(x: TermLike) -> Iterator[Var]:
    if x.ground:
        return
    if isinstance(x, Var):
        yield x
        return
    stack = list(x.args)
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Compound) and not t.ground:
            stack.extend(t.args)


def apply_subst(x, s: Mapping[Var, Term]):
    """Replace bound variables in a term or atom, simultaneously."""
    if x.ground or not s:
        return x
    if isinstance(x, Var):
        return s.get(x, x)
    if isinstance(x, Compound):
        return Compound(x.functor, [_subst_term(a, s) for a in x.args])
    if isinstance(x, Atom):
        return Atom(x.pred, [_subst_term(a, s) for a in x.args])
    return x


def _subst_term(t: Term, s: Mapping[Var, Term]) -> Term:
    if t.ground:
        return t
    if type(t) is Var:
        return s.get(t, t)
    return Compound(t.functor, [_subst_term(a, s) for a in t.args])


def _walk(t: Term, s: Subst) -> Term:
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def _occurs(v: Var, t: Term, s: Subst) -> bool:
    stack = [t]
    while stack:
        t = _walk(stack.pop(), s)
        if t is v:
            return True
        if isinstance(t, Compound) and not t.ground:
            stack.extend(t.args)
    return False


def _unify_terms(a: Term, b: Term, s: Subst) -> bool:
    stack = [(a, b)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, s)
        b = _walk(b, s)
        if a is b:
            continue
        if isinstance(a, Var):
            if _occurs(a, b, s):
                return False
            s[a] = b
        elif isinstance(b, Var):
            if _occurs(b, a, s):
                return False
            s[b] = a
        elif isinstance(a, Compound) and isinstance(b, Compound):
            if a.ground and b.ground:
                return False  # interned: distinct ground terms differ
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        else:
            return False
    return True


def _resolve(s: Subst) -> Subst:
    """Turn a triangular binding map into an idempotent substitution."""
    out: Subst = {}
    for v in s:
        out[v] = _full(v, s)
    return {v: t for v, t in out.items() if t is not v}


def _full(t: Term, s: Subst) -> Term:
    t = _walk(t, s)
    if t.ground or isinstance(t, Var):
        return t
    return Compound(t.functor, tuple(_full(a, s) for a in t.args))


def unify(a, b, s: Optional[Mapping[Var, Term]] = None) -> Optional[Subst]:
    """Most general unifier of two atoms (or terms), extending ``s``.

    Returns an idempotent substitution, or None if the inputs do not unify
    (different predicate/arity, constant clash, or occurs-check failure).
    """
    work: Subst = dict(s) if s else {}
    if isinstance(a, Atom) or isinstance(b, Atom):
        if not (isinstance(a, Atom) and isinstance(b, Atom)):
            return None
        if a.pred != b.pred or len(a.args) != len(b.args):
            return None
        pairs = zip(a.args, b.args)
    else:
        pairs = [(a, b)]
    for x, y in pairs:
        if not _unify_terms(x, y, work):
            return None
    return _resolve(work)


def match(pattern: Atom, fact: Atom, s: Mapping[Var, Term]) -> Optional[Subst]:
    """One-way unification of ``pattern`` (under ``s``) against a ground fact."""
    if pattern.pred != fact.pred or len(pattern.args) != len(fact.args):
        return None
    out = dict(s)
    for p, f in zip(pattern.args, fact.args):
        if not _match_term(p, f, out):
            return None
    if not all(t.ground for t in out.values()):
        return _resolve(out)
    return out


def _match_term(p: Term, f: Term, s: Subst) -> bool:
    stack = [(p, f)]
    while stack:
        p, f = stack.pop()
        if p.ground:
            if p is not f:
                return False
            continue
        if isinstance(p, Var):
            bound = s.get(p)
            if bound is None:
                s[p] = f
            elif bound.ground:
                if bound is not f:
                    return False
            else:
                stack.append((bound, f))
            continue
        if not isinstance(f, Compound) or p.functor != f.functor or len(p.args) != len(f.args):
            return False
        stack.extend(zip(p.args, f.args))
    return True


def as_int(t: Term) -> Optional[int]:
    if isinstance(t, Const):
        try:
            return int(t.name)
        except ValueError:
            return None
    return None
