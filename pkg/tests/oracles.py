"""Independent reference implementations used to check the engine.

Terms here are plain tuples: a constant is a str starting lowercase or a
digit, a variable a str starting uppercase or underscore, and a compound
``(functor, arg1, ...)``.  Nothing in this module imports the engine's
unifier or solver; conversion from engine objects goes through their text.
"""
from __future__ import annotations

import itertools
import re

# -- tuple terms -------------------------------------------------------------

_TOK = re.compile(r"\s*([A-Za-z0-9_\-]+|\[|\]|\(|\)|,|\|)")


def parse(text):
    """Parse canonical atom text such as ``nat(succ(0))`` into a tuple term."""
    toks = _TOK.findall(text)
    pos = 0

    def term():
        nonlocal pos
        t = toks[pos]
        pos += 1
        if t == "[":
            items = []
            tail = "[]"
            if toks[pos] == "]":
                pos += 1
                return "[]"
            while True:
                items.append(term())
                if toks[pos] == ",":
                    pos += 1
                    continue
                if toks[pos] == "|":
                    pos += 1
                    tail = term()
                break
            pos += 1  # ]
            out = tail
            for item in reversed(items):
                out = (".", item, out)
            return out
        if pos < len(toks) and toks[pos] == "(":
            pos += 1
            args = [term()]
            while toks[pos] == ",":
                pos += 1
                args.append(term())
            pos += 1
            return (t, *args)
        return t

    return term()


def is_var(t):
    return isinstance(t, str) and (t[0].isupper() or t[0] == "_")


def walk(t, s):
    while is_var(t) and t in s:
        t = s[t]
    return t


def subst(t, s):
    t = walk(t, s)
    if isinstance(t, tuple):
        return (t[0], *(subst(a, s) for a in t[1:]))
    return t


def occurs(v, t, s):
    t = walk(t, s)
    if t == v:
        return True
    return isinstance(t, tuple) and any(occurs(v, a, s) for a in t[1:])


def unify(a, b, s=None):
    s = dict(s or {})
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = walk(x, s), walk(y, s)
        if x == y:
            continue
        if is_var(x):
            if occurs(x, y, s):
                return None
            s[x] = y
        elif is_var(y):
            if occurs(y, x, s):
                return None
            s[y] = x
        elif isinstance(x, tuple) and isinstance(y, tuple) and x[0] == y[0] and len(x) == len(y):
            stack.extend(zip(x[1:], y[1:]))
        else:
            return None
    return s


def ground(t):
    if is_var(t):
        return False
    if isinstance(t, tuple):
        return all(ground(a) for a in t[1:])
    return True


def depth(t):
    if isinstance(t, tuple):
        return 1 + max(depth(a) for a in t[1:])
    return 0


def atom_depth(a):
    if isinstance(a, tuple):
        return max((depth(x) for x in a[1:]), default=0)
    return 0


def to_text(t):
    if isinstance(t, tuple):
        if t[0] == ".":
            items = []
            while isinstance(t, tuple) and t[0] == ".":
                items.append(to_text(t[1]))
                t = t[2]
            inner = ",".join(items)
            return f"[{inner}]" if t == "[]" else f"[{inner}|{to_text(t)}]"
        return f"{t[0]}({','.join(to_text(a) for a in t[1:])})"
    return t


def subterms(t, out):
    out.add(t)
    if isinstance(t, tuple):
        for a in t[1:]:
            subterms(a, out)


def variables(t, out=None):
    out = set() if out is None else out
    if is_var(t):
        out.add(t)
    elif isinstance(t, tuple):
        for a in t[1:]:
            variables(a, out)
    return out


# -- definite programs -------------------------------------------------------

CMP = {"<": lambda a, b: a < b, "=<": lambda a, b: a <= b, "<=": lambda a, b: a <= b,
       ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}


def _int(t):
    try:
        return int(t) if isinstance(t, str) else None
    except ValueError:
        return None


def naive_least_model(facts, rules, bound):
    """Naive (not semi-naive) least fixpoint; rules are (head, [body...]).

    Body goals may be ("<", X, Y) style comparisons.  Derived atoms deeper
    than ``bound`` are dropped and flag truncation.
    """
    model = set(facts)
    truncated = False
    while True:
        new = set()
        for head, body in rules:
            for s in _solve(body, model, {}):
                h = subst(head, s)
                if not ground(h) or h in model:
                    continue
                if atom_depth(h) > bound:
                    truncated = True
                    continue
                new.add(h)
        if not new:
            return model, truncated
        model |= new


def _solve(goals, model, s):
    if not goals:
        yield s
        return
    g, rest = goals[0], goals[1:]
    if isinstance(g, tuple) and g[0] in CMP:
        a, b = _int(subst(g[1], s)), _int(subst(g[2], s))
        if a is not None and b is not None and CMP[g[0]](a, b):
            yield from _solve(rest, model, s)
        return
    for f in sorted(model, key=to_text):
        s2 = unify(g, f, s)
        if s2 is not None:
            yield from _solve(rest, model, s2)


# -- bridge rules over belief states ----------------------------------------


def naive_app(rules, beliefs):
    """Heads of ground rule instances whose body holds.

    ``rules`` is a list of (owner, head, body) with body items
    (ctx, atom, negated); ``ctx`` None means the owner.  Every variable is
    substituted by every term occurring in the state, exhaustively.
    """
    universe = set()
    for atoms in beliefs.values():
        for a in atoms:
            if isinstance(a, tuple):
                for x in a[1:]:
                    subterms(x, universe)
    universe = sorted(universe, key=to_text)
    out = {}
    for owner, head, body in rules:
        vs = set()
        variables(head, vs)
        for _, a, _ in body:
            variables(a, vs)
        vs = sorted(vs)
        for combo in itertools.product(universe, repeat=len(vs)):
            s = dict(zip(vs, combo))
            ok = True
            for ctx, a, neg in body:
                g = subst(a, s)
                src = beliefs.get(ctx or owner)
                if src is None:
                    ok = False
                    break
                if (g in src) == neg:
                    ok = False
                    break
            if ok:
                out.setdefault(owner, set()).add(subst(head, s))
    return out


def naive_grounded(contexts, cap=50, bound=16):
    """Simultaneous rule application with add-management; contexts map name -> dict(facts, rules, bridge)."""
    kbs = {n: set(c["facts"]) for n, c in contexts.items()}
    for _ in range(cap):
        beliefs = {n: naive_least_model(kbs[n], contexts[n]["rules"], bound)[0] for n in contexts}
        bridge = [(n, h, b) for n, c in contexts.items() for h, b in c["bridge"]]
        heads = naive_app(bridge, beliefs)
        new = {n: kbs[n] | heads.get(n, set()) for n in contexts}
        if new == kbs:
            return beliefs, True
        kbs = new
    return {n: naive_least_model(kbs[n], contexts[n]["rules"], bound)[0] for n in contexts}, False


# -- hand-derived values -----------------------------------------------------


def numeral(k):
    t = "0"
    for _ in range(k):
        t = ("succ", t)
    return t


# Threshold t=2, derived by stepping the iteration by hand:
#   round 1: c2 gains nat(s0), count 1
#   round 2: c1 gains nat(s2 0), count 1
#   round 3: c2 gains nat(s3 0) (nat(s0) already present), count 2
#   round 4: c1 gains nat(s4 0), count 2
#   round 5: both counters at threshold, nothing changes
THRESHOLD_2 = {
    "c1": {("nat", numeral(0)), ("nat", numeral(2)), ("nat", numeral(4))},
    "c2": {("nat", numeral(1)), ("nat", numeral(3))},
    "counts": {"c1": 2, "c2": 2},
    "steps": 5,
}


def evenodd_after(alpha):
    """Belief sets after alpha rounds of the mutual successor exchange."""
    return ({("nat", numeral(k)) for k in range(0, alpha + 1, 2)},
            {("nat", numeral(k)) for k in range(1, alpha + 1, 2)})


def preference_rank(candidates, prefs, attrs):
    """Brute force: score = satisfied preference atoms, sort by (-score, name)."""
    def score(c):
        return sum(1 for p in prefs if any(unify(p, a) is not None for a in attrs.get(c, ())))
    return sorted(candidates, key=lambda c: (-score(c), c))
