"""Symbolic Kripke structures and their explicit-state expansion.

A model is a set of Boolean state variables with an initial-state predicate,
a (total) transition predicate over current and next variables, optional
DEFINE macros that name predicates over the current state, and optional
FAIRNESS constraints (acceptance sets).  The line-oriented text format is::

    # comment
    VAR b0 b1 b2
    INPUT i
    INIT x0
    TRANS x0 -> next(b0) & !next(b1) & !next(b2)
    DEFINE x0 := !b2 & !b1 & !b0
    FAIRNESS x4
    SPEC G !x4

Several TRANS and FAIRNESS lines may appear; TRANS lines are conjoined.
Expressions use ``! & | -> <->``, ``true``/``false``, parentheses, names,
and ``next(name)`` (TRANS only, state variables only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ModelError(Exception):
    """Malformed model text or inconsistent declarations."""


class TotalityError(ModelError):
    """A state without successors was found during explicit expansion."""

    def __init__(self, state_desc):
        super().__init__(f"transition relation is not total: state {state_desc} has no successor")
        self.state_desc = state_desc


@dataclass(frozen=True)
class BoolExpr:
    """Boolean expression node: var, next, true, false, !, &, |, ->, <->."""

    kind: str
    name: Optional[str] = None
    args: tuple = ()

    def __str__(self):
        return expr_to_text(self)


BTRUE = BoolExpr("true")
BFALSE = BoolExpr("false")


def bvar(name):
    return BoolExpr("var", name=name)


def bnext(name):
    return BoolExpr("next", name=name)


def bnot(a):
    return BoolExpr("!", args=(a,))


def band(a, b):
    return BoolExpr("&", args=(a, b))


def bor(a, b):
    return BoolExpr("|", args=(a, b))


def bimp(a, b):
    return BoolExpr("->", args=(a, b))


def biff(a, b):
    return BoolExpr("<->", args=(a, b))


def band_all(exprs):
    exprs = list(exprs)
    if not exprs:
        return BTRUE
    out = exprs[0]
    for e in exprs[1:]:
        out = band(out, e)
    return out


def bor_all(exprs):
    exprs = list(exprs)
    if not exprs:
        return BFALSE
    out = exprs[0]
    for e in exprs[1:]:
        out = bor(out, e)
    return out


@dataclass(frozen=True)
class SymbolicModel:
    vars: tuple
    init: BoolExpr
    trans: BoolExpr
    defines: tuple  # ((name, expr), ...) in declaration order
    fairness: tuple
    inputs: frozenset
    spec_text: Optional[str] = None

    @property
    def define_map(self):
        return dict(self.defines)

    def names(self):
        return set(self.vars) | {n for n, _ in self.defines}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789=")


def _tokenize_expr(text, line_no):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t":
            i += 1
            continue
        col = i + 1
        if c in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(("ident", text[i:j], line_no, col))
            i = j
        elif c == "(":
            tokens.append(("(", c, line_no, col))
            i += 1
        elif c == ")":
            tokens.append((")", c, line_no, col))
            i += 1
        elif c == "!":
            tokens.append(("op", "!", line_no, col))
            i += 1
        elif c == "&":
            tokens.append(("op", "&", line_no, col))
            i += 1
        elif c == "|":
            tokens.append(("op", "|", line_no, col))
            i += 1
        elif c == "-" and text[i : i + 2] == "->":
            tokens.append(("op", "->", line_no, col))
            i += 2
        elif c == "<" and text[i : i + 3] == "<->":
            tokens.append(("op", "<->", line_no, col))
            i += 3
        else:
            raise ModelError(f"line {line_no}, column {col}: unexpected character {c!r}")
    tokens.append(("eof", None, line_no, n + 1))
    return tokens


class _ExprParser:
    """Boolean expressions with the same precedence ladder as formulas."""

    def __init__(self, text, line_no, allow_next):
        self.tokens = _tokenize_expr(text, line_no)
        self.pos = 0
        self.allow_next = allow_next

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def error(self, message):
        kind, value, line, col = self.peek()
        shown = value if value is not None else "end of line"
        raise ModelError(f"line {line}, column {col}: {message}, got {shown!r}")

    def parse(self):
        e = self.parse_iff()
        if self.peek()[0] != "eof":
            self.error("trailing input after expression")
        return e

    def parse_iff(self):
        left = self.parse_imp()
        if self.peek()[:2] == ("op", "<->"):
            self.advance()
            return biff(left, self.parse_iff())
        return left

    def parse_imp(self):
        left = self.parse_or()
        if self.peek()[:2] == ("op", "->"):
            self.advance()
            return bimp(left, self.parse_imp())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[:2] == ("op", "|"):
            self.advance()
            left = bor(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.peek()[:2] == ("op", "&"):
            self.advance()
            left = band(left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.peek()[:2] == ("op", "!"):
            self.advance()
            return bnot(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        kind, value, line, col = self.peek()
        if kind == "ident":
            self.advance()
            if value == "true":
                return BTRUE
            if value == "false":
                return BFALSE
            if value == "next":
                if self.peek()[0] != "(":
                    self.error("expected '(' after next")
                if not self.allow_next:
                    raise ModelError(f"line {line}: next() is only allowed in TRANS expressions")
                self.advance()
                name_tok = self.peek()
                if name_tok[0] != "ident":
                    self.error("expected a variable name inside next()")
                self.advance()
                if self.peek()[0] != ")":
                    self.error("expected ')' after next(name")
                self.advance()
                return bnext(name_tok[1])
            return bvar(value)
        if kind == "(":
            self.advance()
            e = self.parse_iff()
            if self.peek()[0] != ")":
                self.error("expected ')'")
            self.advance()
            return e
        self.error("expected an expression")


def parse_expr(text, line_no=1, allow_next=False):
    return _ExprParser(text, line_no, allow_next).parse()


def parse_model(text) -> SymbolicModel:
    """Parse the model file format; see the module docstring for the grammar."""
    vars_, inputs = [], []
    init_expr = None
    trans_exprs = []
    defines = []
    fairness = []
    spec_text = None
    define_names = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        head = parts[0]
        rest = parts[1].strip() if len(parts) > 1 else ""
        if head == "VAR":
            names = rest.split()
            if not names:
                raise ModelError(f"line {line_no}: VAR needs at least one name")
            for name in names:
                if name in vars_:
                    raise ModelError(f"line {line_no}: duplicate variable {name!r}")
                if name in ("next", "true", "false"):
                    raise ModelError(f"line {line_no}: {name!r} is reserved")
                vars_.append(name)
        elif head == "INPUT":
            inputs.extend(rest.split())
        elif head == "INIT":
            if init_expr is not None:
                raise ModelError(f"line {line_no}: duplicate INIT section")
            init_expr = parse_expr(rest, line_no, allow_next=False)
        elif head == "TRANS":
            trans_exprs.append(parse_expr(rest, line_no, allow_next=True))
        elif head == "DEFINE":
            name, sep, body = rest.partition(":=")
            name = name.strip()
            if not sep:
                raise ModelError(f"line {line_no}: DEFINE needs 'name := expr'")
            if name in define_names or name in vars_:
                raise ModelError(f"line {line_no}: duplicate name {name!r}")
            if not name or name in ("next", "true", "false"):
                raise ModelError(f"line {line_no}: bad DEFINE name {name!r}")
            define_names.add(name)
            defines.append((name, parse_expr(body, line_no, allow_next=False)))
        elif head == "FAIRNESS":
            fairness.append(parse_expr(rest, line_no, allow_next=False))
        elif head == "SPEC":
            if spec_text is not None:
                raise ModelError(f"line {line_no}: duplicate SPEC section")
            spec_text = rest
        else:
            raise ModelError(f"line {line_no}: unknown section {head!r}")

    if not vars_:
        raise ModelError("model declares no VAR")

    m = SymbolicModel(
        vars=tuple(vars_),
        init=init_expr if init_expr is not None else BTRUE,
        trans=band_all(trans_exprs),
        defines=tuple(defines),
        fairness=tuple(fairness),
        inputs=frozenset(inputs),
        spec_text=spec_text,
    )
    _validate(m)
    return m


def _validate(m):
    known = set(m.vars)
    define_map = dict(m.defines)

    for name in m.inputs:
        if name not in m.vars:
            raise ModelError(f"INPUT {name!r} is not a declared state variable")

    # Defines must be acyclic and reference earlier names only.
    state = {}

    def visit(name):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            raise ModelError(f"cyclic DEFINE involving {name!r}")
        state[name] = 1
        for ref in _referenced_names(define_map[name]):
            if ref in define_map:
                visit(ref)
            elif ref not in known:
                raise ModelError(f"DEFINE {name!r} references undefined name {ref!r}")
        state[name] = 2

    for name in define_map:
        visit(name)

    all_names = known | set(define_map)
    for label, expr in (
        ("INIT", m.init),
        ("TRANS", m.trans),
        *((f"FAIRNESS", e) for e in m.fairness),
    ):
        for ref in _referenced_names(expr):
            if ref not in all_names:
                raise ModelError(f"{label} references undefined name {ref!r}")
        for nxt in _next_names(expr):
            if nxt not in m.vars:
                raise ModelError(f"{label}: next({nxt}) must name a state variable")


def _referenced_names(expr):
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if e.kind == "var":
            out.add(e.name)
        stack.extend(e.args)
    return out


def _next_names(expr):
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if e.kind == "next":
            out.add(e.name)
        stack.extend(e.args)
    return out


def referenced_names_expanded(expr, defines) -> set:
    """Names of state variables occurring in ``expr`` after define expansion."""
    define_map = dict(defines) if not isinstance(defines, dict) else defines
    out = set()
    seen = set()

    def walk(e):
        if e.kind in ("var", "next"):
            if e.name in define_map:
                if e.name not in seen:
                    seen.add(e.name)
                    walk(define_map[e.name])
            else:
                out.add(e.name)
            return
        for a in e.args:
            walk(a)

    walk(expr)
    return out


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_expr(expr, cur, nxt=None, defines=None):
    """Evaluate over bool mappings; ``defines`` resolves macro names."""
    define_map = defines or {}
    if not isinstance(define_map, dict):
        define_map = dict(define_map)

    def ev(e):
        k = e.kind
        if k == "var":
            if e.name in cur:
                return cur[e.name]
            if e.name in define_map:
                return ev(define_map[e.name])
            raise ModelError(f"unknown name {e.name!r}")
        if k == "next":
            if nxt is None:
                raise ModelError("next() evaluated without a next state")
            return nxt[e.name]
        if k == "true":
            return True
        if k == "false":
            return False
        if k == "!":
            return not ev(e.args[0])
        if k == "&":
            return ev(e.args[0]) and ev(e.args[1])
        if k == "|":
            return ev(e.args[0]) or ev(e.args[1])
        if k == "->":
            return (not ev(e.args[0])) or ev(e.args[1])
        if k == "<->":
            return ev(e.args[0]) == ev(e.args[1])
        raise ModelError(f"unknown expression kind {k!r}")

    return ev(expr)


def eval_expr_np(expr, cur, nxt=None, defines=None):
    """Vectorised evaluation; ``cur``/``nxt`` map names to bool ndarrays."""
    define_map = defines or {}
    if not isinstance(define_map, dict):
        define_map = dict(define_map)
    cache = {}

    def ev(e):
        k = e.kind
        if k == "var":
            if e.name in cur:
                return cur[e.name]
            if e.name in define_map:
                if e.name not in cache:
                    cache[e.name] = ev(define_map[e.name])
                return cache[e.name]
            raise ModelError(f"unknown name {e.name!r}")
        if k == "next":
            if nxt is None:
                raise ModelError("next() evaluated without a next state")
            return nxt[e.name]
        if k == "true":
            return np.True_
        if k == "false":
            return np.False_
        a = ev(e.args[0])
        if k == "!":
            return ~a
        b = ev(e.args[1])
        if k == "&":
            return a & b
        if k == "|":
            return a | b
        if k == "->":
            return ~a | b
        if k == "<->":
            return ~(a ^ b)
        raise ModelError(f"unknown expression kind {k!r}")

    out = ev(expr)
    return out


# ---------------------------------------------------------------------------
# Explicit expansion
# ---------------------------------------------------------------------------


@dataclass
class ExplicitModel:
    """All 2^n valuations of a model, with labels, edges, and fair sets.

    State ``s`` assigns variable ``vars[j]`` the bit ``(s >> j) & 1``.
    """

    var_names: tuple
    define_names: tuple
    nstates: int
    initial: tuple
    succ: tuple  # per state, sorted tuple of successor states
    labels: tuple  # per state, frozenset of true var/define names
    fair_sets: tuple  # per acceptance set, frozenset of states

    def bits(self, state):
        return tuple((state >> j) & 1 for j in range(len(self.var_names)))

    def assignment(self, state):
        return {v: bool((state >> j) & 1) for j, v in enumerate(self.var_names)}

    def describe(self, state):
        return " ".join(f"{v}={(state >> j) & 1}" for j, v in enumerate(self.var_names))

    def names(self):
        return set(self.var_names) | set(self.define_names)


def explicit_expand(m: SymbolicModel, max_bits=16, require_total=True) -> ExplicitModel:
    """Enumerate all valuations of ``m`` and build the explicit structure.

    Totality of the transition relation is checked eagerly unless
    ``require_total`` is false (useful for automata whose dead valuations are
    never part of a fair path).
    """
    n = len(m.vars)
    if n > max_bits:
        raise ModelError(f"model has {n} state bits, limit is {max_bits}")
    nstates = 1 << n
    define_map = dict(m.defines)

    idx = np.arange(nstates, dtype=np.int64)
    cur = {v: ((idx >> j) & 1).astype(bool) for j, v in enumerate(m.vars)}

    init_mask = np.broadcast_to(eval_expr_np(m.init, cur, None, define_map), (nstates,))
    label_masks = {}
    for v in m.vars:
        label_masks[v] = cur[v]
    for name, expr in m.defines:
        label_masks[name] = np.broadcast_to(eval_expr_np(expr, cur, None, define_map), (nstates,))

    fair_sets = []
    for expr in m.fairness:
        mask = np.broadcast_to(eval_expr_np(expr, cur, None, define_map), (nstates,))
        fair_sets.append(frozenset(int(s) for s in np.nonzero(mask)[0]))

    # Successors, chunked so cur_chunk x all-next stays bounded in memory.
    succ = []
    chunk = max(1, (1 << 22) // nstates)
    nxt_row = {v: arr.reshape(1, nstates) for v, arr in cur.items()}
    for lo in range(0, nstates, chunk):
        hi = min(nstates, lo + chunk)
        cur_col = {v: cur[v][lo:hi].reshape(hi - lo, 1) for v in m.vars}
        mat = eval_expr_np(m.trans, cur_col, nxt_row, define_map)
        mat = np.broadcast_to(mat, (hi - lo, nstates))
        for r in range(hi - lo):
            row = np.nonzero(mat[r])[0]
            if require_total and row.size == 0:
                raise TotalityError(_describe_state(m.vars, lo + r))
            succ.append(tuple(int(s) for s in row))

    labels = []
    for s in range(nstates):
        labels.append(frozenset(name for name, mask in label_masks.items() if mask[s]))

    return ExplicitModel(
        var_names=m.vars,
        define_names=tuple(n for n, _ in m.defines),
        nstates=nstates,
        initial=tuple(int(s) for s in np.nonzero(init_mask)[0]),
        succ=tuple(succ),
        labels=tuple(labels),
        fair_sets=tuple(fair_sets),
    )


def _describe_state(var_names, state):
    return " ".join(f"{v}={(state >> j) & 1}" for j, v in enumerate(var_names))


def reachable_states(em: ExplicitModel) -> set:
    seen = set(em.initial)
    frontier = list(em.initial)
    while frontier:
        s = frontier.pop()
        for t in em.succ[s]:
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    return seen


# ---------------------------------------------------------------------------
# Variable optimisation support
# ---------------------------------------------------------------------------


def input_vars_irrelevant_for_fairness(m: SymbolicModel) -> frozenset:
    """Declared inputs that fairness cannot observe and TRANS never constrains.

    A sound syntactic under-approximation: the variable must not occur in any
    fairness expression after define expansion and must never appear under
    next() in TRANS.
    """
    define_map = dict(m.defines)
    constrained = _next_names(m.trans)
    fair_names = set()
    for expr in m.fairness:
        fair_names |= referenced_names_expanded(expr, define_map)
    return frozenset(
        v for v in m.inputs if v not in constrained and v not in fair_names
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_EXPR_PREC = {"<->": 0, "->": 1, "|": 2, "&": 3}


def expr_to_text(e, parent_prec=-1):
    k = e.kind
    if k == "var":
        return e.name
    if k == "next":
        return f"next({e.name})"
    if k in ("true", "false"):
        return k
    if k == "!":
        return "!" + expr_to_text(e.args[0], 5)
    prec = _EXPR_PREC[k]
    if k in ("&", "|"):
        left = expr_to_text(e.args[0], prec)
        right = expr_to_text(e.args[1], prec + 1)
    else:
        left = expr_to_text(e.args[0], prec + 1)
        right = expr_to_text(e.args[1], prec)
    text = f"{left} {k} {right}"
    if prec < parent_prec:
        return f"({text})"
    return text


def model_to_text(m: SymbolicModel) -> str:
    lines = []
    lines.append("VAR " + " ".join(m.vars))
    if m.inputs:
        lines.append("INPUT " + " ".join(sorted(m.inputs)))
    for name, expr in m.defines:
        lines.append(f"DEFINE {name} := {expr_to_text(expr)}")
    lines.append(f"INIT {expr_to_text(m.init)}")
    lines.append(f"TRANS {expr_to_text(m.trans)}")
    for expr in m.fairness:
        lines.append(f"FAIRNESS {expr_to_text(expr)}")
    if m.spec_text is not None:
        lines.append(f"SPEC {m.spec_text}")
    return "\n".join(lines) + "\n"
