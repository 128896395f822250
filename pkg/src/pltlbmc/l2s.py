"""Liveness-to-safety: turn fair-path existence into reachability.

The transformed model carries a shadow copy of the (unoptimised) state
variables, an oracle bit that guesses the loop start and latches the copy,
an in-loop flag, and one sticky flag per acceptance set.  ``LoopClosed`` is a
macro that is true exactly when the loop has been entered, every acceptance
set has been visited inside it, and the current state equals the recorded
copy; reaching a LoopClosed state is equivalent to the existence of an
initialised fair path in the original model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    SymbolicModel,
    BoolExpr,
    band,
    band_all,
    biff,
    bimp,
    bnext,
    bnot,
    bor,
    bvar,
    explicit_expand,
    input_vars_irrelevant_for_fairness,
    ModelError,
)

SAVE_VAR = "l2s_save"
INLOOP_VAR = "l2s_inloop"
ACC_PREFIX = "l2s_acc"
COPY_PREFIX = "l2s_copy_"
TARGET = "LoopClosed"


class L2SError(ModelError):
    pass


@dataclass(frozen=True)
class L2SModel:
    model: SymbolicModel
    target: str
    original_vars: tuple
    copied_vars: tuple  # originals that take part in loop detection
    optimised_out: tuple


@dataclass(frozen=True)
class Reachable:
    depth: int
    trace: tuple  # per step, dict var -> bool over the transformed model


@dataclass(frozen=True)
class Unreachable:
    pass


def _to_next(expr):
    """Substitute every variable by its next-state copy."""
    k = expr.kind
    if k == "var":
        return bnext(expr.name)
    if k == "next":
        raise L2SError("next() inside a state expression")
    if k in ("true", "false"):
        return expr
    return BoolExpr(k, args=tuple(_to_next(a) for a in expr.args))


def _expand(expr, define_map):
    k = expr.kind
    if k == "var" and expr.name in define_map:
        return _expand(define_map[expr.name], define_map)
    if expr.args:
        return BoolExpr(k, name=expr.name, args=tuple(_expand(a, define_map) for a in expr.args))
    return expr


def l2s_transform(m: SymbolicModel, optimise=False) -> L2SModel:
    """Build the safety model whose LoopClosed states witness fair paths."""
    define_map = m.define_map
    reserved = {SAVE_VAR, INLOOP_VAR, TARGET}
    reserved |= {f"{ACC_PREFIX}{i}" for i in range(len(m.fairness))}
    clash = reserved & (set(m.vars) | set(define_map))
    if clash:
        raise L2SError(f"model already uses reserved names: {sorted(clash)}")

    dropped = input_vars_irrelevant_for_fairness(m) if optimise else frozenset()
    copied = tuple(v for v in m.vars if v not in dropped)
    copies = {v: COPY_PREFIX + v for v in copied}
    clash = set(copies.values()) & (set(m.vars) | set(define_map))
    if clash:
        raise L2SError(f"model already uses reserved names: {sorted(clash)}")

    acc_vars = [f"{ACC_PREFIX}{i}" for i in range(len(m.fairness))]
    new_vars = tuple(m.vars) + tuple(copies[v] for v in copied) + (SAVE_VAR, INLOOP_VAR) + tuple(acc_vars)

    init = band_all(
        [m.init, bnot(bvar(SAVE_VAR)), bnot(bvar(INLOOP_VAR))]
        + [bnot(bvar(a)) for a in acc_vars]
    )

    trans_parts = [m.trans]
    # the copy latches the pre-loop state exactly when the oracle fires
    for v in copied:
        c = copies[v]
        trans_parts.append(bimp(bnext(SAVE_VAR), biff(bnext(c), bvar(v))))
        trans_parts.append(bimp(bnot(bnext(SAVE_VAR)), biff(bnext(c), bvar(c))))
    trans_parts.append(biff(bnext(INLOOP_VAR), bor(bvar(INLOOP_VAR), bnext(SAVE_VAR))))
    trans_parts.append(bimp(bvar(INLOOP_VAR), bnot(bnext(SAVE_VAR))))
    for i, fexpr in enumerate(m.fairness):
        fnext = _to_next(_expand(fexpr, define_map))
        trans_parts.append(
            biff(bnext(acc_vars[i]), bor(bvar(acc_vars[i]), band(bnext(INLOOP_VAR), fnext)))
        )

    loop_closed = band_all(
        [bvar(INLOOP_VAR)]
        + [biff(bvar(v), bvar(copies[v])) for v in copied]
        + [bvar(a) for a in acc_vars]
    )

    out = SymbolicModel(
        vars=new_vars,
        init=init,
        trans=band_all(trans_parts),
        defines=tuple(m.defines) + ((TARGET, loop_closed),),
        fairness=(),
        inputs=m.inputs,
        spec_text=f"G !{TARGET}",
    )
    return L2SModel(
        model=out,
        target=TARGET,
        original_vars=tuple(m.vars),
        copied_vars=copied,
        optimised_out=tuple(sorted(dropped)),
    )


def check_l2s_reachability(l: L2SModel, max_bits=16):
    """Breadth-first search for the shortest reachable LoopClosed state."""
    em = explicit_expand(l.model, max_bits=max_bits)
    parent = {}
    frontier = list(em.initial)
    seen = set(frontier)
    depth = 0
    while frontier:
        hit = next((s for s in frontier if l.target in em.labels[s]), None)
        if hit is not None:
            trace = []
            s = hit
            while True:
                trace.append(em.assignment(s))
                if s not in parent:
                    break
                s = parent[s]
            trace.reverse()
            return Reachable(depth=depth, trace=tuple(trace))
        nxt = []
        for s in frontier:
            for t in em.succ[s]:
                if t not in seen:
                    seen.add(t)
                    parent[t] = s
                    nxt.append(t)
        frontier = nxt
        depth += 1
    return Unreachable()
