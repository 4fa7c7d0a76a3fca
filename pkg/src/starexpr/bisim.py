"""Bisimilarity: partition refinement, a brute-force oracle, minimization,
and the equivalence decision for expressions.

Behavioural equivalence is computed as the largest kernel bisimulation: the
coarsest partition under which every state's transition value, with targets
replaced by their blocks, is the same across each block.  For the branching
functors used here this coincides with bisimilarity via spans of system
homomorphisms, and by soundness/completeness of the loop axioms it also
decides provable equivalence of expressions.
"""

from __future__ import annotations

from .errors import LimitExceededError, TheoryMismatchError
from .semantics import State, System, TICK, reachable
from .syntax import Expr
from .theory import TheoryConfig, mval_map

Partition = dict[str, int]

BRUTE_STATE_BOUND = 8


def _mapped_value(sys: System, x: str, block: Partition):
    """beta(x) with state targets collapsed to their block ids."""

    def relabel(pair):
        action, tgt = pair
        if tgt is TICK:
            return (action, TICK)
        return (action, block[tgt.sid])

    return mval_map(relabel, sys.beta[x])


def _dense(sys: System, block: Partition) -> Partition:
    """Renumber blocks to 0..k-1 by first occurrence in state order."""
    ids: dict[int, int] = {}
    out = {}
    for x in sys.states:
        b = block[x]
        if b not in ids:
            ids[b] = len(ids)
        out[x] = ids[b]
    return out


def refine(sys: System) -> Partition:
    """The coarsest partition closed under one-step behaviour, computed by
    iterated splitting from the single-block partition."""
    block: Partition = {x: 0 for x in sys.states}
    nblocks = 1
    while True:
        sig_ids: dict = {}
        new: Partition = {}
        for x in sys.states:
            sig = (block[x], _mapped_value(sys, x, block))
            if sig not in sig_ids:
                sig_ids[sig] = len(sig_ids)
            new[x] = sig_ids[sig]
        if len(sig_ids) == nblocks:
            return new
        block, nblocks = new, len(sig_ids)


def _partitions(items: list[str]):
    """All set partitions, each as a block-id map in first-occurrence order."""
    n = len(items)
    assign = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield {items[j]: assign[j] for j in range(n)}
            return
        for b in range(used + 1):
            assign[i] = b
            yield from rec(i + 1, max(used, b + 1))

    yield from rec(0, 0)


def _consistent(sys: System, block: Partition) -> bool:
    seen: dict[int, object] = {}
    for x in sys.states:
        val = _mapped_value(sys, x, block)
        b = block[x]
        if b in seen:
            if seen[b] != val:
                return False
        else:
            seen[b] = val
    return True


def _coarser_eq(p: Partition, q: Partition, states) -> bool:
    """p identifies at least everything q identifies."""
    rep: dict[int, int] = {}
    for x in states:
        b = q[x]
        if b in rep:
            if p[x] != rep[b]:
                return False
        else:
            rep[b] = p[x]
    return True


def brute_bisim(sys: System) -> Partition:
    """Oracle: enumerate every equivalence relation on the states and return
    the coarsest one closed under one-step behaviour.  Guarded to small
    systems; must agree with `refine`."""
    if len(sys.states) > BRUTE_STATE_BOUND:
        raise LimitExceededError(
            f"brute-force oracle is limited to {BRUTE_STATE_BOUND} states")
    states = list(sys.states)
    good = [p for p in _partitions(states) if _consistent(sys, p)]
    good.sort(key=lambda p: len(set(p.values())))
    for cand in good:
        if all(_coarser_eq(cand, other, states) for other in good):
            return _dense(sys, cand)
    raise AssertionError("no coarsest behavioural partition; functor misbehaves")


def disjoint_union(sys1: System, sys2: System) -> tuple[System, dict, dict]:
    """Concatenate two systems over the same theory, renaming states apart.
    Returns the union and the two renaming maps."""
    if sys1.cfg != sys2.cfg:
        raise TheoryMismatchError(
            f"cannot combine {sys1.cfg.selector()} with {sys2.cfg.selector()}")
    left = {x: f"l:{x}" for x in sys1.states}
    right = {x: f"r:{x}" for x in sys2.states}

    def relabel(names):
        def f(pair):
            action, tgt = pair
            if tgt is TICK:
                return (action, TICK)
            return (action, State(names[tgt.sid]))
        return f

    states = tuple(left[x] for x in sys1.states) + tuple(right[x] for x in sys2.states)
    beta = {left[x]: mval_map(relabel(left), sys1.beta[x]) for x in sys1.states}
    beta.update({right[x]: mval_map(relabel(right), sys2.beta[x]) for x in sys2.states})
    return System(sys1.cfg, states, beta), left, right


def bisimilar(sys1: System, x1: str, sys2: System, x2: str) -> bool:
    """Whether two states of two systems are behaviourally equivalent."""
    union, left, right = disjoint_union(sys1, sys2)
    part = refine(union)
    return part[left[x1]] == part[right[x2]]


def minimize(sys: System) -> tuple[System, dict[str, str]]:
    """Quotient by behavioural equivalence.

    Returns the quotient system and the quotient map h, which is a system
    homomorphism; in the result, equivalence of states is equality.
    """
    part = refine(sys)
    h = {x: f"b{part[x]}" for x in sys.states}

    def relabel(pair):
        action, tgt = pair
        if tgt is TICK:
            return (action, TICK)
        return (action, State(h[tgt.sid]))

    states: list[str] = []
    beta = {}
    for x in sys.states:
        bx = h[x]
        if bx not in beta:
            states.append(bx)
            beta[bx] = mval_map(relabel, sys.beta[x])
    root = h[sys.root] if sys.root is not None else None
    return System(sys.cfg, tuple(states), beta, root=root), h


def decide_equiv(cfg: TheoryConfig, e1: Expr, e2: Expr) -> bool:
    """Decide provable equivalence of two expressions (equivalently, their
    bisimilarity as states of the syntactic system)."""
    sys1, root1 = reachable(cfg, e1)
    sys2, root2 = reachable(cfg, e2)
    return bisimilar(sys1, root1, sys2, root2)
