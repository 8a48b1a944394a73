"""Single-pair precedence queries on one-semaphore traces.

``can_precede(g, v, w)`` decides whether some valid subschedule of the trace
executes v before w.  The reduction: a valid subschedule is a schedule of a
prefix subgraph (a cut), so v can precede w exactly when, among cuts whose
chain-of-w cutpoint is w itself and whose chain-of-v cutpoint does not
precede v, some cut's prefix graph admits a schedule ending in w with height
zero.  ``minheight`` computes that minimum height h*; v can precede w iff
h* == 0.

Two cooperating pieces:

``best(g, j, F, gamma)``
    Minimum height of a schedule-ending-in-``gamma(j)`` over all cuts that
    agree with ``gamma`` on the chains in F, choosing every other chain's
    cutpoint optimally.  The free chains' optimal cutpoints have a closed
    form: retreat each to the tallest N-hump below a threshold s determined
    by the pinned chains alone, so the whole minimization collapses to one
    merged-stats evaluation.

``minheight(g, v, w)``
    Runs ``best`` with F = {chain(v), chain(w)} for each candidate cutpoint
    of v's chain.  Only v itself and the tails of the humps of the chain's
    remainder need to be tried, and sliding the candidate forward changes
    the pinned decomposition by O(1) humps per step, so with the index
    trees the whole query costs O(n).

The module keeps a plain-list implementation of ``best`` (readable, used as
the public entry point and as a cross-check) next to the tree-backed query
path.  Queries build private tree instances, so concurrent queries on a
shared TraceGraph are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

from .humps import (
    ChainDecompTable,
    Hump,
    decomp,
    decomp_chain,
    decomp_prefix,
    merge_stats,
    node_height,
    _push,
)
from .trace import BOTTOM, Cut, NodeRef, TraceGraph, is_sentinel, node_cost
from .trees import HumpTree, PriorityTree

INF = float("inf")


@dataclass(frozen=True)
class JScheduleStats:
    """Height of an optimal schedule ending at a cut's j-th point.

    ``cut`` names a prefix subgraph realizing that height (diagnostic; the
    fast paths skip it).
    """

    height: int
    cut: Cut | None = None


def jopt(g: TraceGraph, gamma: Cut, j: int) -> int:
    """Height of an optimal schedule of the cut's prefix graph ending at gamma(j)."""
    xj = gamma.point(j)
    if xj == BOTTOM:
        raise ValueError("jopt needs a non-BOTTOM cutpoint for chain j")
    humps: list[Hump] = []
    total = 0
    for k in range(1, g.p + 1):
        x = gamma.point(k)
        if k == j:
            x = g.pre(x)
        humps.extend(decomp_prefix(g, x))
    stats = merge_stats(humps)
    return max(stats.height, stats.cost + node_height(node_cost(g, xj)))


def best(g: TraceGraph, j: int, F: set[int], gamma: Cut, want_cut: bool = False) -> JScheduleStats:
    """Fig-of-merit minimization with the chains in F pinned to gamma.

    Returns the height of an optimal schedule ending at gamma(j) over all
    cuts agreeing with gamma on F; never exceeds that of any such cut.
    """
    if j not in F:
        raise ValueError("F must contain j")
    xj = gamma.point(j)
    if xj == BOTTOM:
        raise ValueError("best needs a non-BOTTOM cutpoint for chain j")
    pinned: list[Hump] = []
    for k in sorted(F):
        x = gamma.point(k) if k != j else g.pre(xj)
        pinned.extend(decomp_prefix(g, x))
    s1 = max((h.height for h in pinned if h.cost < 0), default=0)
    splus = merge_stats([h for h in pinned if h.cost >= 0])
    hw = node_height(node_cost(g, xj))
    s2 = max(splus.height, splus.cost + hw)
    s = max(s1, s2)
    chosen = list(pinned)
    cutpoints: dict[int, NodeRef] = {}
    for k in range(1, g.p + 1):
        if k in F:
            cutpoints[k] = gamma.point(k)
            continue
        last = BOTTOM
        for h in decomp_chain(g, k):
            if h.cost < 0 and h.height < s:
                chosen.append(h)
                last = h.tail_ref()
            else:
                break
        cutpoints[k] = last
    stats = merge_stats(chosen)
    height = max(stats.height, stats.cost + hw)
    cut = Cut(tuple(cutpoints[k] for k in range(1, g.p + 1))) if want_cut else None
    return JScheduleStats(height, cut)


def _check_query_nodes(g: TraceGraph, v: NodeRef, w: NodeRef) -> None:
    for ref in (v, w):
        if is_sentinel(ref):
            raise ValueError(f"query node {ref} is a pseudo-node")
        g._check(ref)


def minheight(g: TraceGraph, v: NodeRef, w: NodeRef, _debug: bool = False) -> int:
    """Minimum height h* over subschedules containing v and ending at w.

    v and w must lie on different chains; v can precede w iff the result is
    zero.  O(n) per query.
    """
    _check_query_nodes(g, v, w)
    i, j = v.chain, w.chain
    if i == j:
        raise ValueError("minheight is for cross-chain pairs; use can_precede")
    cap = max(g.n, 1)
    ht = HumpTree(cap, debug=_debug)
    pt = PriorityTree(cap)
    for k in range(1, g.p + 1):
        if k != i and k != j:
            for h in decomp_chain(g, k):
                if h.cost < 0:
                    ht.insert(h.cost, h.height, "k")
    costs_j = g.cost_chains[j - 1]
    for h in decomp(costs_j[: w.pos - 1], chain=j):
        ht.insert(h.cost, h.height, "ij")
        if h.cost < 0:
            pt.insert(h.height)
    costs_i = g.cost_chains[i - 1]
    stack = decomp(costs_i[: v.pos], chain=i)
    for h in stack:
        ht.insert(h.cost, h.height, "ij")
        if h.cost < 0:
            pt.insert(h.height)
    suffix = decomp(costs_i[v.pos :], chain=i, start=v.pos + 1)
    hw = node_height(costs_j[w.pos - 1])

    def evaluate() -> int:
        s1 = pt.max_height()
        tph, tpc = ht.p_stats()
        s2 = max(tph, tpc + hw)
        s = s1 if s1 > s2 else s2
        mh, mc = ht.masked_stats(s, keep_ij=True)
        t = mc + hw
        return mh if mh > t else t

    h_star = evaluate()
    if _debug:
        gamma = Cut.bottoms(g).replace(j, w).replace(i, v)
        assert h_star == best(g, j, {i, j}, gamma).height
    for hump in suffix:
        pushed, popped = _push(stack, hump)
        for old in popped:
            ht.delete(old.cost, old.height, "ij")
            if old.cost < 0:
                pt.delete(old.height)
        ht.insert(pushed.cost, pushed.height, "ij")
        if pushed.cost < 0:
            pt.insert(pushed.height)
        h = evaluate()
        if _debug:
            gamma = Cut.bottoms(g).replace(j, w).replace(i, hump.tail_ref())
            assert h == best(g, j, {i, j}, gamma).height
        if h < h_star:
            h_star = h
    return h_star


def can_precede(g: TraceGraph, v: NodeRef, w: NodeRef) -> bool:
    """Whether some valid subschedule of g executes v before w.

    Cross-chain pairs reduce to ``minheight(v, w) == 0``.  Same-chain pairs
    follow chain order, but additionally the prefix of the chain up to w
    must be completable into a valid subschedule (the graph may deadlock
    before w); that is ``best`` with only w's chain pinned.
    """
    _check_query_nodes(g, v, w)
    if v == w:
        return False
    if v.chain == w.chain:
        if v.pos >= w.pos:
            return False
        gamma = Cut.bottoms(g).replace(w.chain, w)
        return best(g, w.chain, {w.chain}, gamma).height == 0
    return minheight(g, v, w) == 0
