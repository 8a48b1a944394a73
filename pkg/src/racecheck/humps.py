"""Hump decomposition and optimal scheduling of disjoint chains.

This module is the sequencing engine the race queries are built on.  The
running sums of node costs along a chain trace out a skyline; a *hump* is a
run of nodes containing a peak such that everything before the peak stays at
nonnegative running height and everything after it stays at or above the
run's total cost.  Humps are the unit of scheduling: the nodes of a hump can
always be executed back to back without making any schedule worse, so a
chain can be summarized by the (cost, height) pairs of its humps and the
internal node structure never needs to be consulted again.

Key facts the rest of the library leans on:

* ``decomp`` splits a chain into humps, deterministically.  Humps with
  negative cost (N-humps) come first with strictly increasing heights,
  then humps with nonnegative cost (P-humps) with strictly decreasing
  reverse heights, and the N/P boundary falls at the first global valley
  of the running sum.
* ``concat_decomp`` rebuilds the decomposition of a concatenation from the
  two halves' decompositions in time linear in the number of humps: only a
  run of humps around the join can coalesce.
* Interleaving the humps of several chains in *standard order* (N-humps by
  ascending height, then P-humps by descending reverse height) yields a
  schedule of minimum possible height, so ``opt_height`` of a chain graph
  is just the height of that merged sequence.

Heights are clamped at zero: the height of a sequence is max(0, max running
sum).  The *fall* (reverse height) of a sequence is its height minus its
cost; both are always nonnegative.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .trace import BOTTOM, NodeRef, TraceGraph


class SeqStats(NamedTuple):
    """Summary of a node sequence: total cost, clamped height, reverse height."""

    cost: int
    height: int
    fall: int


EMPTY_STATS = SeqStats(0, 0, 0)


class Hump(NamedTuple):
    """A hump: a schedulable run of consecutive chain nodes.

    ``peak`` is the maximum running sum inside the run, *unclamped* (it is
    negative for a run that only descends).  ``first``/``last`` are 1-based
    positions within ``chain``; synthetic humps not tied to a graph use
    chain 0.
    """

    cost: int
    peak: int
    chain: int
    first: int
    last: int

    @property
    def height(self) -> int:
        return self.peak if self.peak > 0 else 0

    @property
    def fall(self) -> int:
        return self.height - self.cost

    @property
    def is_n(self) -> bool:
        return self.cost < 0

    @property
    def stats(self) -> SeqStats:
        h = self.height
        return SeqStats(self.cost, h, h - self.cost)

    def tail_ref(self) -> NodeRef:
        return NodeRef(self.chain, self.last)


def seq_stats(costs: Iterable[int]) -> SeqStats:
    """Cost, height and fall of a node-cost sequence (empty allowed)."""
    total = 0
    peak = 0
    for c in costs:
        total += c
        if total > peak:
            peak = total
    return SeqStats(total, peak, peak - total)


def stats_concat(a: SeqStats, b: SeqStats) -> SeqStats:
    """Stats of the concatenation ab, from the stats of a and b."""
    cost = a.cost + b.cost
    height = max(a.height, a.cost + b.height)
    return SeqStats(cost, height, height - cost)


def node_height(cost: int) -> int:
    """Height of a single node viewed as a one-element sequence."""
    return cost if cost > 0 else 0


def is_hump(costs: Sequence[int]) -> tuple[bool, int | None]:
    """Whether a cost sequence is a hump; returns the earliest useful peak.

    A peak (node of maximum running sum) is useful when every node strictly
    before it has nonnegative running sum and every node strictly after it
    has running sum at least the total cost.  The returned index is 1-based.
    """
    if not costs:
        raise ValueError("empty sequence cannot be a hump")
    heights = []
    run = 0
    for c in costs:
        run += c
        heights.append(run)
    total = run
    top = max(heights)
    first_neg = next((i + 1 for i, h in enumerate(heights) if h < 0), len(costs) + 1)
    last_below = 0
    for i, h in enumerate(heights):
        if h < total:
            last_below = i + 1
    for i, h in enumerate(heights):
        pos = i + 1
        if h == top and last_below <= pos <= first_neg:
            return True, pos
    return False, None


# --- canonical decomposition --------------------------------------------------


def _join(left: Hump, right: Hump) -> Hump:
    return Hump(
        left.cost + right.cost,
        max(left.peak, left.cost + right.peak),
        left.chain,
        left.first,
        right.last,
    )


def _mergeable(left: Hump, right: Hump) -> bool:
    """Whether the canonical decomposition fuses these adjacent humps.

    The rules keep every stack entry a genuine hump and never let a hump
    straddle the chain's first global valley (an N-hump never absorbs a
    following P-hump):

    * N then P: never merged.
    * P then N: the concatenation is always a hump, and leaving the pair
      split would put a negative-cost hump after a nonnegative one.
    * N then N: merged exactly when the left peak still dominates, i.e.
      peak(L) >= cost(L) + peak(R); otherwise the pair already has strictly
      increasing heights and the concatenation has no useful peak.
    * P then P: merged exactly when the right peak dominates, i.e.
      cost(L) + peak(R) >= peak(L); otherwise reverse heights already
      strictly decrease.
    """
    cl = left.cost
    cr = right.cost
    if cl < 0:
        if cr >= 0:
            return False
        return left.peak >= cl + right.peak
    if cr < 0:
        return True
    return cl + right.peak >= left.peak


def _push(stack: list[Hump], x: Hump) -> tuple[Hump, list[Hump]]:
    """Append hump x to a canonical stack; returns (pushed, popped)."""
    popped: list[Hump] = []
    while stack and _mergeable(stack[-1], x):
        top = stack.pop()
        popped.append(top)
        x = _join(top, x)
    stack.append(x)
    popped.reverse()
    return x, popped


def decomp(costs: Sequence[int], chain: int = 0, start: int = 1) -> list[Hump]:
    """Canonical hump decomposition of a chain segment.

    ``chain`` and ``start`` fix the node addressing of the produced humps;
    the default produces synthetic chain-0 humps for free-standing cost
    sequences.  Runs in time linear in the segment length.
    """
    stack: list[Hump] = []
    pos = start
    for c in costs:
        _push(stack, Hump(c, c, chain, pos, pos))
        pos += 1
    return stack


def concat_decomp(left: Sequence[Hump], right: Sequence[Hump]) -> list[Hump]:
    """Decomposition of the concatenated segment, from the two halves'.

    Costs O(len(left) + len(right)) hump operations.  The halves must be
    adjacent pieces of one chain (checked when both carry span data).
    """
    if left and right:
        a, b = left[-1], right[0]
        if a.chain != b.chain or a.last + 1 != b.first:
            raise ValueError(f"segments are not adjacent: ...{a} | {b}...")
    out = list(left)
    for h in right:
        _push(out, h)
    return out


def decomp_chain(g: TraceGraph, i: int) -> list[Hump]:
    return decomp(g.cost_chains[i - 1], chain=i)


def decomp_prefix(g: TraceGraph, v: NodeRef) -> list[Hump]:
    """Decomposition of everything up to and including v (empty for BOTTOM)."""
    if v == BOTTOM:
        return []
    return decomp(g.cost_chains[v.chain - 1][: v.pos], chain=v.chain)


def decomp_suffix(g: TraceGraph, v: NodeRef) -> list[Hump]:
    """Decomposition of v's chain from v (inclusive) to its end."""
    return decomp(
        g.cost_chains[v.chain - 1][v.pos - 1 :], chain=v.chain, start=v.pos
    )


def flatten(humps: Iterable[Hump]) -> list[NodeRef]:
    """Node references of the humps' spans, in the given hump order."""
    out = []
    for h in humps:
        out.extend(NodeRef(h.chain, k) for k in range(h.first, h.last + 1))
    return out


# --- standard order and merging -----------------------------------------------


def standard_sort_key(h: Hump) -> tuple[int, int, int, int]:
    """Sort key realizing standard order with deterministic tie-breaking.

    Negative-cost humps first by ascending height, then nonnegative-cost
    humps by descending reverse height; ties go to the lower chain index,
    then the earlier position.
    """
    if h.cost < 0:
        return (0, h.height, h.chain, h.first)
    return (1, -h.fall, h.chain, h.first)


def standard_order_cmp(a: Hump, b: Hump) -> int:
    ka, kb = standard_sort_key(a), standard_sort_key(b)
    return -1 if ka < kb else (1 if ka > kb else 0)


def merge(humps: Iterable[Hump]) -> tuple[list[Hump], SeqStats]:
    """Humps arranged in standard order, plus the stats of that arrangement.

    When the humps are drawn from chain decompositions, standard order
    respects each chain's internal order, so the flattened arrangement is a
    schedule of the nodes involved, and an optimal one.
    """
    ordered = sorted(humps, key=standard_sort_key)
    return ordered, merge_stats_ordered(ordered)


def merge_stats(humps: Iterable[Hump]) -> SeqStats:
    return merge_stats_ordered(sorted(humps, key=standard_sort_key))


def merge_stats_ordered(ordered: Sequence[Hump]) -> SeqStats:
    cost = 0
    height = 0
    for h in ordered:
        hh = h.peak if h.peak > 0 else 0
        t = cost + hh
        if t > height:
            height = t
        cost += h.cost
    return SeqStats(cost, height, height - cost)


def opt_height(g: TraceGraph) -> int:
    """Minimum possible height over all schedules of the chain graph.

    Zero exactly when the trace admits a complete valid schedule (the
    semaphore never goes negative).
    """
    humps: list[Hump] = []
    for i in range(1, g.p + 1):
        humps.extend(decomp_chain(g, i))
    return merge_stats(humps).height


def optimal_schedule(g: TraceGraph) -> tuple[list[NodeRef], int]:
    """A minimum-height schedule of the whole graph, and its height."""
    humps: list[Hump] = []
    for i in range(1, g.p + 1):
        humps.extend(decomp_chain(g, i))
    ordered, stats = merge(humps)
    return flatten(ordered), stats.height


# --- incremental prefix decompositions ----------------------------------------


class ChainDecompTable:
    """Prefix decompositions of every chain, with per-node undo records.

    For chain i, ``steps[i][t]`` records how appending node t changed the
    canonical stack: a run of humps was popped and one merged hump pushed.
    Walking t upward replays the records; walking t downward inverts them
    (delete the pushed hump, restore the popped lineup).  The sweep
    algorithms use this to slide a chain's cutpoint one node at a time while
    touching only O(1) humps per move on +-1 chains.
    """

    def __init__(self, g: TraceGraph):
        self.g = g
        self.full: dict[int, list[Hump]] = {}
        self.steps: dict[int, list[tuple[Hump, tuple[Hump, ...]] | None]] = {}
        for i in range(1, g.p + 1):
            stack: list[Hump] = []
            steps: list[tuple[Hump, tuple[Hump, ...]] | None] = [None]
            for t, c in enumerate(g.cost_chains[i - 1], start=1):
                pushed, popped = _push(stack, Hump(c, c, i, t, t))
                steps.append((pushed, tuple(popped)))
            self.full[i] = stack
            self.steps[i] = steps

    def prefix(self, i: int, t: int) -> list[Hump]:
        """Decomposition of chain i's first t nodes (fresh list)."""
        stack = list(self.full[i])
        steps = self.steps[i]
        for k in range(len(steps) - 1, t, -1):
            pushed, popped = steps[k]  # type: ignore[misc]
            assert stack and stack[-1] == pushed
            stack.pop()
            stack.extend(popped)
        return stack
