"""Brute-force reference implementations for small instances.

Everything here decides questions by explicit search over cut states: one
executed-prefix length per chain.  For a single semaphore the semaphore
value is determined by the cut (it does not depend on the execution path),
so plain reachability over cuts is exact; the same holds per semaphore in
the multi-semaphore case.  These functions anchor the fast algorithms in
tests and in the acceptance gate, and intentionally favor clarity over
speed.  Hard size guards raise :class:`OracleBoundExceeded` rather than
letting a search run away.

Node costs may be arbitrary integers here (the fast path only ever sees
+-1); single-semaphore entry points accept either a TraceGraph or plain
lists of costs.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .trace import BOTTOM, Cut, MultiSemTrace, NodeRef, TraceGraph

#: Search state: executed-prefix length per chain.
CutState = tuple[int, ...]

DEFAULT_MAX_N = 18
DEFAULT_MAX_STATES = 2_000_000


class OracleBoundExceeded(RuntimeError):
    """The instance is too large for exhaustive search."""


def _cost_chains(g) -> list[tuple[int, ...]]:
    if isinstance(g, TraceGraph):
        return [tuple(c) for c in g.cost_chains]
    return [tuple(c) for c in g]


def _guard_states(lengths: Sequence[int], max_states: int) -> int:
    total = 1
    for m in lengths:
        total *= m + 1
        if total > max_states:
            raise OracleBoundExceeded(
                f"cut-state space exceeds {max_states} states"
            )
    return total


# --- single semaphore ---------------------------------------------------------


def _reachable_cuts(chains: Sequence[Sequence[int]], max_states: int) -> set[CutState]:
    """All cuts reachable through prefixes whose running cost stays <= 0."""
    _guard_states([len(c) for c in chains], max_states)
    start: CutState = tuple(0 for _ in chains)
    seen = {start}
    stack = [(start, 0)]
    while stack:
        cut, cost = stack.pop()
        for i, chain in enumerate(chains):
            k = cut[i]
            if k < len(chain):
                c2 = cost + chain[k]
                if c2 <= 0:
                    nxt = cut[:i] + (k + 1,) + cut[i + 1 :]
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append((nxt, c2))
    return seen


def oracle_can_precede(
    g,
    v: NodeRef,
    w: NodeRef,
    max_n: int = DEFAULT_MAX_N,
    max_states: int = DEFAULT_MAX_STATES,
) -> bool:
    """Whether some valid subschedule executes v before w.

    Search over cuts; w's node may only be stepped from a cut that already
    contains v.  v == w is never preceded by itself.
    """
    chains = _cost_chains(g)
    n = sum(len(c) for c in chains)
    if n > max_n:
        raise OracleBoundExceeded(f"n={n} exceeds brute-force bound {max_n}")
    if v == w:
        return False
    reach = _reachable_cuts(chains, max_states)
    iw, kw = w.chain - 1, w.pos
    iv, kv = v.chain - 1, v.pos
    for cut in reach:
        if cut[iw] == kw - 1 and cut[iv] >= kv:
            cost = sum(sum(chains[i][: cut[i]]) for i in range(len(chains)))
            if cost + chains[iw][kw - 1] <= 0:
                return True
    return False


def oracle_precede_table(
    g,
    max_n: int = DEFAULT_MAX_N,
    max_states: int = DEFAULT_MAX_STATES,
) -> dict[NodeRef, list[int]]:
    """For every node w: per chain, the last position that can precede w.

    ``table[w][i-1]`` is the largest pos such that NodeRef(i, pos) can
    precede w in some valid subschedule (0 when no node of chain i can).
    One reachability pass answers all ordered pairs:
    can_precede(v, w) == (v.pos <= table[w][v.chain - 1]), for v not on
    w's chain.  Same-chain queries follow chain order plus reachability of
    w itself (chain index of w reports w.pos - 1 exactly when w is
    reachable in a valid subschedule).
    """
    chains = _cost_chains(g)
    n = sum(len(c) for c in chains)
    if n > max_n:
        raise OracleBoundExceeded(f"n={n} exceeds brute-force bound {max_n}")
    reach = _reachable_cuts(chains, max_states)
    p = len(chains)
    prefix_costs = [
        [0] + [sum(c[: k + 1]) for k in range(len(c))] for c in chains
    ]
    table: dict[NodeRef, list[int]] = {}
    for j in range(p):
        for pos in range(1, len(chains[j]) + 1):
            table[NodeRef(j + 1, pos)] = [0] * p
    for cut in reach:
        cost = sum(prefix_costs[i][cut[i]] for i in range(p))
        for j in range(p):
            k = cut[j]
            if k < len(chains[j]) and cost + chains[j][k] <= 0:
                best = table[NodeRef(j + 1, k + 1)]
                for i in range(p):
                    if cut[i] > best[i]:
                        best[i] = cut[i]
    return table


def oracle_opt_height(g, max_states: int = DEFAULT_MAX_STATES) -> int:
    """Minimum over all schedules of the maximum running cost (clamped at 0)."""
    chains = _cost_chains(g)
    return oracle_jopt(chains, None, None, max_states)


def oracle_jopt(
    g,
    gamma: Cut | None,
    j: int | None,
    max_states: int = DEFAULT_MAX_STATES,
) -> int:
    """Optimal (j-)schedule height of the prefix graph under a cut.

    With ``gamma`` and ``j`` given, considers only schedules of the cut's
    prefix graph whose final node is the cut's j-th point.  With both None,
    plain optimal height of the full graph.
    """
    chains = _cost_chains(g)
    if gamma is None:
        targets = [len(c) for c in chains]
    else:
        targets = list(gamma.positions())
    _guard_states(targets, max_states)
    if j is not None:
        if gamma is None or gamma.point(j) == BOTTOM:
            raise ValueError("j-schedules need a non-BOTTOM cutpoint for chain j")
        targets_pre = list(targets)
        targets_pre[j - 1] -= 1
        pre_opt, pre_cost = _dp_opt(chains, targets_pre)
        last = chains[j - 1][targets[j - 1] - 1]
        return max(pre_opt, pre_cost + (last if last > 0 else 0))
    return _dp_opt(chains, targets)[0]


def _dp_opt(chains: Sequence[Sequence[int]], targets: Sequence[int]) -> tuple[int, int]:
    """(min-max running height clamped at 0, total cost) for the prefix graph."""
    import itertools

    prefix_costs = [
        [0] + [sum(c[: k + 1]) for k in range(len(c))] for c in chains
    ]
    value: dict[CutState, int] = {tuple(0 for _ in chains): 0}
    ranges = [range(t + 1) for t in targets]
    for cut in itertools.product(*ranges):
        if all(k == 0 for k in cut):
            continue
        cost = sum(prefix_costs[i][cut[i]] for i in range(len(chains)))
        best = None
        for i, k in enumerate(cut):
            if k > 0:
                prev = value[cut[:i] + (k - 1,) + cut[i + 1 :]]
                cand = prev if prev > cost else cost  # prev >= 0 keeps the clamp
                if best is None or cand < best:
                    best = cand
        value[cut] = best  # type: ignore[assignment]
    final = tuple(targets)
    total = sum(prefix_costs[i][targets[i]] for i in range(len(chains)))
    return value[final], total


def oracle_dag_height(
    costs: Sequence[int],
    arcs: Iterable[tuple[int, int]],
    max_nodes: int = 14,
) -> int:
    """Minimum over all topological orders of the clamped maximum prefix sum.

    Nodes are 1-based; arcs are (source, target) pairs.  Subset dynamic
    program, so the node count is hard-capped.
    """
    n = len(costs)
    if n > max_nodes:
        raise OracleBoundExceeded(f"DAG has {n} nodes, bound is {max_nodes}")
    preds = [0] * n
    for a, b in arcs:
        preds[b - 1] |= 1 << (a - 1)
    total_by_set = [0] * (1 << n)
    for s in range(1, 1 << n):
        low = (s & -s).bit_length() - 1
        total_by_set[s] = total_by_set[s & (s - 1)] + costs[low]
    value = [0] * (1 << n)
    for s in range(1, 1 << n):
        cost = total_by_set[s]
        best = None
        for i in range(n):
            bit = 1 << i
            if s & bit and preds[i] & ~(s & ~bit) == 0:
                prev = value[s & ~bit]
                cand = max(prev, cost)
                if best is None or cand < best:
                    best = cand
        if best is None:
            best = 10 ** 9  # unreachable subset (cycle); caller validates acyclicity
        value[s] = best
    return value[(1 << n) - 1]


# --- several semaphores -------------------------------------------------------


def _multi_deltas(mg: MultiSemTrace) -> tuple[list[list[tuple[int, int]]], int]:
    index = {name: k for k, name in enumerate(mg.semaphores)}
    chains = [
        [(index[name], delta) for delta, name in chain] for chain in mg.chains
    ]
    return chains, len(mg.semaphores)


def _multi_ok(delta: int, value: int, convention: str) -> bool:
    v = value + delta
    return v >= 0 if convention == "nonneg" else v <= 0


def _multi_reach(
    mg: MultiSemTrace,
    convention: str,
    max_states: int,
    stop_full: bool = False,
) -> tuple[dict[CutState, tuple[int, ...]], bool]:
    """Reachable cuts and whether the complete cut was reached.

    With ``stop_full`` the search returns as soon as the complete schedule
    is witnessed (reachability questions about completion don't need the
    full frontier).
    """
    if convention not in ("nonneg", "nonpos"):
        raise ValueError(f"unknown convention {convention!r}")
    chains, nsem = _multi_deltas(mg)
    lengths = [len(c) for c in chains]
    full = tuple(lengths)
    start: CutState = tuple(0 for _ in chains)
    zero = tuple(0 for _ in range(nsem))
    seen: dict[CutState, tuple[int, ...]] = {start: zero}
    if start == full:
        return seen, True
    stack = [start]
    found_full = False
    while stack:
        cut = stack.pop()
        values = seen[cut]
        for i in range(len(chains) - 1, -1, -1):
            k = cut[i]
            if k < lengths[i]:
                sem, delta = chains[i][k]
                if _multi_ok(delta, values[sem], convention):
                    nxt = cut[:i] + (k + 1,) + cut[i + 1 :]
                    if nxt not in seen:
                        if len(seen) >= max_states:
                            raise OracleBoundExceeded(
                                f"reachable cut set exceeds {max_states} states"
                            )
                        vals = list(values)
                        vals[sem] += delta
                        seen[nxt] = tuple(vals)
                        if nxt == full:
                            found_full = True
                            if stop_full:
                                return seen, True
                        stack.append(nxt)
    return seen, found_full


def oracle_multi_valid(
    mg: MultiSemTrace,
    convention: str = "nonneg",
    max_states: int = DEFAULT_MAX_STATES,
) -> bool:
    """Whether a complete valid schedule exists under the given convention."""
    return _multi_reach(mg, convention, max_states, stop_full=True)[1]


def oracle_multi_can_precede(
    mg: MultiSemTrace,
    v: NodeRef,
    w: NodeRef,
    convention: str = "nonneg",
    max_states: int = DEFAULT_MAX_STATES,
) -> bool:
    """Whether some valid subschedule executes v before w.

    A reached cut with w unexecuted but steppable and v already executed
    is a witness (any path to such a cut never stepped w, so appending w
    puts v strictly before it); the search exits on the first witness.
    """
    if convention not in ("nonneg", "nonpos"):
        raise ValueError(f"unknown convention {convention!r}")
    if v == w:
        return False
    chains, nsem = _multi_deltas(mg)
    lengths = [len(c) for c in chains]
    iw, kw = w.chain - 1, w.pos
    iv, kv = v.chain - 1, v.pos
    start: CutState = tuple(0 for _ in chains)
    seen: dict[CutState, tuple[int, ...]] = {start: tuple(0 for _ in range(nsem))}
    stack = [start]

    def witness(cut: CutState, values: tuple[int, ...]) -> bool:
        if cut[iw] == kw - 1 and cut[iv] >= kv:
            sem, delta = chains[iw][kw - 1]
            return _multi_ok(delta, values[sem], convention)
        return False

    if witness(start, seen[start]):
        return True
    while stack:
        cut = stack.pop()
        values = seen[cut]
        for i in range(len(chains) - 1, -1, -1):
            k = cut[i]
            if k < lengths[i]:
                sem, delta = chains[i][k]
                if _multi_ok(delta, values[sem], convention):
                    nxt = cut[:i] + (k + 1,) + cut[i + 1 :]
                    if nxt not in seen:
                        if len(seen) >= max_states:
                            raise OracleBoundExceeded(
                                f"reachable cut set exceeds {max_states} states"
                            )
                        vals = list(values)
                        vals[sem] += delta
                        vt = tuple(vals)
                        seen[nxt] = vt
                        if witness(nxt, vt):
                            return True
                        stack.append(nxt)
    return False


def oracle_multi_find_schedule(
    mg: MultiSemTrace,
    convention: str = "nonneg",
    max_states: int = DEFAULT_MAX_STATES,
) -> list[NodeRef] | None:
    """A complete valid schedule as node references, or None."""
    chains, nsem = _multi_deltas(mg)
    lengths = [len(c) for c in chains]
    full = tuple(lengths)
    start: CutState = tuple(0 for _ in chains)
    parent: dict[CutState, tuple[CutState, NodeRef] | None] = {start: None}
    values_of: dict[CutState, tuple[int, ...]] = {start: tuple(0 for _ in range(nsem))}
    stack = [start]
    target: CutState | None = start if start == full else None
    while stack and target is None:
        cut = stack.pop()
        values = values_of[cut]
        for i in range(len(chains) - 1, -1, -1):
            k = cut[i]
            if k < lengths[i]:
                sem, delta = chains[i][k]
                if _multi_ok(delta, values[sem], convention):
                    nxt = cut[:i] + (k + 1,) + cut[i + 1 :]
                    if nxt not in parent:
                        if len(parent) >= max_states:
                            raise OracleBoundExceeded(
                                f"reachable cut set exceeds {max_states} states"
                            )
                        vals = list(values)
                        vals[sem] += delta
                        values_of[nxt] = tuple(vals)
                        parent[nxt] = (cut, NodeRef(i + 1, k + 1))
                        if nxt == full:
                            target = nxt
                            break
                        stack.append(nxt)
    if target is None:
        return None
    path: list[NodeRef] = []
    cur: CutState = target
    while parent[cur] is not None:
        prev, ref = parent[cur]  # type: ignore[misc]
        path.append(ref)
        cur = prev
    path.reverse()
    return path
