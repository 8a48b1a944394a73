"""Hardness gadgets: chain-graph encodings of DAG scheduling questions.

Deciding precedence questions for traces over more than one semaphore is
intractable; this module makes the underlying construction executable so it
can be exercised and verified on small instances.  The pipeline turns a
height question about a cost-labeled DAG into chain graphs:

``construct_g1(dag, ell)``
    Chains over n+2 semaphores (one per DAG node, plus an accumulator "Sa"
    and a completion barrier "Sb") that admit a complete valid schedule
    exactly when the DAG has a schedule whose running cost never exceeds
    ell.  Validity here is the *nonpositive* convention: a semaphore may
    be incremented only after a matching decrement, i.e. every value stays
    at or below zero throughout.  Per DAG node v_i, chain C_i carries one
    increment of the source semaphore for each incoming arc, one
    accumulator operation signed like v_i's cost, d_i decrements of S_i
    (d_i = outgoing arcs), and a barrier decrement; side chains supply the
    accumulator slack that a height-ell schedule needs.

``encode_units_g2(g1)``
    The same question over just two semaphores, T1 and T2.  Every
    operation on the k-th semaphore becomes a *unit* of 2(k+1)+6
    operations on T1/T2 (an opening handshake, k+1 identifying pairs, and
    a closing run), preceded by one bootstrap chain of two -T1 and two
    -T2.  Units are built so that only a decrement unit and an increment
    unit of the same index can unlock each other, which forces any valid
    schedule to interleave them in matched pairs.

``pairwise_execute(g1, order)``
    Replays the canonical schedule of G1 that a DAG schedule induces,
    checking validity at every step; succeeds exactly when the DAG
    schedule's running cost stays within ell.

``designate_query_nodes(g2)``
    The (v, w) pair whose single precedence question in G2 is equivalent
    to G2 having a complete valid schedule: the first bootstrap operation
    and the last operation of the barrier chain.

``search_height(dag)``
    Binary search over ell using the G1 construction and the exhaustive
    validity oracle; recovers the DAG's optimal schedule height through
    O(log n) validity queries.

All generators are deterministic: equal inputs give identical chains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .oracle import oracle_multi_valid
from .trace import MultiOp, MultiSemTrace, NodeRef, TraceError


@dataclass(frozen=True)
class CostDag:
    """A DAG over nodes 1..n with node costs +-1 and arcs (source, target)."""

    costs: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        n = len(self.costs)
        for c in self.costs:
            if c not in (1, -1):
                raise ValueError(f"node cost must be +1 or -1, got {c}")
        for a, b in self.arcs:
            if not (1 <= a <= n and 1 <= b <= n) or a == b:
                raise ValueError(f"bad arc ({a}, {b})")
        order = self.topological_order()
        if order is None:
            raise ValueError("arc set has a cycle")

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.costs if c > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.costs if c < 0)

    def out_degree(self, i: int) -> int:
        return sum(1 for a, b in self.arcs if a == i)

    def topological_order(self) -> list[int] | None:
        n = len(self.costs)
        indeg = [0] * (n + 1)
        for _, b in self.arcs:
            indeg[b] += 1
        ready = [i for i in range(1, n + 1) if indeg[i] == 0]
        out: list[int] = []
        while ready:
            i = ready.pop()
            out.append(i)
            for a, b in self.arcs:
                if a == i:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        ready.append(b)
        return out if len(out) == n else None


def parse_dag(text: str) -> CostDag:
    """Parse the DAG text format: ``node <id> <+1|-1>`` and ``arc <a> <b>`` lines."""
    costs: dict[int, int] = {}
    arcs: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if parts[0] == "node" and len(parts) == 3:
            m = re.match(r"^([+-]?1)$", parts[2])
            if not m:
                raise TraceError(f"bad node cost {parts[2]!r}", lineno)
            costs[int(parts[1])] = int(m.group(1))
        elif parts[0] == "arc" and len(parts) == 3:
            arcs.add((int(parts[1]), int(parts[2])))
        else:
            raise TraceError(f"bad dag line {body!r}", lineno)
    if not costs:
        raise TraceError("dag has no nodes")
    n = max(costs)
    if sorted(costs) != list(range(1, n + 1)):
        raise TraceError("node ids must cover 1..n")
    return CostDag(tuple(costs[i] for i in range(1, n + 1)), frozenset(arcs))


def serialize_dag(dag: CostDag) -> str:
    lines = [f"node {i} {'+1' if c > 0 else '-1'}" for i, c in enumerate(dag.costs, 1)]
    lines.extend(f"arc {a} {b}" for a, b in sorted(dag.arcs))
    return "\n".join(lines) + "\n"


def _sem_name(k: int, n: int) -> str:
    if k <= n:
        return f"S{k}"
    return "Sa" if k == n + 1 else "Sb"


def construct_g1(dag: CostDag, ell: int) -> MultiSemTrace:
    """Chains over n+2 semaphores, valid (nonpos) iff the DAG height is <= ell.

    Requires 0 <= ell <= n and ell - n_plus + n_minus >= 0; a caller seeing
    the latter fail may conclude the DAG height exceeds ell outright.
    """
    n = dag.n
    if not 0 <= ell <= n:
        raise ValueError(f"ell must lie in [0, {n}], got {ell}")
    spare = ell - dag.n_plus + dag.n_minus
    if spare < 0:
        raise ValueError(
            f"ell - n_plus + n_minus = {spare} < 0: height certainly exceeds {ell}"
        )
    sa, sb = _sem_name(n + 1, n), _sem_name(n + 2, n)
    main: list[list[MultiOp]] = [[] for _ in range(n + 1)]
    side: list[list[MultiOp]] = [[] for _ in range(n + 1)]
    for i in range(1, n + 1):
        ci = main[i - 1]
        for j in range(1, n + 1):
            if (j, i) in dag.arcs:
                ci.append((1, f"S{j}"))
        if dag.costs[i - 1] > 0:
            ci.append((1, sa))
        else:
            ci.append((-1, sa))
            side[i - 1].extend([(1, sa), (-1, sa)])
        ci.extend([(-1, f"S{i}")] * dag.out_degree(i))
        ci.append((-1, sb))
    main[n].extend([(1, sb)] * n)
    main[n].extend([(1, sa)] * spare)
    side[n].extend([(-1, sa)] * ell)
    sems = tuple(_sem_name(k, n) for k in range(1, n + 3))
    return MultiSemTrace(tuple(tuple(c) for c in main + side), sems)


def unit_ops(index: int, sign: int) -> list[MultiOp]:
    """The two-semaphore operation block standing in for one +-S_index op."""
    if index < 1:
        raise ValueError("unit indices start at 1")
    if sign < 0:
        ops: list[MultiOp] = [(1, "T1"), (1, "T2")]
        ops.extend([(-1, "T1"), (1, "T2")] * (index + 1))
        ops.extend([(-1, "T2")] * 4)
    else:
        ops = [(1, "T1"), (1, "T2")]
        ops.extend([(1, "T1"), (-1, "T2")] * (index + 1))
        ops.extend([(1, "T2"), (1, "T2"), (-1, "T1"), (-1, "T1")])
    return ops


def encode_units_g2(g1: MultiSemTrace, order: Sequence[str] | None = None) -> MultiSemTrace:
    """Replace every operation of g1 by its unit; prepend the bootstrap chain.

    ``order`` assigns unit indices 1..len(order) to semaphore names; it
    defaults to g1's declared semaphore order and must cover every
    semaphore g1 uses.
    """
    names = tuple(order) if order is not None else g1.semaphores
    index = {name: k for k, name in enumerate(names, start=1)}
    chains: list[tuple[MultiOp, ...]] = [((-1, "T1"), (-1, "T1"), (-1, "T2"), (-1, "T2"))]
    for chain in g1.chains:
        ops: list[MultiOp] = []
        for delta, name in chain:
            if name not in index:
                raise ValueError(f"semaphore {name!r} outside the unit index range")
            ops.extend(unit_ops(index[name], delta))
        chains.append(tuple(ops))
    return MultiSemTrace(tuple(chains), ("T1", "T2"))


# --- Pairwise replay ----------------------------------------------------------


@dataclass(frozen=True)
class PairwiseRun:
    """Outcome of replaying a DAG schedule through the G1 chains."""

    ok: bool
    schedule: list[NodeRef]
    failure: str | None = None


class _G1View:
    """Structure recovered from a construct_g1 output."""

    def __init__(self, g1: MultiSemTrace):
        p = len(g1.chains)
        if p < 4 or p % 2 != 0:
            raise ValueError("not a recognizable gadget: wrong chain count")
        self.n = (p - 2) // 2
        n = self.n
        self.sa = _sem_name(n + 1, n)
        self.sb = _sem_name(n + 2, n)
        self.arcs: set[tuple[int, int]] = set()
        self.costs: list[int] = []
        for i in range(1, n + 1):
            chain = g1.chains[i - 1]
            sa_ops = [delta for delta, name in chain if name == self.sa]
            if len(sa_ops) != 1:
                raise ValueError(f"chain {i} has {len(sa_ops)} accumulator ops")
            self.costs.append(sa_ops[0])
            for delta, name in chain:
                if delta > 0 and name not in (self.sa, self.sb):
                    self.arcs.add((int(name[1:]), i))
        self.ell = len(g1.chains[2 * n + 1])


def pairwise_execute(g1: MultiSemTrace, order: Sequence[int]) -> PairwiseRun:
    """Replay the canonical schedule induced by a DAG schedule.

    ``order`` is a topological order of the DAG the gadget was built from
    (node ids).  Succeeds, returning a complete valid schedule of g1 under
    the nonpositive convention, exactly when the DAG schedule's running
    cost never exceeds the gadget's ell.
    """
    view = _G1View(g1)
    n = view.n
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("order must be a permutation of 1..n")
    done: set[int] = set()
    for k in order:
        for a, b in view.arcs:
            if b == k and a not in done:
                raise ValueError(f"order is not topological: arc {a}->{b}")
        done.add(k)

    cursors = [0] * len(g1.chains)
    values: dict[str, int] = {name: 0 for name in g1.semaphores}
    schedule: list[NodeRef] = []

    def execute(chain: int, expect: MultiOp, step: str) -> str | None:
        k = cursors[chain - 1]
        ops = g1.chains[chain - 1]
        if k >= len(ops) or ops[k] != expect:
            at = ops[k] if k < len(ops) else None
            return f"{step}: chain {chain} is at {at}, needs {expect}"
        delta, name = expect
        if values[name] + delta > 0:
            return f"{step}: executing {expect} in chain {chain} would raise {name} above zero"
        values[name] += delta
        cursors[chain - 1] = k + 1
        schedule.append(NodeRef(chain, k + 1))
        return None

    def take_minus_sa(step: str) -> str | None:
        for x in range(n + 2, 2 * n + 3):        # side chains C'_1..C'_{n+1}
            k = cursors[x - 1]
            ops = g1.chains[x - 1]
            if k < len(ops) and ops[k] == (-1, view.sa):
                return execute(x, (-1, view.sa), step)
        return f"{step}: no accumulator decrement available in any side chain"

    for k in order:
        for j in range(1, n + 1):
            if (j, k) in view.arcs:
                err = execute(j, (-1, f"S{j}"), f"release S{j} for node {k}")
                if err is None:
                    err = execute(k, (1, f"S{j}"), f"consume S{j} in chain {k}")
                if err:
                    return PairwiseRun(False, schedule, err)
        if view.costs[k - 1] > 0:
            err = take_minus_sa(f"node {k} (+1)")
            if err is None:
                err = execute(k, (1, view.sa), f"node {k} (+1)")
        else:
            err = execute(k, (-1, view.sa), f"node {k} (-1)")
            if err is None:
                err = execute(n + 1 + k, (1, view.sa), f"node {k} (-1) side refill")
        if err:
            return PairwiseRun(False, schedule, err)
    for i in range(1, n + 1):
        err = execute(i, (-1, view.sb), f"barrier for chain {i}")
        if err is None:
            err = execute(n + 1, (1, view.sb), f"barrier ack {i}")
        if err:
            return PairwiseRun(False, schedule, err)
    m_n = sum(view.costs)
    for t in range(view.ell - m_n):
        err = take_minus_sa(f"drain {t + 1}")
        if err is None:
            err = execute(n + 1, (1, view.sa), f"drain {t + 1}")
        if err:
            return PairwiseRun(False, schedule, err)
    if sum(cursors) != g1.n:
        return PairwiseRun(False, schedule, "replay ended with unexecuted operations")
    return PairwiseRun(True, schedule, None)


def designate_query_nodes(g2: MultiSemTrace) -> tuple[NodeRef, NodeRef]:
    """The precedence query equivalent to complete schedulability of g2.

    v is the first bootstrap operation; w is the last operation of the
    barrier chain's encoding.  v precedes w in some valid subschedule
    (nonpos convention) iff g2 admits a complete valid schedule.
    """
    p = len(g2.chains)
    if p < 5 or p % 2 == 0:
        raise ValueError("not a recognizable two-semaphore gadget")
    if g2.chains[0] != ((-1, "T1"), (-1, "T1"), (-1, "T2"), (-1, "T2")):
        raise ValueError("missing bootstrap chain")
    n = (p - 3) // 2
    barrier = n + 2  # chain C_{n+1} of the original gadget, shifted by C0
    m = len(g2.chains[barrier - 1])
    if m == 0:
        raise ValueError("barrier chain is empty")
    return NodeRef(1, 1), NodeRef(barrier, m)


def search_height(dag: CostDag, max_states: int = 2_000_000) -> int:
    """The DAG's optimal schedule height via O(log n) gadget validity queries."""
    lo = max(0, dag.n_plus - dag.n_minus)
    hi = dag.n
    while lo < hi:
        mid = (lo + hi) // 2
        if oracle_multi_valid(construct_g1(dag, mid), "nonpos", max_states):
            hi = mid
        else:
            lo = mid + 1
    return lo


# --- unit activation monitor ---------------------------------------------------


@dataclass(frozen=True)
class Unit:
    """One decoded unit: its sign, index, and position span within a chain."""

    chain: int
    sign: int
    index: int
    start: int  # 1-based position of the unit's first op
    length: int

    @property
    def activation_pos(self) -> int:
        return self.start + 2  # third operation

    @property
    def finish_pos(self) -> int:
        return self.start + self.length - 5  # fifth-to-last operation


def split_units(g2: MultiSemTrace, chain: int) -> list[Unit]:
    """Decode the unit structure of one encoded chain (not the bootstrap)."""
    ops = g2.chains[chain - 1]
    units: list[Unit] = []
    k = 0
    while k < len(ops):
        start = k
        if ops[k] != (1, "T1") or k + 1 >= len(ops) or ops[k + 1] != (1, "T2"):
            raise ValueError(f"chain {chain}: no unit header at position {k + 1}")
        k += 2
        if ops[k] == (-1, "T1"):
            pairs = 0
            while k + 1 < len(ops) and ops[k] == (-1, "T1") and ops[k + 1] == (1, "T2"):
                pairs += 1
                k += 2
            tail = [(-1, "T2")] * 4
            sign = -1
        else:
            pairs = 0
            while k + 1 < len(ops) and ops[k] == (1, "T1") and ops[k + 1] == (-1, "T2"):
                pairs += 1
                k += 2
            tail = [(1, "T2"), (1, "T2"), (-1, "T1"), (-1, "T1")]
            sign = 1
        if pairs < 2 or list(ops[k : k + 4]) != tail:
            raise ValueError(f"chain {chain}: malformed unit at position {start + 1}")
        k += 4
        units.append(Unit(chain, sign, pairs - 1, start + 1, k - start))
    return units


def activation_events(g2: MultiSemTrace, schedule: Iterable[NodeRef]) -> list[tuple[str, Unit]]:
    """('active'|'finished', unit) events induced by a schedule of g2.

    Also enforces the pairing discipline: activations come in matched
    decrement/increment pairs of equal index, with no third unit becoming
    active before both finish.
    """
    unit_at: dict[tuple[int, int], tuple[str, Unit]] = {}
    for chain in range(2, len(g2.chains) + 1):
        for u in split_units(g2, chain):
            unit_at[(chain, u.activation_pos)] = ("active", u)
            unit_at[(chain, u.finish_pos)] = ("finished", u)
    events: list[tuple[str, Unit]] = []
    active: list[Unit] = []
    for ref in schedule:
        hit = unit_at.get((ref.chain, ref.pos))
        if hit is None:
            continue
        kind, unit = hit
        if kind == "active":
            if not active:
                if unit.sign > 0:
                    raise AssertionError(f"increment unit activated first: {unit}")
            elif len(active) == 1:
                prev = active[0]
                if not (prev.sign < 0 and unit.sign > 0 and unit.index == prev.index):
                    raise AssertionError(f"bad second activation: {prev} then {unit}")
            else:
                raise AssertionError(f"third unit activated: {active} + {unit}")
            active.append(unit)
        else:
            active = [u for u in active if u != unit]
        events.append((kind, unit))
    return events
