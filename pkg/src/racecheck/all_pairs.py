"""All-pairs precedence: the compact first-reachable table.

For every node v and every other chain j, ``first_j(v)`` is the earliest
node of chain j that v can precede in some valid subschedule (TOP when there
is none).  The table has O(np) entries and is built pairwise.

The builder's fast path is a two-pointer sweep from the chain tails: test
the pinned pair (v, w); on failure record w's successor as a candidate and
retreat v, otherwise retreat w.  Each sweep test pins both cutpoints and
lets the masked-stats kernel choose every other chain's cutpoint, so a test
is O(log n) and a whole chain pair is O((|C_i|+|C_j|) log n) after shared
preprocessing.

The sweep alone is not the full story.  Its stopping rule silently assumes
that the set of nodes v can precede is a suffix of the other chain, and
that is *false* in general, even for schedulable traces: with chains
[P P V V V], [V P], [V P], the second chain's P can precede the first
chain's head (run V2 P2 V3 P1) but not its second or third node (too few
V operations exist that early), while its fourth node is again precedable.
A descending sweep stops at the first failure and would misreport the
head.  ``run_pair`` therefore follows the sweep with an exact repair pass
over the region below the sweep's staircase, scanning upward from the
chain head with a sound cost-budget prune and stopping at the first
witness.  first_j(v) is then the suffix minimum, over cutpoints u at or
after v, of the earliest w whose pinned evaluation is zero; the repair
makes that minimum exact.  The repair region is empty whenever the
precedence sets really are suffixes (the common case; random traces at
scale almost never trigger it), so the typical cost stays near-linear,
but the worst case is the full pair grid.

Because precedence sets need not be suffixes, the O(1) table query rule
("v precedes w iff first_{chain(w)}(v) is not later than w") is complete
but not sound in full generality: it can only overreport.  The table
values themselves are exact.

Queries presuppose a schedulable trace (the trace came from a real
execution, so a complete valid schedule exists); ``build_first_table``
rejects anything else with :class:`UnschedulableError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .humps import ChainDecompTable, opt_height
from .trace import NodeRef, TOP, TraceGraph, is_sentinel
from .trees import HumpTree, PriorityTree


class UnschedulableError(ValueError):
    """The trace admits no complete valid schedule."""

    def __init__(self, height: int):
        super().__init__(f"trace is not schedulable: opt_height={height}")
        self.opt_height = height


@dataclass
class FirstTable:
    """Compact all-pairs representation: O(np) positions, O(1) lookups.

    ``first[(i, j)][k]`` is the position in chain j of the first node that
    node (i, k+1) can precede; length-of-chain-j + 1 encodes TOP.
    """

    chain_lengths: tuple[int, ...]
    first: dict[tuple[int, int], list[int]]
    sweep_steps: int = 0
    repair_tests: int = 0

    @property
    def p(self) -> int:
        return len(self.chain_lengths)

    def first_ref(self, v: NodeRef, j: int) -> NodeRef:
        """First node of chain j precedable by v; TOP when none."""
        pos = self.first[(v.chain, j)][v.pos - 1]
        if pos > self.chain_lengths[j - 1]:
            return TOP
        return NodeRef(j, pos)

    def can_precede(self, v: NodeRef, w: NodeRef) -> bool:
        self._check(v)
        self._check(w)
        if v.chain == w.chain:
            return v.pos < w.pos
        return self.first[(v.chain, w.chain)][v.pos - 1] <= w.pos

    def race(self, v: NodeRef, w: NodeRef) -> bool:
        """Whether v and w could have executed in either order."""
        if v.chain == w.chain:
            raise ValueError("race queries need nodes on different chains")
        return self.can_precede(v, w) and self.can_precede(w, v)

    def rows(self) -> Iterable[tuple[int, int, int, str]]:
        """TSV rows (v_chain, v_pos, j, first_pos-or-T), deterministic order."""
        for i in range(1, self.p + 1):
            for k in range(1, self.chain_lengths[i - 1] + 1):
                for j in range(1, self.p + 1):
                    if j == i:
                        continue
                    pos = self.first[(i, j)][k - 1]
                    cell = "T" if pos > self.chain_lengths[j - 1] else str(pos)
                    yield i, k, j, cell

    def to_tsv(self) -> str:
        lines = ["v_chain\tv_pos\tj\tfirst_pos"]
        lines.extend(f"{i}\t{k}\t{j}\t{cell}" for i, k, j, cell in self.rows())
        return "\n".join(lines) + "\n"

    def _check(self, ref: NodeRef) -> None:
        if is_sentinel(ref):
            raise ValueError(f"{ref} is a pseudo-node")
        if not (1 <= ref.chain <= self.p) or not (
            1 <= ref.pos <= self.chain_lengths[ref.chain - 1]
        ):
            raise ValueError(f"{ref} is outside the table")


def query_can_precede(table: FirstTable, v: NodeRef, w: NodeRef) -> bool:
    return table.can_precede(v, w)


def query_race(table: FirstTable, v: NodeRef, w: NodeRef) -> bool:
    return table.race(v, w)


class SweepEngine:
    """Shared index-tree state for a sequence of chainpair computations.

    Baseline between pairs: every chain's N-humps are loaded with the "k"
    tag and nothing else.  ``run_pair`` swaps the two active chains into
    the pinned ("ij") role, runs the sweep plus repair, and restores the
    baseline.
    """

    def __init__(self, g: TraceGraph, table: ChainDecompTable | None = None, debug: bool = False):
        self.g = g
        self.table = table if table is not None else ChainDecompTable(g)
        cap = max(g.n, 1)
        self.ht = HumpTree(cap, debug=debug)
        self.pt = PriorityTree(cap)
        self.debug = debug
        self.sweep_steps = 0
        self.repair_tests = 0
        ht = self.ht
        self.prefix_costs: list[list[int]] = []
        self.min_prefix: list[int] = []
        for i in range(1, g.p + 1):
            for h in self.table.full[i]:
                if h.cost < 0:
                    ht.insert(h.cost, h.height, "k")
            pc = [0]
            for c in g.cost_chains[i - 1]:
                pc.append(pc[-1] + c)
            self.prefix_costs.append(pc)
            self.min_prefix.append(min(pc))

    # -- hump movement helpers (pinned side) ------------------------------

    def _load(self, h) -> None:
        self.ht.insert(h.cost, h.height, "ij")
        if h.cost < 0:
            self.pt.insert(h.height)

    def _unload(self, h) -> None:
        self.ht.delete(h.cost, h.height, "ij")
        if h.cost < 0:
            self.pt.delete(h.height)

    def _step_back(self, stack: list, step) -> None:
        """Shrink a loaded prefix decomposition by one node."""
        pushed, popped = step
        self._unload(pushed)
        assert stack[-1] == pushed
        stack.pop()
        for old in popped:
            self._load(old)
            stack.append(old)

    def _step_fwd(self, stack: list, step) -> None:
        """Grow a loaded prefix decomposition by one node."""
        pushed, popped = step
        for old in reversed(popped):
            self._unload(old)
            assert stack[-1] == old
            stack.pop()
        self._load(pushed)
        stack.append(pushed)

    def _evaluate(self, hw: int) -> int:
        """Height of the best schedule ending in a node of height hw."""
        pt_max = self.pt._max
        ht = self.ht
        s1 = pt_max[1]
        t = ht._pc[1] + hw
        s2 = ht._ph[1] if ht._ph[1] > t else t
        s = s1 if s1 > s2 else s2
        mh, mc = ht.masked_stats(s, keep_ij=True)
        t = mc + hw
        return mh if mh > t else t

    # -- per-pair computation ---------------------------------------------

    def run_pair(self, i: int, j: int) -> list[int]:
        """Exact first_j positions for every node of chain i."""
        if i == j:
            raise ValueError("chainpair needs two distinct chains")
        g = self.g
        ci = g.cost_chains[i - 1]
        cj = g.cost_chains[j - 1]
        ni, nj = len(ci), len(cj)
        out = [nj + 1] * ni
        if ni == 0:
            return out
        table = self.table
        steps_i, steps_j = table.steps[i], table.steps[j]

        # swap the active chains from the free pool into the pinned role
        for h in table.full[i]:
            if h.cost < 0:
                self.ht.delete(h.cost, h.height, "k")
        for h in table.full[j]:
            if h.cost < 0:
                self.ht.delete(h.cost, h.height, "k")
        cur_i: list = []
        for h in table.full[i]:
            self._load(h)
            cur_i.append(h)
        cur_j: list = list(table.full[j])
        if nj >= 1:
            pushed, popped = steps_j[nj]  # type: ignore[misc]
            assert cur_j[-1] == pushed
            cur_j.pop()
            cur_j.extend(popped)
        for h in cur_j:
            self._load(h)

        # phase 1: descending staircase; wf[v-1] = the w where v failed
        wf = [0] * ni
        vpos, wpos = ni, nj
        while vpos >= 1:
            if wpos == 0:
                for t in range(vpos):
                    out[t] = 1
                break
            self.sweep_steps += 1
            hw = 1 if cj[wpos - 1] > 0 else 0
            h = self._evaluate(hw)
            if self.debug:
                from .single_pair import best as _best
                from .trace import Cut

                gamma = (
                    Cut.bottoms(g)
                    .replace(j, NodeRef(j, wpos))
                    .replace(i, NodeRef(i, vpos))
                )
                assert h == _best(g, j, {i, j}, gamma).height
            if h > 0:
                wf[vpos - 1] = wpos
                out[vpos - 1] = wpos + 1
                self._step_back(cur_i, steps_i[vpos])
                vpos -= 1
            else:
                if wpos >= 2:
                    self._step_back(cur_j, steps_j[wpos - 1])
                wpos -= 1
        # unload whatever remains pinned
        for h in cur_j:
            self._unload(h)
        cur_j.clear()
        for h in cur_i:
            self._unload(h)
        cur_i.clear()

        # phase 2: exact repair below the staircase.  first_j(v) is the
        # minimum over u >= v of the earliest w with a zero pinned
        # evaluation at (u, w); the staircase verified everything from its
        # boundary up, so only w < wf[u] can still improve the answer.
        if any(w >= 2 for w in wf):
            a = self.prefix_costs[i - 1]
            b = self.prefix_costs[j - 1]
            cap = -sum(
                self.min_prefix[k]
                for k in range(g.p)
                if k != i - 1 and k != j - 1
            )
            for h in table.full[i]:
                self._load(h)
                cur_i.append(h)
            run_min = nj + 2
            for vpos in range(ni, 0, -1):
                first_b = out[vpos - 1]
                limit = min(wf[vpos - 1], run_min) - 1
                if limit >= 1:
                    budget = cap - a[vpos]
                    w = 1
                    while w <= limit:
                        if b[w] <= budget:
                            self.repair_tests += 1
                            hw = 1 if cj[w - 1] > 0 else 0
                            if self._evaluate(hw) == 0:
                                first_b = w
                                break
                        if w <= limit - 1:
                            self._step_fwd(cur_j, steps_j[w])
                        w += 1
                    while cur_j:
                        wlen = cur_j[-1].last
                        self._step_back(cur_j, steps_j[wlen])
                if first_b < run_min:
                    run_min = first_b
                out[vpos - 1] = run_min if run_min < out[vpos - 1] else out[vpos - 1]
                self._step_back(cur_i, steps_i[vpos])
            assert not cur_i
        else:
            # suffix minimum still applies when nothing needed repair
            run_min = nj + 2
            for vpos in range(ni, 0, -1):
                if out[vpos - 1] < run_min:
                    run_min = out[vpos - 1]
                out[vpos - 1] = run_min

        # restore the baseline
        for h in table.full[i]:
            if h.cost < 0:
                self.ht.insert(h.cost, h.height, "k")
        for h in table.full[j]:
            if h.cost < 0:
                self.ht.insert(h.cost, h.height, "k")
        return out


def chainpair(g: TraceGraph, i: int, j: int, engine: SweepEngine | None = None) -> list[int]:
    """first_j positions for every node of chain i (standalone entry point)."""
    if engine is None:
        engine = SweepEngine(g)
    return engine.run_pair(i, j)


def build_first_table(
    g: TraceGraph,
    parallel: bool = False,
    max_workers: int | None = None,
    _debug: bool = False,
) -> FirstTable:
    """The full compact representation, pair by pair.

    The parallel mode gives each ordered pair its own tree state and yields
    bitwise-identical tables (the pair computations are independent); it
    trades the shared-tree space bound for concurrency.
    """
    height = opt_height(g)
    if height != 0:
        raise UnschedulableError(height)
    lengths = tuple(g.chain_len(i) for i in range(1, g.p + 1))
    pairs = [(i, j) for i in range(1, g.p + 1) for j in range(1, g.p + 1) if i != j]
    first: dict[tuple[int, int], list[int]] = {}
    steps = 0
    repairs = 0
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        shared = ChainDecompTable(g)

        def one(pair: tuple[int, int]) -> tuple[tuple[int, int], list[int], int, int]:
            eng = SweepEngine(g, table=shared, debug=_debug)
            res = eng.run_pair(*pair)
            return pair, res, eng.sweep_steps, eng.repair_tests

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            for pair, res, st, rt in pool.map(one, pairs):
                first[pair] = res
                steps += st
                repairs += rt
    else:
        engine = SweepEngine(g, debug=_debug)
        for pair in pairs:
            first[pair] = engine.run_pair(*pair)
        steps = engine.sweep_steps
        repairs = engine.repair_tests
    return FirstTable(lengths, first, sweep_steps=steps, repair_tests=repairs)
