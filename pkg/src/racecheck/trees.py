"""Array-backed index structures for the sweep algorithms.

Two structures, both fixed-capacity complete binary trees over the key range
[0, capacity]:

``PriorityTree``
    A counting max-structure.  Leaf h counts the stored humps of height h;
    the root reports the largest height present (0 when empty).  Used to
    track the tallest N-hump among the pinned chains of a query.

``HumpTree``
    Summarizes a multiset of humps as if they were laid out in standard
    order: one subtree keyed by N-hump height (ascending leaf order), one
    keyed by P-hump reverse height (descending leaf order).  Every node
    stores the (height, cost) of its leaf range's merged sequence, combined
    by ``height = max(h_left, c_left + h_right)``, so the root is the merge
    stats of the whole multiset and any prefix of the standard order can be
    aggregated in O(log n).

    ``masked_stats(s)`` reports the stats that would result if every N-hump
    of height >= s were deleted, without modifying anything.  Inserts carry
    a *source* tag ("ij" for humps belonging to the pinned chains, "k" for
    the free chains); ``masked_stats(s, keep_ij=True)`` exempts the pinned
    chains' humps from the mask, which is what the query kernel needs (the
    free chains' cutpoints retreat below height s; the pinned ones must
    not).  The exemption is only sound when no "ij" N-hump is taller than
    s, which the callers guarantee and debug mode asserts.

Updates touch one root-to-leaf path.  Both classes count touched nodes in
``touched`` so tests can pin the per-update work.  Instances are single
writer: callers own exclusivity between mutation and reads.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from .humps import Hump, SeqStats


def _pow2_at_least(k: int) -> int:
    size = 1
    while size < k:
        size <<= 1
    return size


class PriorityTree:
    """Multiset of heights in [0, capacity] with O(log n) max queries."""

    __slots__ = ("capacity", "_size", "_count", "_max", "touched")

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = capacity
        self._size = _pow2_at_least(capacity + 1)
        self._count = [0] * (capacity + 1)
        self._max = [0] * (2 * self._size)
        self.touched = 0

    def insert(self, h: int) -> None:
        self._check_key(h)
        self._count[h] += 1
        if self._count[h] == 1:
            self._set_leaf(h, h)

    def delete(self, h: int) -> None:
        self._check_key(h)
        if self._count[h] <= 0:
            raise ValueError(f"no stored hump of height {h}")
        self._count[h] -= 1
        if self._count[h] == 0:
            self._set_leaf(h, 0)

    def max_height(self) -> int:
        """Largest stored height; 0 when the tree is empty."""
        return self._max[1]

    def __len__(self) -> int:
        return sum(self._count)

    def _check_key(self, h: int) -> None:
        if not 0 <= h <= self.capacity:
            raise ValueError(f"height {h} outside [0, {self.capacity}]")

    def _set_leaf(self, h: int, value: int) -> None:
        m = self._max
        i = self._size + h
        m[i] = value
        self.touched += 1
        i >>= 1
        while i:
            j = i << 1
            a, b = m[j], m[j | 1]
            m[i] = a if a > b else b
            self.touched += 1
            i >>= 1


_SOURCES = ("ij", "k")


class HumpTree:
    """Merged-sequence statistics of a hump multiset, with range masking."""

    __slots__ = (
        "capacity",
        "_size",
        "_nh",
        "_nc",
        "_ph",
        "_pc",
        "_n_cnt",
        "_n_cost",
        "_n_cnt_ij",
        "_n_cost_ij",
        "_p_cnt",
        "_p_cost",
        "_members",
        "touched",
        "debug",
    )

    def __init__(self, capacity: int, debug: bool = False):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.capacity = capacity
        cap1 = capacity + 1
        self._size = _pow2_at_least(cap1)
        two = 2 * self._size
        # per-node (height, cost) for the N and P subtrees
        self._nh = [0] * two
        self._nc = [0] * two
        self._ph = [0] * two
        self._pc = [0] * two
        # leaf aggregates: N keyed by height, P keyed by fall
        self._n_cnt = [0] * cap1
        self._n_cost = [0] * cap1
        self._n_cnt_ij = [0] * cap1
        self._n_cost_ij = [0] * cap1
        self._p_cnt = [0] * cap1
        self._p_cost = [0] * cap1
        # live multiset, for absent-delete detection
        self._members: Counter = Counter()
        self.touched = 0
        self.debug = debug

    @classmethod
    def build(cls, capacity: int, humps: Iterable[Hump], source: str = "ij") -> "HumpTree":
        """Bulk construction; linear in capacity plus the hump count."""
        t = cls(capacity)
        for h in humps:
            t.insert(h.cost, h.height, source)
        return t

    # -- updates ---------------------------------------------------------

    def insert(self, cost: int, height: int, source: str = "ij") -> None:
        self._check(cost, height, source)
        fall = height - cost
        self._members[(cost, height, source)] += 1
        if cost < 0:
            self._n_cnt[height] += 1
            self._n_cost[height] += cost
            if source == "ij":
                self._n_cnt_ij[height] += 1
                self._n_cost_ij[height] += cost
            self._refresh_n_leaf(height)
        else:
            self._p_cnt[fall] += 1
            self._p_cost[fall] += cost
            self._refresh_p_leaf(fall)

    def delete(self, cost: int, height: int, source: str = "ij") -> None:
        self._check(cost, height, source)
        key = (cost, height, source)
        if self._members[key] <= 0:
            raise ValueError(f"hump (cost={cost}, height={height}, {source}) is not stored")
        self._members[key] -= 1
        fall = height - cost
        if cost < 0:
            self._n_cnt[height] -= 1
            self._n_cost[height] -= cost
            if source == "ij":
                self._n_cnt_ij[height] -= 1
                self._n_cost_ij[height] -= cost
            self._refresh_n_leaf(height)
        else:
            self._p_cnt[fall] -= 1
            self._p_cost[fall] -= cost
            self._refresh_p_leaf(fall)

    def insert_hump(self, h: Hump, source: str = "ij") -> None:
        self.insert(h.cost, h.height, source)

    def delete_hump(self, h: Hump, source: str = "ij") -> None:
        self.delete(h.cost, h.height, source)

    # -- queries ---------------------------------------------------------

    def root_stats(self) -> tuple[int, int]:
        """(height, cost) of the full multiset merged in standard order."""
        nh, nc = self._nh[1], self._nc[1]
        ph, pc = self._ph[1], self._pc[1]
        t = nc + ph
        return (nh if nh > t else t), nc + pc

    def p_stats(self) -> tuple[int, int]:
        """(height, cost) of the merged P-humps alone."""
        return self._ph[1], self._pc[1]

    def masked_stats(self, s: int, keep_ij: bool = False) -> tuple[int, int]:
        """Stats with N-humps of height >= s treated as deleted.

        Read-only.  With ``keep_ij`` the mask spares "ij"-tagged humps;
        callers must ensure no ij N-hump is taller than s (all ij humps at
        height exactly s are then re-added, which is the only leaf where
        the two sources can disagree under that precondition).
        """
        if not 0 <= s <= self.capacity + 1:
            raise ValueError(f"mask threshold {s} outside [0, {self.capacity + 1}]")
        acc_h, acc_c = self._n_prefix(s)
        if keep_ij:
            if self.debug:
                assert all(
                    self._n_cnt_ij[h] == 0 for h in range(s + 1, self.capacity + 1)
                ), "ij humps above the mask threshold"
            if s <= self.capacity and self._n_cnt_ij[s]:
                c = self._n_cost_ij[s]
                t = acc_c + s
                if t > acc_h:
                    acc_h = t
                acc_c += c
        t = acc_c + self._ph[1]
        return (acc_h if acc_h > t else t), acc_c + self._pc[1]

    def stats_tuple(self) -> SeqStats:
        h, c = self.root_stats()
        return SeqStats(c, h, h - c)

    def __len__(self) -> int:
        return sum(self._members.values())

    # -- internals -------------------------------------------------------

    def _check(self, cost: int, height: int, source: str) -> None:
        if source not in _SOURCES:
            raise ValueError(f"unknown source {source!r}")
        if height < 0:
            raise ValueError("height must be nonnegative")
        fall = height - cost
        if height > self.capacity or fall > self.capacity:
            raise ValueError(
                f"hump (cost={cost}, height={height}) exceeds capacity {self.capacity}"
            )
        if fall < 0:
            raise ValueError(f"negative fall: cost={cost}, height={height}")

    def _refresh_n_leaf(self, height: int) -> None:
        # leaves of the N subtree run by ascending height
        if self._n_cnt[height]:
            self._pull_up(self._nh, self._nc, height, height, self._n_cost[height])
        else:
            self._pull_up(self._nh, self._nc, height, 0, 0)

    def _refresh_p_leaf(self, fall: int) -> None:
        # leaves of the P subtree run by descending fall
        leaf = self.capacity - fall
        if self._p_cnt[fall]:
            c = self._p_cost[fall]
            self._pull_up(self._ph, self._pc, leaf, c + fall, c)
        else:
            self._pull_up(self._ph, self._pc, leaf, 0, 0)

    def _pull_up(self, hs: list[int], cs: list[int], leaf: int, h: int, c: int) -> None:
        i = self._size + leaf
        hs[i] = h
        cs[i] = c
        self.touched += 1
        i >>= 1
        while i:
            j = i << 1
            lh, lc = hs[j], cs[j]
            rh = hs[j | 1]
            t = lc + rh
            hs[i] = lh if lh > t else t
            cs[i] = lc + cs[j | 1]
            self.touched += 1
            i >>= 1

    def _n_prefix(self, k: int) -> tuple[int, int]:
        """Merged (height, cost) of N-hump heights in [0, k)."""
        if k <= 0:
            return 0, 0
        size = self._size
        nh, nc = self._nh, self._nc
        if k >= size:
            return nh[1], nc[1]
        acc_h = 0
        acc_c = 0
        node = 1
        width = size
        while width > 1 and k > 0:
            width >>= 1
            left = node << 1
            if k >= width:
                t = acc_c + nh[left]
                if t > acc_h:
                    acc_h = t
                acc_c += nc[left]
                k -= width
                node = left | 1
            else:
                node = left
        if k == 1:
            t = acc_c + nh[node]
            if t > acc_h:
                acc_h = t
            acc_c += nc[node]
        return acc_h, acc_c
