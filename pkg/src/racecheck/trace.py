"""Execution traces of semaphore-synchronized programs, as chain graphs.

A trace of a parallel program that ran on p processors is modeled as p
disjoint chains, one per processor.  Each chain is the sequence of semaphore
operations that processor performed, in program order.  A P operation waits
until the semaphore is positive and then decrements it; a V operation
increments it.  For scheduling purposes a P node costs +1 and a V node costs
-1, so the cumulative cost of a schedule prefix counts the P operations not
yet covered by a V; a prefix can execute without blocking exactly when the
cumulative cost never rises above zero (the semaphore never goes negative).

Nodes are addressed as ``NodeRef(chain, pos)``, both 1-based and stable
across the whole library.  Two pseudo-nodes bracket the graph: BOTTOM
precedes every node and TOP follows every node; both cost nothing when they
appear in schedules.

The module also carries ``MultiSemTrace``, the generalization to chains over
several named semaphores used by the hardness-gadget generators, plus the
text format shared by both:

    one chain per line; whitespace-separated tokens; ``P:name`` / ``V:name``
    (bare ``P`` / ``V`` mean semaphore "s"); sign-style synonyms ``+name``
    (increment, i.e. V) and ``-name`` (decrement, i.e. P); ``#`` starts a
    comment running to end of line.  Lines that are entirely comment are
    skipped; any other line is a chain, so a blank line is an empty chain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence


class TraceError(ValueError):
    """Malformed trace text; carries the 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            message = f"{message} ({where})"
        super().__init__(message)
        self.line = line
        self.col = col


class MultipleSemaphoreError(TraceError):
    """A single-semaphore trace mentioned a second semaphore name."""


class Op(Enum):
    P = "P"
    V = "V"

    @property
    def cost(self) -> int:
        return 1 if self is Op.P else -1

    def __repr__(self) -> str:  # keeps golden test output short
        return self.value


class NodeRef(NamedTuple):
    chain: int
    pos: int

    def __str__(self) -> str:
        if self == BOTTOM:
            return "_"
        if self == TOP:
            return "T"
        return f"{self.chain}:{self.pos}"


#: Pseudo-node preceding every node of every chain.
BOTTOM = NodeRef(0, 0)
#: Pseudo-node following every node of every chain.
TOP = NodeRef(-1, -1)


def is_sentinel(ref: NodeRef) -> bool:
    return ref.chain <= 0


@dataclass(frozen=True)
class TraceGraph:
    """p disjoint chains of P/V operations on one semaphore.

    Immutable after construction; instances may be shared freely across
    threads.  ``chains`` are tuples of :class:`Op`; ``cost_chains`` is the
    same data as +1/-1 integers, which is what the scheduling layers consume.
    """

    chains: tuple[tuple[Op, ...], ...]
    semaphore: str = "s"

    def __post_init__(self) -> None:
        if len(self.chains) == 0:
            raise TraceError("empty trace")
        object.__setattr__(
            self,
            "cost_chains",
            tuple(tuple(op.cost for op in chain) for chain in self.chains),
        )

    @classmethod
    def from_costs(cls, cost_chains: Iterable[Iterable[int]], semaphore: str = "s") -> "TraceGraph":
        chains = []
        for costs in cost_chains:
            chain = []
            for c in costs:
                if c == 1:
                    chain.append(Op.P)
                elif c == -1:
                    chain.append(Op.V)
                else:
                    raise ValueError(f"node cost must be +1 or -1, got {c}")
            chains.append(tuple(chain))
        return cls(tuple(chains), semaphore)

    @property
    def p(self) -> int:
        return len(self.chains)

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.chains)

    def chain_len(self, i: int) -> int:
        return len(self.chains[i - 1])

    def node(self, ref: NodeRef) -> Op:
        self._check(ref)
        return self.chains[ref.chain - 1][ref.pos - 1]

    def pre(self, ref: NodeRef) -> NodeRef:
        """Predecessor within the chain; BOTTOM before the first node."""
        self._check(ref)
        if ref.pos == 1:
            return BOTTOM
        return NodeRef(ref.chain, ref.pos - 1)

    def succ(self, ref: NodeRef) -> NodeRef:
        """Successor within the chain; TOP after the last node."""
        self._check(ref)
        if ref.pos == len(self.chains[ref.chain - 1]):
            return TOP
        return NodeRef(ref.chain, ref.pos + 1)

    def head(self, i: int) -> NodeRef:
        """First node of chain i, or TOP when the chain is empty."""
        return NodeRef(i, 1) if self.chains[i - 1] else TOP

    def tail(self, i: int) -> NodeRef:
        """Last node of chain i, or BOTTOM when the chain is empty."""
        m = len(self.chains[i - 1])
        return NodeRef(i, m) if m else BOTTOM

    def _check(self, ref: NodeRef) -> None:
        if is_sentinel(ref):
            raise ValueError(f"pseudo-node {ref} has no in-chain position")
        if not (1 <= ref.chain <= len(self.chains)):
            raise ValueError(f"chain index out of range: {ref}")
        if not (1 <= ref.pos <= len(self.chains[ref.chain - 1])):
            raise ValueError(f"position out of range: {ref}")


def node_cost(g: TraceGraph, v: NodeRef) -> int:
    """+1 for a P node, -1 for a V node.  Sentinels are rejected."""
    return g.node(v).cost


def segment(g: TraceGraph, v: NodeRef, w: NodeRef) -> list[Op]:
    """The inclusive run of operations from v to w on one chain."""
    g._check(v)
    g._check(w)
    if v.chain != w.chain:
        raise ValueError(f"segment endpoints on different chains: {v}, {w}")
    if v.pos > w.pos:
        raise ValueError(f"segment endpoints out of order: {v}, {w}")
    return list(g.chains[v.chain - 1][v.pos - 1 : w.pos])


def chain_prefix(g: TraceGraph, v: NodeRef) -> list[Op]:
    """Everything up to and including v; empty for v = BOTTOM."""
    if v == BOTTOM:
        return []
    g._check(v)
    return list(g.chains[v.chain - 1][: v.pos])


def chain_suffix(g: TraceGraph, v: NodeRef) -> list[Op]:
    """Everything from v (inclusive) to the end of its chain."""
    g._check(v)
    return list(g.chains[v.chain - 1][v.pos - 1 :])


@dataclass(frozen=True)
class Cut:
    """One cutpoint per chain: the last executed node, or BOTTOM for none.

    A cut describes a prefix subgraph: chain i contributes every node up to
    and including ``points[i-1]``.
    """

    points: tuple[NodeRef, ...]

    def __post_init__(self) -> None:
        for i, ref in enumerate(self.points, start=1):
            if ref != BOTTOM and ref.chain != i:
                raise ValueError(f"cutpoint {ref} does not belong to chain {i}")

    def point(self, i: int) -> NodeRef:
        return self.points[i - 1]

    def replace(self, i: int, u: NodeRef) -> "Cut":
        pts = list(self.points)
        pts[i - 1] = u
        return Cut(tuple(pts))

    @classmethod
    def bottoms(cls, g: TraceGraph) -> "Cut":
        return cls(tuple(BOTTOM for _ in range(g.p)))

    @classmethod
    def full(cls, g: TraceGraph) -> "Cut":
        return cls(tuple(g.tail(i) for i in range(1, g.p + 1)))

    @classmethod
    def at_positions(cls, g: TraceGraph, positions: Sequence[int]) -> "Cut":
        if len(positions) != g.p:
            raise ValueError("need one position per chain")
        pts = []
        for i, k in enumerate(positions, start=1):
            pts.append(BOTTOM if k == 0 else NodeRef(i, k))
        return cls(tuple(pts))

    def positions(self) -> tuple[int, ...]:
        return tuple(0 if ref == BOTTOM else ref.pos for ref in self.points)


def new_cut(cut: Cut, i: int, u: NodeRef) -> Cut:
    """The cut equal to ``cut`` except that chain i's cutpoint becomes u."""
    return cut.replace(i, u)


# --- multi-semaphore traces -------------------------------------------------

#: One operation: (delta, semaphore).  delta is +1 for an increment and -1
#: for a decrement of the named semaphore.
MultiOp = tuple[int, str]


@dataclass(frozen=True)
class MultiSemTrace:
    """Chains of increment/decrement operations over named semaphores.

    ``semaphores`` fixes an ordered universe (first appearance order when
    parsed from text); generators rely on that order being deterministic.
    """

    chains: tuple[tuple[MultiOp, ...], ...]
    semaphores: tuple[str, ...]

    def __post_init__(self) -> None:
        known = set(self.semaphores)
        for chain in self.chains:
            for delta, name in chain:
                if delta not in (1, -1):
                    raise ValueError(f"delta must be +1 or -1, got {delta}")
                if name not in known:
                    raise ValueError(f"operation on undeclared semaphore {name!r}")

    @classmethod
    def from_chains(cls, chains: Iterable[Iterable[MultiOp]], semaphores: Sequence[str] | None = None) -> "MultiSemTrace":
        chains = tuple(tuple(chain) for chain in chains)
        if semaphores is None:
            seen: list[str] = []
            for chain in chains:
                for _, name in chain:
                    if name not in seen:
                        seen.append(name)
            semaphores = seen
        return cls(chains, tuple(semaphores))

    @property
    def p(self) -> int:
        return len(self.chains)

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.chains)

    def node(self, ref: NodeRef) -> MultiOp:
        return self.chains[ref.chain - 1][ref.pos - 1]


def to_multi(g: TraceGraph) -> MultiSemTrace:
    """View a single-semaphore trace as a MultiSemTrace (P = decrement)."""
    chains = tuple(
        tuple((-op.cost, g.semaphore) for op in chain) for chain in g.chains
    )
    return MultiSemTrace(chains, (g.semaphore,))


# --- text format -------------------------------------------------------------

_NAME = r"[A-Za-z0-9_.]+"
_TOKEN_RE = re.compile(
    rf"^(?:(?P<kind>[PV])(?::(?P<name>{_NAME}))?|(?P<sign>[+-])(?P<sname>{_NAME}))$"
)
_PLAIN_NAME_RE = re.compile(rf"^{_NAME}$")


def _tokenize(text: str) -> list[list[tuple[int, str, int, int]]]:
    """Split trace text into per-chain op lists of (delta, name, line, col).

    A bare ``P``/``V`` may also take its semaphore as the following token
    ("P a" == "P:a"), provided that token is not itself an operation.
    """
    out: list[list[tuple[int, str, int, int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if raw.strip().startswith("#"):
            continue  # pure comment line: not a chain
        ops: list[tuple[int, str, int, int]] = []
        toks = list(re.finditer(r"\S+", body))
        idx = 0
        while idx < len(toks):
            m = toks[idx]
            tok = m.group(0)
            tm = _TOKEN_RE.match(tok)
            if tm is None:
                raise TraceError(f"bad token {tok!r}", lineno, m.start() + 1)
            if tm.group("kind"):
                name = tm.group("name")
                delta = -1 if tm.group("kind") == "P" else 1
                if name is None:
                    name = "s"
                    if idx + 1 < len(toks):
                        nxt = toks[idx + 1].group(0)
                        if _PLAIN_NAME_RE.match(nxt) and not _TOKEN_RE.match(nxt):
                            name = nxt
                            idx += 1
            else:
                name = tm.group("sname")
                delta = 1 if tm.group("sign") == "+" else -1
            ops.append((delta, name, lineno, m.start() + 1))
            idx += 1
        out.append(ops)
    return out


def parse_multi_trace(text: str) -> MultiSemTrace:
    """Parse a trace over any number of named semaphores."""
    rows = _tokenize(text)
    if not rows:
        raise TraceError("empty trace")
    seen: list[str] = []
    chains = []
    for ops in rows:
        chain = []
        for delta, name, _, _ in ops:
            if name not in seen:
                seen.append(name)
            chain.append((delta, name))
        chains.append(tuple(chain))
    return MultiSemTrace(tuple(chains), tuple(seen))


def parse_trace(text: str) -> TraceGraph:
    """Parse a single-semaphore trace; every token becomes one node."""
    rows = _tokenize(text)
    if not rows:
        raise TraceError("empty trace")
    name0: str | None = None
    chains = []
    for ops in rows:
        chain = []
        for delta, name, lineno, col in ops:
            if name0 is None:
                name0 = name
            elif name != name0:
                raise MultipleSemaphoreError(f"multiple semaphores: {name}", lineno, col)
            chain.append(Op.P if delta < 0 else Op.V)
        chains.append(tuple(chain))
    return TraceGraph(tuple(chains), name0 if name0 is not None else "s")


def serialize_trace(g: TraceGraph) -> str:
    """Inverse of parse_trace, up to whitespace normalization."""
    lines = []
    for chain in g.chains:
        if g.semaphore == "s":
            toks = [op.value for op in chain]
        else:
            toks = [f"{op.value}:{g.semaphore}" for op in chain]
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def serialize_multi_trace(mg: MultiSemTrace) -> str:
    lines = []
    for chain in mg.chains:
        lines.append(" ".join(("+" if delta > 0 else "-") + name for delta, name in chain))
    return "\n".join(lines) + "\n"


def parse_node_ref(text: str) -> NodeRef:
    """Parse a "chain:pos" selector as used on the command line."""
    m = re.match(r"^(\d+):(\d+)$", text)
    if not m:
        raise ValueError(f"bad node selector {text!r} (expected chain:pos)")
    ref = NodeRef(int(m.group(1)), int(m.group(2)))
    if ref.chain < 1 or ref.pos < 1:
        raise ValueError(f"bad node selector {text!r} (indices are 1-based)")
    return ref
