import random

from racecheck import TraceGraph
from racecheck.oracle import oracle_opt_height


def random_trace(rng: random.Random, p_lo=2, p_hi=3, max_len=5, min_len=0, v_bias=0.5):
    p = rng.randrange(p_lo, p_hi + 1)
    chains = []
    for _ in range(p):
        m = rng.randrange(min_len, max_len + 1)
        chains.append([-1 if rng.random() < v_bias else 1 for _ in range(m)])
    return TraceGraph.from_costs(chains)


def random_schedulable_trace(rng: random.Random, p_lo=2, p_hi=3, max_len=5, v_bias=0.6):
    while True:
        g = random_trace(rng, p_lo, p_hi, max_len, v_bias=v_bias)
        if g.n > 0 and oracle_opt_height(g) == 0:
            return g


def node_refs(g: TraceGraph):
    from racecheck import NodeRef

    for i in range(1, g.p + 1):
        for k in range(1, g.chain_len(i) + 1):
            yield NodeRef(i, k)
