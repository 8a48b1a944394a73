"""Race detection for semaphore-synchronized execution traces.

A trace is modeled as disjoint chains of P/V operations on one semaphore;
two operations race when valid re-executions exist putting them in either
order.  The package answers single-pair queries in linear time, builds a
compact all-pairs representation with constant-time lookups, ships
exhaustive oracles to anchor both, and generates the two-semaphore
hardness gadgets showing why the multi-semaphore case is intractable.
"""

from .all_pairs import (
    FirstTable,
    SweepEngine,
    UnschedulableError,
    build_first_table,
    chainpair,
    query_can_precede,
    query_race,
)
from .humps import (
    ChainDecompTable,
    Hump,
    SeqStats,
    concat_decomp,
    decomp,
    decomp_chain,
    decomp_prefix,
    decomp_suffix,
    is_hump,
    merge,
    merge_stats,
    node_height,
    opt_height,
    optimal_schedule,
    seq_stats,
    standard_order_cmp,
    standard_sort_key,
    stats_concat,
)
from .oracle import (
    OracleBoundExceeded,
    oracle_can_precede,
    oracle_dag_height,
    oracle_jopt,
    oracle_multi_can_precede,
    oracle_multi_find_schedule,
    oracle_multi_valid,
    oracle_opt_height,
    oracle_precede_table,
)
from .reduction import (
    CostDag,
    PairwiseRun,
    activation_events,
    construct_g1,
    designate_query_nodes,
    encode_units_g2,
    pairwise_execute,
    parse_dag,
    search_height,
    serialize_dag,
    split_units,
    unit_ops,
)
from .single_pair import JScheduleStats, best, can_precede, jopt, minheight
from .trace import (
    BOTTOM,
    TOP,
    Cut,
    MultiSemTrace,
    MultipleSemaphoreError,
    NodeRef,
    Op,
    TraceError,
    TraceGraph,
    chain_prefix,
    chain_suffix,
    new_cut,
    node_cost,
    parse_multi_trace,
    parse_node_ref,
    parse_trace,
    segment,
    serialize_multi_trace,
    serialize_trace,
    to_multi,
)
from .trees import HumpTree, PriorityTree

__version__ = "0.1.0"
