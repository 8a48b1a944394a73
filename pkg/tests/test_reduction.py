import itertools
import random

import pytest

from racecheck import (
    CostDag,
    MultiSemTrace,
    NodeRef,
    activation_events,
    construct_g1,
    designate_query_nodes,
    encode_units_g2,
    pairwise_execute,
    parse_dag,
    search_height,
    serialize_dag,
    serialize_multi_trace,
    split_units,
    unit_ops,
)
from racecheck.oracle import (
    oracle_dag_height,
    oracle_multi_can_precede,
    oracle_multi_find_schedule,
    oracle_multi_valid,
)

# the five-node worked instance: three +1 nodes feeding two -1 nodes
WORKED = CostDag(
    (1, 1, 1, -1, -1),
    frozenset({(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (5, 4)}),
)


def tokens(chain):
    return [("+" if d > 0 else "-") + name for d, name in chain]


class TestCostDag:
    def test_validation(self):
        with pytest.raises(ValueError):
            CostDag((2,), frozenset())
        with pytest.raises(ValueError):
            CostDag((1, 1), frozenset({(1, 2), (2, 1)}))
        with pytest.raises(ValueError):
            CostDag((1,), frozenset({(1, 1)}))

    def test_parse_serialize_roundtrip(self):
        text = serialize_dag(WORKED)
        assert parse_dag(text) == WORKED

    def test_parse_errors(self):
        with pytest.raises(Exception):
            parse_dag("node 1 +2")
        with pytest.raises(Exception):
            parse_dag("node 2 +1")  # ids must cover 1..n


class TestConstructG1:
    def test_worked_instance_chain_table(self):
        g1 = construct_g1(WORKED, 2)
        got = [tokens(c) for c in g1.chains]
        assert got == [
            ["+Sa", "-S1", "-S1", "-Sb"],
            ["+S1", "+Sa", "-S2", "-Sb"],
            ["+S1", "+Sa", "-S3", "-S3", "-Sb"],
            ["+S2", "+S3", "+S5", "-Sa", "-Sb"],
            ["+S3", "-Sa", "-S5", "-Sb"],
            ["+Sb", "+Sb", "+Sb", "+Sb", "+Sb", "+Sa"],
            [],
            [],
            [],
            ["+Sa", "-Sa"],
            ["+Sa", "-Sa"],
            ["-Sa", "-Sa"],
        ]

    def test_single_positive_node(self):
        g1 = construct_g1(CostDag((1,), frozenset()), 1)
        assert [tokens(c) for c in g1.chains] == [
            ["+Sa", "-Sb"],
            ["+Sb"],
            [],
            ["-Sa"],
        ]

    def test_ell_bounds(self):
        with pytest.raises(ValueError):
            construct_g1(WORKED, 6)
        with pytest.raises(ValueError):
            construct_g1(WORKED, 0)  # ell - n_plus + n_minus < 0

    def test_semaphore_balance(self):
        rng = random.Random(3)
        for _ in range(60):
            n = rng.randrange(1, 5)
            arcs = frozenset(
                (i, j)
                for i in range(1, n + 1)
                for j in range(i + 1, n + 1)
                if rng.random() < 0.4
            )
            dag = CostDag(tuple(rng.choice([1, -1]) for _ in range(n)), arcs)
            lo = max(0, dag.n_plus - dag.n_minus)
            for ell in range(lo, n + 1):
                g1 = construct_g1(dag, ell)
                for name in g1.semaphores:
                    pluses = sum(
                        1 for c in g1.chains for d, s in c if s == name and d > 0
                    )
                    minuses = sum(
                        1 for c in g1.chains for d, s in c if s == name and d < 0
                    )
                    assert pluses == minuses

    def test_deterministic(self):
        a = serialize_multi_trace(construct_g1(WORKED, 2))
        b = serialize_multi_trace(construct_g1(WORKED, 2))
        assert a == b


class TestUnits:
    def test_minus_unit_golden(self):
        assert tokens(unit_ops(1, -1)) == [
            "+T1", "+T2", "-T1", "+T2", "-T1", "+T2", "-T2", "-T2", "-T2", "-T2",
        ]

    def test_plus_unit_golden(self):
        assert tokens(unit_ops(1, +1)) == [
            "+T1", "+T2", "+T1", "-T2", "+T1", "-T2", "+T2", "+T2", "-T1", "-T1",
        ]

    def test_unit_length(self):
        for i in range(1, 8):
            for sign in (-1, 1):
                assert len(unit_ops(i, sign)) == 2 * (i + 1) + 6

    def test_pairs_unlock_iff_indices_match(self):
        boot = ((-1, "T1"), (-1, "T1"), (-1, "T2"), (-1, "T2"))
        for i in range(1, 5):
            for j in range(1, 5):
                mg = MultiSemTrace(
                    (boot, tuple(unit_ops(i, -1)), tuple(unit_ops(j, +1))),
                    ("T1", "T2"),
                )
                assert oracle_multi_valid(mg, "nonpos") == (i == j)

    def test_encode_structure(self):
        g1 = construct_g1(WORKED, 2)
        g2 = encode_units_g2(g1)
        assert len(g2.chains) == len(g1.chains) + 1
        assert tokens(g2.chains[0]) == ["-T1", "-T1", "-T2", "-T2"]
        # chain sizes follow the per-op unit sizes; semaphore k has index k
        for orig, enc in zip(g1.chains, g2.chains[1:]):
            want = sum(
                2 * (g1.semaphores.index(name) + 2) + 6 for _, name in orig
            )
            assert len(enc) == want
        with pytest.raises(ValueError):
            encode_units_g2(g1, order=["S1"])

    def test_split_units_roundtrip(self):
        g1 = construct_g1(WORKED, 2)
        g2 = encode_units_g2(g1)
        for chain in range(2, len(g2.chains) + 1):
            units = split_units(g2, chain)
            orig = g1.chains[chain - 2]
            assert [(u.sign, u.index) for u in units] == [
                (d, g1.semaphores.index(name) + 1) for d, name in orig
            ]


class TestPairwise:
    def test_worked_instance_succeeds_at_two(self):
        g1 = construct_g1(WORKED, 2)
        run = pairwise_execute(g1, [1, 3, 5, 2, 4])
        assert run.ok and run.failure is None
        assert len(run.schedule) == g1.n

    def test_worked_instance_fails_at_one(self):
        g1 = construct_g1(WORKED, 1)
        run = pairwise_execute(g1, [1, 3, 5, 2, 4])
        assert not run.ok
        assert "no accumulator decrement" in run.failure

    def test_single_node(self):
        g1 = construct_g1(CostDag((1,), frozenset()), 1)
        assert pairwise_execute(g1, [1]).ok

    def test_rejects_non_topological_order(self):
        g1 = construct_g1(WORKED, 2)
        with pytest.raises(ValueError):
            pairwise_execute(g1, [2, 1, 3, 5, 4])

    def test_replay_is_valid_schedule(self):
        g1 = construct_g1(WORKED, 2)
        run = pairwise_execute(g1, [1, 3, 5, 2, 4])
        values = {name: 0 for name in g1.semaphores}
        cursors = [0] * len(g1.chains)
        for ref in run.schedule:
            assert cursors[ref.chain - 1] == ref.pos - 1
            cursors[ref.chain - 1] += 1
            delta, name = g1.node(ref)
            values[name] += delta
            assert values[name] <= 0

    def test_succeeds_iff_schedule_height_fits(self):
        rng = random.Random(13)
        for _ in range(60):
            n = rng.randrange(1, 5)
            arcs = frozenset(
                (i, j)
                for i in range(1, n + 1)
                for j in range(i + 1, n + 1)
                if rng.random() < 0.3
            )
            dag = CostDag(tuple(rng.choice([1, -1]) for _ in range(n)), arcs)
            order = [i for i in range(1, n + 1)]
            run_cost = peak = 0
            for k in order:
                run_cost += dag.costs[k - 1]
                peak = max(peak, run_cost)
            for ell in range(max(0, dag.n_plus - dag.n_minus), n + 1):
                run = pairwise_execute(construct_g1(dag, ell), order)
                assert run.ok == (peak <= ell)


class TestDesignateAndSearch:
    def test_query_nodes(self):
        g1 = construct_g1(WORKED, 2)
        g2 = encode_units_g2(g1)
        v, w = designate_query_nodes(g2)
        assert v == NodeRef(1, 1)
        assert w.chain == 7  # the barrier chain, shifted by the bootstrap
        assert w.pos == len(g2.chains[6])

    def test_worked_pipeline_query(self):
        for ell, expect in ((2, True), (1, False)):
            g2 = encode_units_g2(construct_g1(WORKED, ell))
            v, w = designate_query_nodes(g2)
            got = oracle_multi_can_precede(g2, v, w, "nonpos", max_states=5_000_000)
            assert got == expect

    def test_search_height_matches_dag_oracle(self):
        rng = random.Random(29)
        for _ in range(25):
            n = rng.randrange(1, 5)
            arcs = frozenset(
                (i, j)
                for i in range(1, n + 1)
                for j in range(i + 1, n + 1)
                if rng.random() < 0.4
            )
            dag = CostDag(tuple(rng.choice([1, -1]) for _ in range(n)), arcs)
            assert search_height(dag) == oracle_dag_height(dag.costs, dag.arcs)

    def test_malformed_g2_rejected(self):
        with pytest.raises(ValueError):
            designate_query_nodes(
                MultiSemTrace.from_chains([[(1, "T1")]], ["T1", "T2"])
            )


class TestActivationDiscipline:
    def test_worked_instance_schedule(self):
        g2 = encode_units_g2(construct_g1(WORKED, 2))
        sched = oracle_multi_find_schedule(g2, "nonpos", max_states=5_000_000)
        assert sched is not None
        events = activation_events(g2, sched)
        # every unit both activates and finishes, in matched pairs
        n_units = sum(len(split_units(g2, c)) for c in range(2, len(g2.chains) + 1))
        assert len(events) == 2 * n_units

    def test_random_small_instances(self):
        rng = random.Random(37)
        for _ in range(10):
            n = rng.randrange(1, 4)
            arcs = frozenset(
                (i, j)
                for i in range(1, n + 1)
                for j in range(i + 1, n + 1)
                if rng.random() < 0.4
            )
            dag = CostDag(tuple(rng.choice([1, -1]) for _ in range(n)), arcs)
            ell = oracle_dag_height(dag.costs, dag.arcs)
            g2 = encode_units_g2(construct_g1(dag, ell))
            sched = oracle_multi_find_schedule(g2, "nonpos", max_states=3_000_000)
            assert sched is not None
            activation_events(g2, sched)  # raises on any discipline breach


def test_end_to_end_equivalence_small():
    """Height question, both gadget validities, and the designated query
    all agree on every DAG with up to three nodes."""
    for n in range(1, 4):
        skeleton = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        for arc_bits in range(1 << len(skeleton)):
            arcs = frozenset(
                a for k, a in enumerate(skeleton) if arc_bits >> k & 1
            )
            for labels in itertools.product((1, -1), repeat=n):
                dag = CostDag(tuple(labels), arcs)
                h = oracle_dag_height(dag.costs, dag.arcs)
                for ell in range(max(0, dag.n_plus - dag.n_minus), n + 1):
                    want = h <= ell
                    g1 = construct_g1(dag, ell)
                    assert oracle_multi_valid(g1, "nonpos") == want
                    g2 = encode_units_g2(g1)
                    assert (
                        oracle_multi_valid(g2, "nonpos", max_states=3_000_000)
                        == want
                    )
                    v, w = designate_query_nodes(g2)
                    assert (
                        oracle_multi_can_precede(
                            g2, v, w, "nonpos", max_states=3_000_000
                        )
                        == want
                    )
