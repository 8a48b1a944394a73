import pytest
from hypothesis import given, settings, strategies as st

from racecheck import (
    BOTTOM,
    TOP,
    Cut,
    MultipleSemaphoreError,
    NodeRef,
    Op,
    TraceError,
    TraceGraph,
    chain_prefix,
    chain_suffix,
    node_cost,
    parse_multi_trace,
    parse_node_ref,
    parse_trace,
    segment,
    serialize_multi_trace,
    serialize_trace,
)


def ops(*values):
    return tuple(Op(v) for v in values)


class TestParsing:
    def test_two_singleton_chains(self):
        g = parse_trace("V s\nP s")
        assert g.chains == (ops("V"), ops("P"))
        assert g.p == 2 and g.n == 2

    def test_empty_trace_rejected(self):
        with pytest.raises(TraceError, match="empty trace"):
            parse_trace("")

    def test_multiple_semaphores_named(self):
        with pytest.raises(MultipleSemaphoreError, match="multiple semaphores: b"):
            parse_trace("P a V b")

    def test_colon_and_bare_forms(self):
        g = parse_trace("P:s V:s\nP V")
        assert g.chains == (ops("P", "V"), ops("P", "V"))

    def test_sign_style_synonyms(self):
        g = parse_trace("+x -x\n-x")
        assert g.semaphore == "x"
        assert g.chains == (ops("V", "P"), ops("P"))

    def test_comments_and_blank_chains(self):
        g = parse_trace("# header comment\nP V  # trailing\n\nV")
        assert g.chains == (ops("P", "V"), (), ops("V"))

    def test_syntax_error_position(self):
        with pytest.raises(TraceError) as exc:
            parse_trace("P V\nP X! V")
        assert exc.value.line == 2
        assert exc.value.col == 3

    def test_bad_selector(self):
        with pytest.raises(ValueError):
            parse_node_ref("1:0")
        with pytest.raises(ValueError):
            parse_node_ref("nope")
        assert parse_node_ref("3:14") == NodeRef(3, 14)

    def test_multi_trace_first_appearance_order(self):
        mg = parse_multi_trace("+b -a\n+a")
        assert mg.semaphores == ("b", "a")
        assert mg.chains[0] == ((1, "b"), (-1, "a"))


class TestGraph:
    def test_node_cost(self):
        g = parse_trace("P V")
        assert node_cost(g, NodeRef(1, 1)) == 1
        assert node_cost(g, NodeRef(1, 2)) == -1

    def test_node_cost_rejects_sentinels(self):
        g = parse_trace("P")
        with pytest.raises(ValueError):
            node_cost(g, BOTTOM)
        with pytest.raises(ValueError):
            node_cost(g, NodeRef(1, 2))

    def test_pre_succ(self):
        g = parse_trace("P V P")
        assert g.pre(NodeRef(1, 1)) == BOTTOM
        assert g.succ(NodeRef(1, 3)) == TOP
        assert g.succ(NodeRef(1, 1)) == NodeRef(1, 2)

    def test_from_costs_roundtrip(self):
        g = TraceGraph.from_costs([[1, -1], []])
        assert g.chains == (ops("P", "V"), ())
        with pytest.raises(ValueError):
            TraceGraph.from_costs([[2]])

    def test_empty_graph_rejected(self):
        with pytest.raises(TraceError):
            TraceGraph(())


class TestSegments:
    def test_whole_chain(self):
        g = parse_trace("P V P")
        assert segment(g, NodeRef(1, 1), NodeRef(1, 3)) == list(ops("P", "V", "P"))

    def test_single_node(self):
        g = parse_trace("P V P")
        assert segment(g, NodeRef(1, 2), NodeRef(1, 2)) == [Op.V]

    def test_prefix_of_bottom_is_empty(self):
        g = parse_trace("P V P")
        assert chain_prefix(g, BOTTOM) == []

    def test_errors(self):
        g = parse_trace("P V\nV P")
        with pytest.raises(ValueError):
            segment(g, NodeRef(1, 1), NodeRef(2, 1))
        with pytest.raises(ValueError):
            segment(g, NodeRef(1, 2), NodeRef(1, 1))

    def test_prefix_suffix_cover_chain(self):
        g = parse_trace("P V P V")
        for k in range(1, 5):
            v = NodeRef(1, k)
            pre = chain_prefix(g, v)
            suf = chain_suffix(g, g.succ(v)) if g.succ(v) != TOP else []
            assert pre + suf == list(g.chains[0])
            total = sum(op.cost for op in g.chains[0])
            assert sum(o.cost for o in pre) + sum(o.cost for o in suf) == total


class TestCut:
    def test_validation(self):
        g = parse_trace("P\nV")
        Cut.full(g)
        Cut.bottoms(g)
        with pytest.raises(ValueError):
            Cut((NodeRef(2, 1), NodeRef(2, 1)))

    def test_replace_and_positions(self):
        g = parse_trace("P V\nV")
        c = Cut.bottoms(g).replace(1, NodeRef(1, 2))
        assert c.positions() == (2, 0)
        assert Cut.at_positions(g, [2, 0]) == c


chains_strategy = st.lists(
    st.lists(st.sampled_from([1, -1]), max_size=6), min_size=1, max_size=4
)


@settings(max_examples=120, deadline=None, derandomize=True)
@given(chains_strategy)
def test_serialize_parse_roundtrip(chains):
    g = TraceGraph.from_costs(chains)
    assert parse_trace(serialize_trace(g)) == g


@settings(max_examples=120, deadline=None, derandomize=True)
@given(chains_strategy)
def test_multi_roundtrip(chains):
    from racecheck import to_multi

    mg = to_multi(TraceGraph.from_costs(chains))
    back = parse_multi_trace(serialize_multi_trace(mg))
    # parsing only learns the semaphores actually used
    assert back.chains == mg.chains
    assert set(back.semaphores) == {n for c in mg.chains for _, n in c}


@settings(max_examples=80, deadline=None, derandomize=True)
@given(chains_strategy)
def test_segment_lengths_sum_to_n(chains):
    g = TraceGraph.from_costs(chains)
    total = 0
    for i in range(1, g.p + 1):
        if g.chain_len(i):
            total += len(segment(g, NodeRef(i, 1), NodeRef(i, g.chain_len(i))))
    assert total == g.n
