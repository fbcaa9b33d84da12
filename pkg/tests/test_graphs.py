"""Typed graph substrate: typing, constraints, derived edges, matching."""

import pytest

from archevol.graphs import (
    EdgeType, GNode, Graph, GraphError, NodeType, PathStep, TypeGraph,
    TypingError, Var, check_constraint, check_typing, conditional,
    find_embeddings, forbidden, materialize_derived, strip_derived,
)

from oracles import brute_force_embeddings


def small_tg():
    return TypeGraph(
        [NodeType("A"), NodeType("B", supertype="A"), NodeType("C")],
        [EdgeType("r", "A", "C"), EdgeType("s", "C", "A", target_max=1)],
    )


class TestTypeGraph:
    def test_subtyping(self):
        tg = small_tg()
        assert tg.is_subtype("B", "A")
        assert tg.is_subtype("A", "A")
        assert not tg.is_subtype("A", "B")
        assert list(tg.supertypes("B")) == ["B", "A"]

    def test_duplicate_node_type_rejected(self):
        with pytest.raises(GraphError):
            TypeGraph([NodeType("A"), NodeType("A")], [])

    def test_unknown_supertype_rejected(self):
        with pytest.raises(GraphError):
            TypeGraph([NodeType("A", supertype="Z")], [])

    def test_edge_type_unknown_endpoint_rejected(self):
        with pytest.raises(GraphError):
            TypeGraph([NodeType("A")], [EdgeType("r", "A", "Z")])

    def test_derived_needs_path(self):
        with pytest.raises(GraphError):
            EdgeType("d", "A", "A", derived=True)
        with pytest.raises(GraphError):
            EdgeType("d", "A", "A", derivation_path=(PathStep("r", False, "A"),))

    def test_bad_multiplicity_bounds(self):
        with pytest.raises(GraphError):
            EdgeType("r", "A", "A", source_min=3, source_max=1)

    def test_count_overrides(self):
        tg = small_tg().extended([], count_overrides={"A": (1, 2)})
        nt = tg.node_types["A"]
        assert (nt.count_min, nt.count_max) == (1, 2)


class TestGraph:
    def test_duplicate_id_rejected(self):
        with pytest.raises(GraphError):
            Graph([GNode("x", "A"), GNode("x", "A")])

    def test_edge_missing_endpoint_rejected(self):
        with pytest.raises(GraphError):
            Graph([GNode("x", "A")]).with_edge("e", "r", "x", "y")

    def test_without_and_queries(self):
        g = (Graph().with_node("a", "A").with_node("c", "C")
             .with_edge("e", "r", "a", "c"))
        assert [e.id for e in g.out_edges("a", "r")] == ["e"]
        assert [e.id for e in g.in_edges("c")] == ["e"]
        g2 = g.without(["e"])
        assert "e" not in g2.edges and "a" in g2.nodes

    def test_digest_is_stable_under_construction_order(self):
        g1 = Graph([GNode("a", "A"), GNode("c", "C")])
        g2 = Graph([GNode("c", "C"), GNode("a", "A")])
        assert g1.digest() == g2.digest()
        assert g1 == g2


class TestCheckTyping:
    def test_empty_graph_conforms(self, tg):
        assert check_typing(Graph(), tg).ok

    def test_eshop_graph_conforms(self, eshop_graph, tg):
        assert check_typing(eshop_graph, tg).ok

    def test_unknown_type_is_hard_error(self, tg):
        with pytest.raises(TypingError):
            check_typing(Graph([GNode("x", "Nope")]), tg)

    def test_lone_port_violates_ownership_multiplicity(self, tg):
        g = Graph([GNode("p", "ProvPort", {"n": "x"})])
        report = check_typing(g, tg)
        assert any(v.code == "edge-multiplicity" for v in report.violations)

    def test_abstract_instantiation_flagged(self, tg):
        g = Graph([GNode("p", "Port", {"n": "x"})])
        assert any(v.code == "abstract-type"
                   for v in check_typing(g, tg).violations)

    def test_missing_and_undeclared_attributes(self, tg):
        g = Graph([GNode("c", "Component"),
                   GNode("d", "Component", {"n": "x", "zz": 1})])
        codes = {v.code for v in check_typing(g, tg).violations}
        assert "missing-attribute" in codes and "undeclared-attribute" in codes

    def test_attribute_kind_checked(self, tg):
        g = Graph([GNode("c", "Component", {"n": 7})])
        assert any(v.code == "attribute-kind"
                   for v in check_typing(g, tg).violations)

    def test_node_count_bounds(self):
        tg = small_tg().extended([], count_overrides={"A": (1, 1)})
        assert any(v.code == "node-count"
                   for v in check_typing(Graph(), tg).violations)
        two = Graph([GNode("a", "A"), GNode("b", "B")])  # subtype counts toward A
        assert any(v.code == "node-count" for v in check_typing(two, tg).violations)
        one = Graph([GNode("a", "A")])
        assert check_typing(one, tg).ok


class TestConstraints:
    def test_forbidden_counts_every_match(self):
        tg = small_tg()
        pat = Graph().with_node("x", "A")
        g = Graph([GNode("a", "A"), GNode("b", "B")])
        report = check_constraint(g, forbidden("no-a", pat), tg)
        assert len(report.violations) == 2

    def test_conditional_satisfied_and_violated(self):
        tg = small_tg()
        prem = Graph().with_node("x", "A")
        conc = prem.with_node("y", "C").with_edge("e", "r", "x", "y")
        c = conditional("a-has-c", (prem, conc))
        bad = Graph([GNode("a", "A")])
        assert len(check_constraint(bad, c, tg).violations) == 1
        good = (Graph().with_node("a", "A").with_node("c", "C")
                .with_edge("e", "r", "a", "c"))
        assert check_constraint(good, c, tg).ok

    def test_conditional_premise_must_be_subgraph(self):
        prem = Graph().with_node("x", "A")
        with pytest.raises(GraphError):
            conditional("bad", (prem, Graph().with_node("y", "A")))

    def test_no_premise_match_is_vacuously_ok(self):
        tg = small_tg()
        prem = Graph().with_node("x", "C")
        conc = prem.with_node("y", "A").with_edge("e", "s", "x", "y")
        assert check_constraint(Graph([GNode("a", "A")]),
                                conditional("c", (prem, conc)), tg).ok


class TestDerivedEdges:
    def test_connected_pair_gets_connects_to(self, tg):
        g = (Graph()
             .with_node("c1", "Component", {"n": "A"})
             .with_node("c2", "Component", {"n": "B"})
             .with_node("p1", "ProvPort", {"n": "p"})
             .with_node("p2", "ReqPort", {"n": "q"})
             .with_node("k", "Connector", {"n": "K"})
             .with_node("r1", "ProvRole", {"n": "pr"})
             .with_node("r2", "ReqRole", {"n": "rr"})
             .with_edge("e1", "hasPort", "c1", "p1")
             .with_edge("e2", "hasPort", "c2", "p2")
             .with_edge("e3", "hasRole", "k", "r1")
             .with_edge("e4", "hasRole", "k", "r2")
             .with_edge("e5", "attachment", "p1", "r1")
             .with_edge("e6", "attachment", "p2", "r2"))
        mat = materialize_derived(g, tg)
        conns = sorted((e.src, e.tgt) for e in mat.edges.values()
                       if e.type == "connectsTo")
        assert conns == [("c1", "c2"), ("c2", "c1")]
        assert {(e.src, e.tgt) for e in mat.edges.values() if e.type == "connector"} \
            == {("c1", "k"), ("c2", "k")}

    def test_no_attachments_no_derived_edges(self, tg):
        g = Graph([GNode("c", "Component", {"n": "A"})])
        mat = materialize_derived(g, tg)
        assert len(mat.edges) == 0

    def test_single_attachment_yields_no_self_loop(self, tg):
        g = (Graph()
             .with_node("c", "Component", {"n": "A"})
             .with_node("p", "ProvPort", {"n": "p"})
             .with_node("k", "Connector", {"n": "K"})
             .with_node("r", "ProvRole", {"n": "r"})
             .with_edge("e1", "hasPort", "c", "p")
             .with_edge("e2", "hasRole", "k", "r")
             .with_edge("e3", "attachment", "p", "r"))
        mat = materialize_derived(g, tg)
        assert not [e for e in mat.edges.values() if e.type == "connectsTo"]

    def test_strip_then_rematerialize_is_idempotent(self, eshop_graph, tg):
        mat = materialize_derived(eshop_graph, tg)
        again = materialize_derived(strip_derived(mat, tg), tg)
        assert again.digest() == mat.digest()

    def test_refuses_existing_derived_edges(self, eshop_graph, tg):
        mat = materialize_derived(eshop_graph, tg)
        with pytest.raises(GraphError):
            materialize_derived(mat, tg)

    def test_eshop_connects_to_matches_path_oracle(self, eshop, eshop_graph, tg):
        mat = materialize_derived(eshop_graph, tg)
        got = {(e.src, e.tgt) for e in mat.edges.values() if e.type == "connectsTo"}
        # oracle: enumerate attachment-role-connector-role-attachment chains
        role_conn = {e.tgt: e.src for e in eshop_graph.edges.values() if e.type == "hasRole"}
        owner = {e.tgt: e.src for e in eshop_graph.edges.values() if e.type == "hasPort"}
        att = [(e.src, e.tgt) for e in eshop_graph.edges.values() if e.type == "attachment"]
        want = set()
        for p1, r1 in att:
            for p2, r2 in att:
                if r1 != r2 and role_conn[r1] == role_conn[r2] and owner[p1] != owner[p2]:
                    want.add((owner[p1], owner[p2]))
        assert got == want


class TestFindEmbeddings:
    def test_matches_brute_force_on_small_graphs(self, tg):
        host = (Graph()
                .with_node("c1", "Component", {"n": "A"})
                .with_node("c2", "Server", {"n": "B"})
                .with_node("g1", "Configuration", {"n": "B"})
                .with_edge("e1", "hasConfiguration", "c2", "g1")
                .with_edge("e2", "contains", "g1", "c1"))
        for pattern in [
            Graph().with_node("x", "Component"),
            Graph().with_node("x", "Component", strict=True),
            (Graph().with_node("x", "Server", {"n": Var("v")})
             .with_node("y", "Configuration", {"n": Var("v")})
             .with_edge("e", "hasConfiguration", "x", "y")),
        ]:
            got = {frozenset(m.items()) for m, _ in find_embeddings(pattern, host, tg)}
            want = {frozenset(m.items())
                    for m, _ in brute_force_embeddings(pattern, host, tg)}
            assert got == want

    def test_variable_binding_forces_attribute_equality(self, tg):
        host = (Graph().with_node("s", "Server", {"n": "X"})
                .with_node("g", "Configuration", {"n": "Y"}))
        pat = (Graph().with_node("a", "Server", {"n": Var("v")})
               .with_node("b", "Configuration", {"n": Var("v")}))
        assert find_embeddings(pat, host, tg) == []

    def test_partial_seeding_restricts_results(self, tg):
        host = Graph([GNode("c1", "Component", {"n": "A"}),
                      GNode("c2", "Component", {"n": "B"})])
        pat = Graph().with_node("x", "Component")
        all_ = find_embeddings(pat, host, tg)
        seeded = find_embeddings(pat, host, tg, partial={"x": "c2"})
        assert len(all_) == 2 and len(seeded) == 1
        assert seeded[0][0]["x"] == "c2"

    def test_canonical_order_is_deterministic(self, tg):
        host = Graph([GNode(f"c{i}", "Component", {"n": "x"}) for i in range(4)])
        pat = Graph().with_node("a", "Component").with_node("b", "Component")
        maps = [tuple(sorted(m.items())) for m, _ in find_embeddings(pat, host, tg)]
        assert maps == sorted(maps)
        assert len(maps) == 12  # 4P2 ordered injective pairs
