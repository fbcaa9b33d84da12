"""Rule construction, matching with NACs, application, and sequences."""

import pytest

from archevol.cosa import base_type_graph
from archevol.graphs import GNode, Graph, Var, check_typing
from archevol.rewriting import (
    GluingError, Match, Rule, RuleError, RuleSequence, SequenceError,
    apply, apply_sequence, find_matches,
)


def mini_tg():
    from archevol.graphs import EdgeType, NodeType, TypeGraph
    return TypeGraph([NodeType("N"), NodeType("M")],
                     [EdgeType("e", "N", "N"), EdgeType("f", "N", "M")])


def delete_node_rule(tg):
    """Deletes one N node (no edges in the LHS)."""
    return Rule("DelN", Graph().with_node("x", "N"), Graph(), tg)


class TestRuleValidation:
    def test_preserved_node_cannot_change_type(self):
        tg = mini_tg()
        with pytest.raises(RuleError):
            Rule("bad", Graph().with_node("x", "N"), Graph().with_node("x", "M"), tg)

    def test_nac_must_extend_lhs(self):
        tg = mini_tg()
        lhs = Graph().with_node("x", "N")
        with pytest.raises(RuleError):
            Rule("bad", lhs, lhs, tg, nacs=(Graph().with_node("y", "N"),))

    def test_unbound_rhs_variable_rejected(self):
        from archevol.graphs import EdgeType, NodeType, TypeGraph
        tg = TypeGraph([NodeType("N", attributes=(("n", "string"),))], [])
        with pytest.raises(RuleError):
            Rule("bad", Graph(), Graph().with_node("x", "N", {"n": Var("v")}), tg)

    def test_created_deleted_accessors(self, rules):
        r = rules["MoveComponentToServer"]
        assert r.created_edges() == {"ct"}
        assert r.created_nodes() == set() == r.deleted_nodes()


class TestFindMatches:
    def test_create_server_has_one_match_on_eshop(self, rules, eshop_graph):
        ms = find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})
        assert len(ms) == 1

    def test_create_server_blocked_when_server_exists(self, rules, eshop_graph):
        g = eshop_graph.with_node("srv", "Server", {"n": "S"})
        assert find_matches(rules["CreateServer"], g, {"name": "T"}) == []

    def test_move_rule_sees_three_unassigned_components(self, rules, eshop_graph):
        g = apply(find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0])
        ms = find_matches(rules["MoveComponentToServer"], g)
        assert len(ms) == 3

    def test_missing_parameter_is_an_error(self, rules, eshop_graph):
        with pytest.raises(RuleError):
            find_matches(rules["CreateServer"], eshop_graph)

    def test_matches_are_canonically_ordered(self, rules, eshop_graph):
        g = apply(find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0])
        ms = find_matches(rules["MoveComponentToServer"], g)
        keys = [m.mapping for m in ms]
        assert keys == sorted(keys)


class TestApply:
    def test_create_server_adds_exactly_two_nodes_one_edge(self, rules, eshop_graph):
        before_n, before_e = len(eshop_graph.nodes), len(eshop_graph.edges)
        m = find_matches(rules["CreateServer"], eshop_graph, {"name": "Srv"})[0]
        g = apply(m)
        assert len(g.nodes) == before_n + 2
        assert len(g.edges) == before_e + 1
        srv = [n for n in g.nodes.values() if n.type == "Server"]
        assert len(srv) == 1 and srv[0].attr("n") == "Srv"

    def test_identity_rule_returns_equal_graph(self, eshop_graph, tg):
        lhs = Graph().with_node("x", "Component", {"n": Var("v")})
        r = Rule("Id", lhs, lhs, tg)
        m = find_matches(r, eshop_graph)[0]
        assert apply(m).digest() == eshop_graph.digest()

    def test_move_adds_one_edge_only(self, rules, eshop_graph):
        g = apply(find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0])
        m = find_matches(rules["MoveComponentToServer"], g)[0]
        out = apply(m)
        assert len(out.nodes) == len(g.nodes)
        assert len(out.edges) == len(g.edges) + 1

    def test_gluing_condition_blocks_dangling_edges(self):
        tg = mini_tg()
        host = (Graph().with_node("a", "N").with_node("b", "N")
                .with_edge("ab", "e", "a", "b"))
        r = delete_node_rule(tg)
        dangling = [m for m in find_matches(r, host)]
        for m in dangling:
            with pytest.raises(GluingError):
                apply(m)

    def test_deleting_node_and_its_edges_is_allowed(self):
        tg = mini_tg()
        host = (Graph().with_node("a", "N").with_node("b", "N")
                .with_edge("ab", "e", "a", "b"))
        lhs = (Graph().with_node("x", "N").with_node("y", "N")
               .with_edge("xy", "e", "x", "y"))
        r = Rule("DelEdgeAndTarget", lhs, Graph().with_node("x", "N"), tg)
        out = apply(find_matches(r, host)[0])
        assert len(out.nodes) == 1 and len(out.edges) == 0

    def test_stale_match_rejected(self, rules, eshop_graph):
        m = find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0]
        changed = eshop_graph.with_node("zz", "Component", {"n": "zz"})
        with pytest.raises(RuleError):
            apply(m, host=changed)

    def test_rewriting_preserves_structural_typing(self, rules, eshop_graph, tg):
        g = eshop_graph
        for name, binds in [("CreateServer", {"name": "S"}),
                            ("MoveComponentToServer", None),
                            ("DelegateProvPortToServer", None),
                            ("DelegateReqPortToServer", None)]:
            g = apply(find_matches(rules[name], g, binds)[0])
            bad = [v for v in check_typing(g, tg).violations
                   if v.code in ("endpoint-typing", "abstract-type")]
            assert bad == []

    def test_self_disabling_rule_has_no_match_in_own_output(self, rules, eshop_graph):
        m = find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0]
        assert find_matches(rules["CreateServer"], apply(m), {"name": "T"}) == []


class TestSequences:
    def test_empty_sequence_rejected(self):
        with pytest.raises(RuleError):
            RuleSequence(())

    def test_unknown_repetition_rejected(self, rules):
        with pytest.raises(RuleError):
            RuleSequence.of((rules["CreateServer"], "plus"))

    def test_star_with_no_matches_is_identity(self, rules, eshop_graph):
        s = RuleSequence.of((rules["MoveComponentToServer"], "star"))
        out, trace = apply_sequence(s, eshop_graph)
        assert out.digest() == eshop_graph.digest()
        assert trace.steps == ()

    def test_once_without_match_errors(self, rules, eshop_graph):
        s = RuleSequence.of((rules["MoveComponentToServer"], "once"))
        with pytest.raises(SequenceError):
            apply_sequence(s, eshop_graph)

    def test_double_create_server_fails_on_second(self, rules, eshop_graph):
        s = RuleSequence.of((rules["CreateServer"], "once"),
                            (rules["CreateServer"], "once"))
        with pytest.raises(SequenceError) as exc:
            apply_sequence(s, eshop_graph, bindings={"name": "S"})
        assert "CreateServer" in str(exc.value)

    def test_selective_chooser_moves_only_one_component(self, rules, eshop_graph):
        order = "C:Order"

        def only_order(rule, matches):
            wanted = [m for m in matches if order in dict(m.mapping).values()
                      or not any(v.startswith("C:") or v == "n1"
                                 for v in dict(m.mapping).values())]
            for m in matches:
                mapped = dict(m.mapping).values()
                if rule.name == "CreateServer":
                    return m
                if order in mapped:
                    return m
            return None

        from archevol.clientserver import server_intro_sequence
        out, trace = apply_sequence(server_intro_sequence(rules), eshop_graph,
                                    chooser=only_order, bindings={"name": "S"})
        moved = [e for e in out.edges.values() if e.type == "contains"]
        assert len(moved) == 1 and moved[0].tgt == order
        delegated = [e for e in out.edges.values() if e.type == "binding"]
        # all five of Order's ports are delegated to the server
        assert len(delegated) == 5

    def test_runaway_star_hits_ceiling(self, tg):
        # every application creates a node that itself matches the left side,
        # so the star never runs out of fresh matches
        lhs = Graph().with_node("x", "Component", {"n": Var("v")})
        rhs = lhs.with_node("y", "Component", {"n": Var("v")})
        grow = Rule("Copy", lhs, rhs, tg)
        s = RuleSequence.of((grow, "star"))
        host = Graph().with_node("c", "Component", {"n": "seed"})
        with pytest.raises(SequenceError) as exc:
            apply_sequence(s, host, max_rewrites=25)
        assert "25" in str(exc.value)

    def test_star_over_non_self_disabling_rule_terminates(self, rules, eshop_graph):
        g = apply(find_matches(rules["CreateServer"], eshop_graph, {"name": "S"})[0])
        g, _ = apply_sequence(RuleSequence.of((rules["MoveComponentToServer"], "star")), g)
        out, trace = apply_sequence(
            RuleSequence.of((rules["DelegateProvPortToServer"], "star")), g)
        # one delegation per provided port of a contained component
        assert len(trace.steps) == 6
        again, trace2 = apply_sequence(
            RuleSequence.of((rules["DelegateProvPortToServer"], "star")), out)
        assert len(trace2.steps) == 6  # fresh run re-finds prior footprints only

    def test_determinism(self, rules, eshop_graph):
        from archevol.clientserver import server_intro_sequence
        s = server_intro_sequence(rules)
        a, _ = apply_sequence(s, eshop_graph, bindings={"name": "S"})
        b, _ = apply_sequence(s, eshop_graph, bindings={"name": "S"})
        assert a.digest() == b.digest()

    def test_trace_records_digests(self, rules, eshop_graph):
        s = RuleSequence.of((rules["CreateServer"], "once"))
        out, trace = apply_sequence(s, eshop_graph, bindings={"name": "S"})
        assert len(trace.steps) == 1
        step = trace.steps[0]
        assert step.pre_digest == eshop_graph.digest()
        assert step.post_digest == out.digest()
