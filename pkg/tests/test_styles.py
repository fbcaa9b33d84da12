"""Architectural styles: constraint checking and the style file format."""

import json
from pathlib import Path

import pytest

from archevol import fixtures
from archevol.graphs import Graph, GraphError, NodeType, Var, forbidden
from archevol.model import Architecture, Component, Port
from archevol.styles import (
    BUILTIN_STYLES, FORMAT_STYLE, Style, check_style, client_server_style,
    graph_from_dict, graph_to_dict, load_style, save_style, style_from_dict,
    style_to_dict,
)

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


class TestStyleDefinition:
    def test_type_graph_extension(self):
        tg = client_server_style().type_graph()
        assert tg.is_subtype("Client", "Component")
        assert tg.is_subtype("Server", "Component")
        srv = tg.node_types["Server"]
        assert (srv.count_min, srv.count_max) == (1, 1)
        cli = tg.node_types["Client"]
        assert (cli.count_min, cli.count_max) == (1, None)

    def test_extension_must_subtype_existing_type(self):
        s = Style("bad", type_extension=(NodeType("Orphan"),))
        with pytest.raises(GraphError):
            s.type_graph()

    def test_extension_may_subtype_other_extension(self):
        s = Style("ok", type_extension=(
            NodeType("Tier", supertype="Component"),
            NodeType("Web", supertype="Tier")))
        tg = s.type_graph()
        assert tg.is_subtype("Web", "Component")


class TestCheckStyle:
    def test_eshop_fails_with_server_count_violation(self, eshop):
        report = check_style(eshop, client_server_style())
        assert not report.ok
        counts = [v for v in report.violations if v.code == "node-count"]
        assert any("Server" in v.message for v in counts)

    def test_converted_eshop_conforms(self):
        a = Architecture.load(FIXTURE_DIR / "eshop-cs.arch")
        report = check_style(a, client_server_style())
        assert report.ok and report.violations == ()

    def test_disconnected_client_violates_connectivity(self):
        a = Architecture("x", [
            Component("S", kind="server", children=[]),
            Component("C", kind="client", children=[]),
        ])
        report = check_style(a, client_server_style())
        names = {v.code for v in report.violations}
        assert "client-connected-to-server" in names

    def test_uncontained_plain_component_flagged(self):
        a = Architecture.load(FIXTURE_DIR / "eshop-cs.arch")
        a.components.append(Component("Stray"))
        report = check_style(a, client_server_style())
        names = {v.code for v in report.violations}
        assert "component-contained" in names

    def test_forbidden_style_constraint(self):
        no_order = Style("no-order-component", constraints=(
            forbidden("no-order",
                      Graph().with_node("c", "Component", {"n": "Order"})),))
        assert not check_style(fixtures.eshop(), no_order).ok
        assert check_style(fixtures.empty(), no_order).ok


class TestGraphSerialization:
    def test_roundtrip_with_vars(self):
        g = (Graph().with_node("a", "Component", {"n": Var("x")})
             .with_node("b", "Component", {"n": "lit"})
             .with_edge("e", "contains", "a", "b"))
        again = graph_from_dict(graph_to_dict(g))
        assert again.digest() == g.digest()

    def test_var_encoding_distinct_from_string(self):
        g = Graph().with_node("a", "Component", {"n": Var("x")})
        d = graph_to_dict(g)
        assert d["nodes"][0]["attrs"]["n"] == {"var": "x"}


class TestStyleFileFormat:
    def test_dict_roundtrip(self):
        s = client_server_style()
        again = style_from_dict(style_to_dict(s))
        assert again.type_graph().node_types.keys() == s.type_graph().node_types.keys()
        assert [c.name for c in again.constraints] == [c.name for c in s.constraints]
        assert again.counts == s.counts

    def test_save_load_and_recheck(self, tmp_path, eshop):
        p = tmp_path / "cs.style"
        save_style(client_server_style(), p)
        loaded = load_style(p)
        direct = check_style(eshop, client_server_style())
        via_file = check_style(eshop, loaded)
        assert [v.code for v in via_file.violations] == \
            [v.code for v in direct.violations]

    def test_format_marker_enforced(self):
        d = style_to_dict(client_server_style())
        assert d["format"] == FORMAT_STYLE
        d["format"] = "other@9"
        from archevol.model import ModelError
        with pytest.raises(ModelError):
            style_from_dict(d)

    def test_saved_file_is_json(self, tmp_path):
        p = tmp_path / "cs.style"
        save_style(client_server_style(), p)
        data = json.loads(p.read_text())
        assert data["name"] == "client-server"

    def test_builtin_registry(self):
        assert set(BUILTIN_STYLES) == {"client-server"}
        assert BUILTIN_STYLES["client-server"]().name == "client-server"
