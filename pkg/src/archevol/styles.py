"""Architectural styles as checkable data.

A style bundles a type-graph extension (new component subtypes), extra graph
constraints and node-count requirements.  The built-in exemplar is the
Client-Server style: exactly one server, at least one client, every client
connected to the server, and no stray top-level plain components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cosa import base_type_graph, encode
from .graphs import (
    ConformanceReport, ConstraintClause, GEdge, GNode, Graph, GraphConstraint,
    GraphError, NodeType, TypeGraph, Var, check_constraint, check_typing,
    conditional, materialize_derived,
)
from .model import Architecture, ModelError, canonical_json

FORMAT_STYLE = "archevol/style@1"


@dataclass(frozen=True)
class Style:
    name: str
    type_extension: tuple[NodeType, ...] = ()
    constraints: tuple[GraphConstraint, ...] = ()
    counts: tuple[tuple[str, int, Optional[int]], ...] = ()  # (type, min, max)

    def type_graph(self, base: Optional[TypeGraph] = None) -> TypeGraph:
        base = base or base_type_graph()
        for nt in self.type_extension:
            if nt.supertype is None or (nt.supertype not in base.node_types
                                        and nt.supertype not in
                                        {t.name for t in self.type_extension}):
                raise GraphError(
                    f"style type {nt.name} must subtype an existing node type")
        return base.extended(self.type_extension,
                             count_overrides={t: (lo, hi) for t, lo, hi in self.counts})


def client_server_style() -> Style:
    """One server, at least one client, every client connected to the server,
    and every plain component housed in some configuration."""
    # CS-1: a client must reach the server through a connector
    cl = Graph().with_node("cl", "Client")
    cl_conn = (cl.with_node("s", "Server")
               .with_edge("x", "connectsTo", "cl", "s"))
    cs1 = conditional("client-connected-to-server", (cl, cl_conn))

    # CS-2: only clients and servers at top level
    plain = Graph().with_node("c", "Component", strict=True)
    contained = (plain.with_node("g", "Configuration")
                 .with_edge("x", "contains", "g", "c"))
    cs2 = conditional("component-contained", (plain, contained))

    return Style(
        name="client-server",
        type_extension=(NodeType("Client", supertype="Component"),
                        NodeType("Server", supertype="Component")),
        constraints=(cs1, cs2),
        counts=(("Server", 1, 1), ("Client", 1, None)),
    )


BUILTIN_STYLES = {"client-server": client_server_style}


def check_style(a: Architecture, s: Style) -> ConformanceReport:
    """Typing against the extended type graph (including node counts), the
    base invariants, and the style constraints, all aggregated."""
    from .cosa import base_invariants

    tg = s.type_graph()
    g = encode(a)
    report = check_typing(g, tg)
    mat = materialize_derived(g, tg)
    for c in base_invariants():
        report = report + check_constraint(mat, c, tg)
    for c in s.constraints:
        report = report + check_constraint(mat, c, tg)
    return report


# ---------------------------------------------------------------------------
# Style file format


def _attr_to_json(v):
    return {"var": v.name} if isinstance(v, Var) else v


def _attr_from_json(v):
    if isinstance(v, dict) and set(v) == {"var"}:
        return Var(v["var"])
    return v


def graph_to_dict(g: Graph) -> dict:
    return {
        "nodes": [
            {"id": n.id, "type": n.type,
             "attrs": {k: _attr_to_json(v) for k, v in n.attrs},
             **({"strict": True} if n.strict else {})}
            for n in sorted(g.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"id": e.id, "type": e.type, "src": e.src, "tgt": e.tgt,
             "attrs": {k: _attr_to_json(v) for k, v in e.attrs}}
            for e in sorted(g.edges.values(), key=lambda e: e.id)
        ],
    }


def graph_from_dict(d: dict) -> Graph:
    return Graph(
        [GNode(n["id"], n["type"],
               tuple(sorted((k, _attr_from_json(v)) for k, v in n.get("attrs", {}).items())),
               bool(n.get("strict", False)))
         for n in d.get("nodes", [])],
        [GEdge(e["id"], e["type"], e["src"], e["tgt"],
               tuple(sorted((k, _attr_from_json(v)) for k, v in e.get("attrs", {}).items())))
         for e in d.get("edges", [])],
    )


def style_to_dict(s: Style) -> dict:
    return {
        "format": FORMAT_STYLE,
        "name": s.name,
        "nodeTypes": [
            {"name": nt.name, "supertype": nt.supertype}
            for nt in s.type_extension
        ],
        "counts": [
            {"type": t, "min": lo, "max": hi} for t, lo, hi in s.counts
        ],
        "constraints": [
            {"name": c.name,
             "clauses": [
                 {"kind": cl.kind, "premise": graph_to_dict(cl.premise),
                  **({"conclusion": graph_to_dict(cl.conclusion)}
                     if cl.conclusion is not None else {})}
                 for cl in c.clauses
             ]}
            for c in s.constraints
        ],
    }


def style_from_dict(d: dict) -> Style:
    if d.get("format") != FORMAT_STYLE:
        raise ModelError(f"unsupported style format {d.get('format')!r}")
    return Style(
        name=d["name"],
        type_extension=tuple(NodeType(nt["name"], supertype=nt.get("supertype"))
                             for nt in d.get("nodeTypes", [])),
        counts=tuple((c["type"], c["min"], c.get("max"))
                     for c in d.get("counts", [])),
        constraints=tuple(
            GraphConstraint(c["name"], tuple(
                ConstraintClause(cl["kind"], graph_from_dict(cl["premise"]),
                                 graph_from_dict(cl["conclusion"])
                                 if "conclusion" in cl else None)
                for cl in c["clauses"]))
            for c in d.get("constraints", [])),
    )


def save_style(s: Style, path: str | Path) -> None:
    Path(path).write_text(canonical_json(style_to_dict(s)))


def load_style(path: str | Path) -> Style:
    return style_from_dict(json.loads(Path(path).read_text()))
