"""Bridge between the architecture domain model and typed graphs.

Provides the base type graph (components, ports, connectors, roles,
configurations, plus the derived `connectsTo`/`connector` edges), the
encode/decode pair, the four built-in graph invariants and the dependency
reachability oracle used to check that restructurings preserve dependencies.
"""

from __future__ import annotations

from typing import Optional

from .graphs import (
    ConformanceReport, EdgeType, GEdge, GNode, Graph, GraphConstraint, NodeType,
    PathStep, TypeGraph, check_constraint, check_typing, conditional, forbidden,
    materialize_derived,
)
from .model import Architecture, Component, Connector, ModelError, Port, Role, split_port_ref

NAME_ATTR = "n"

_CONNECTS_TO_PATH = (
    PathStep("hasPort", False, "Port"),
    PathStep("attachment", False, "Role"),
    PathStep("hasRole", True, "Connector"),
    PathStep("hasRole", False, "Role"),
    PathStep("attachment", True, "Port"),
    PathStep("hasPort", True, "Component"),
)

_CONNECTOR_PATH = (
    PathStep("hasPort", False, "Port"),
    PathStep("attachment", False, "Role"),
    PathStep("hasRole", True, "Connector"),
)


def base_type_graph() -> TypeGraph:
    """The ADL metamodel as a type graph.  Client and Server are present as
    component subtypes with unconstrained counts; the Client-Server style
    tightens their bounds."""
    name = ((NAME_ATTR, "string"),)
    return TypeGraph(
        node_types=[
            NodeType("Component", attributes=name),
            NodeType("Client", supertype="Component"),
            NodeType("Server", supertype="Component"),
            NodeType("Configuration", attributes=name),
            NodeType("Connector", attributes=name),
            NodeType("Port", abstract=True, attributes=name),
            NodeType("ProvPort", supertype="Port"),
            NodeType("ReqPort", supertype="Port"),
            NodeType("Role", abstract=True, attributes=name),
            NodeType("ProvRole", supertype="Role"),
            NodeType("ReqRole", supertype="Role"),
        ],
        edge_types=[
            EdgeType("hasPort", "Component", "Port", target_min=1, target_max=1),
            EdgeType("hasRole", "Connector", "Role", target_min=1, target_max=1),
            EdgeType("hasConfiguration", "Component", "Configuration",
                     source_max=1, target_min=1, target_max=1),
            EdgeType("contains", "Configuration", "Component", target_max=1),
            EdgeType("attachment", "Port", "Role", target_max=1),
            EdgeType("binding", "Port", "Port", source_max=1, target_max=1),
            EdgeType("uses", "Port", "Port"),
            EdgeType("connectsTo", "Component", "Component",
                     derived=True, derivation_path=_CONNECTS_TO_PATH),
            EdgeType("connector", "Component", "Connector",
                     derived=True, derivation_path=_CONNECTOR_PATH),
        ],
    )


_KIND_TO_TYPE = {"plain": "Component", "client": "Client", "server": "Server"}
_TYPE_TO_KIND = {v: k for k, v in _KIND_TO_TYPE.items()}

_PORT_TYPE = {"provided": "ProvPort", "required": "ReqPort"}
_ROLE_TYPE = {"provided": "ProvRole", "required": "ReqRole"}
_PORT_DIR = {v: k for k, v in _PORT_TYPE.items()}
_ROLE_DIR = {v: k for k, v in _ROLE_TYPE.items()}


def comp_node_id(path: str) -> str:
    return f"C:{path}"


def port_node_id(ref: str) -> str:
    return f"P:{ref}"


def encode(a: Architecture) -> Graph:
    """One node per component, configuration, port, connector and role; names
    stored in attribute `n`.  Node ids are derived from reference paths, so
    encoding is deterministic."""
    probs = a.problems()
    if probs:
        raise ModelError("cannot encode invalid architecture: " + "; ".join(probs))

    nodes: list[GNode] = []
    edges: list[GEdge] = []

    def edge(etype: str, src: str, tgt: str):
        edges.append(GEdge(f"e:{etype}:{src}:{tgt}", etype, src, tgt))

    for path, comp, parent in a.walk():
        cid = comp_node_id(path)
        nodes.append(GNode(cid, _KIND_TO_TYPE[comp.kind], ((NAME_ATTR, comp.name),)))
        if comp.children is not None:
            gid = f"G:{path}"
            nodes.append(GNode(gid, "Configuration", ((NAME_ATTR, comp.name),)))
            edge("hasConfiguration", cid, gid)
        if parent is not None:
            edge("contains", f"G:{parent}", cid)
        for p in comp.ports:
            pid = port_node_id(f"{path}#{p.name}")
            nodes.append(GNode(pid, _PORT_TYPE[p.direction], ((NAME_ATTR, p.name),)))
            edge("hasPort", cid, pid)

    for k in a.connectors:
        kid = f"K:{k.name}"
        nodes.append(GNode(kid, "Connector", ((NAME_ATTR, k.name),)))
        for r in k.roles:
            rid = f"R:{k.name}.{r.name}"
            nodes.append(GNode(rid, _ROLE_TYPE[r.direction], ((NAME_ATTR, r.name),)))
            edge("hasRole", kid, rid)

    for pref, rref in a.attachments:
        edge("attachment", port_node_id(pref), f"R:{rref}")
    for outer, inner in a.bindings:
        edge("binding", port_node_id(outer), port_node_id(inner))
    for frm, to in a.uses:
        edge("uses", port_node_id(frm), port_node_id(to))

    return Graph(nodes, edges)


class DecodeError(ModelError):
    def __init__(self, message: str, report: Optional[ConformanceReport] = None):
        super().__init__(message)
        self.report = report


def decode(g: Graph, name: str = "architecture") -> Architecture:
    """Inverse of encode, up to node id renaming.  The graph must conform to
    the base type graph and the built-in invariants."""
    tg = base_type_graph()
    report = check_typing(g, tg)
    if report.ok:
        mat = materialize_derived(g, tg)
        for c in base_invariants():
            report = report + check_constraint(mat, c, tg)
    if not report.ok:
        raise DecodeError("graph does not conform to the architecture metamodel", report)

    def nm(node_id: str) -> str:
        return str(g.nodes[node_id].attr(NAME_ATTR))

    owner = {}      # port node -> component node
    for e in g.edges.values():
        if e.type == "hasPort":
            owner[e.tgt] = e.src
    config_of = {e.src: e.tgt for e in g.edges.values() if e.type == "hasConfiguration"}
    parent_cfg = {e.tgt: e.src for e in g.edges.values() if e.type == "contains"}
    cfg_owner = {v: k for k, v in config_of.items()}

    comp_nodes = [n for n in g.nodes.values() if n.type in _TYPE_TO_KIND]

    def build(node: GNode) -> Component:
        ports = [Port(nm(pid), _PORT_DIR[g.nodes[pid].type])
                 for pid in sorted(owner) if owner[pid] == node.id]
        ports.sort(key=lambda p: p.name)
        children = None
        if node.id in config_of:
            kids = [g.nodes[e.tgt] for e in g.out_edges(config_of[node.id], "contains")]
            children = [build(k) for k in sorted(kids, key=lambda k: k.id)]
            children.sort(key=lambda c: c.name)
        return Component(nm(node.id), _TYPE_TO_KIND[node.type], ports, children)

    top = [n for n in comp_nodes if n.id not in parent_cfg]
    components = sorted((build(n) for n in sorted(top, key=lambda n: n.id)),
                        key=lambda c: c.name)

    path_of_comp: dict[str, str] = {}

    def index(a: Architecture):
        # recover node-id -> path mapping by walking both structures in sync
        def rec(comp_node: GNode, path: str):
            path_of_comp[comp_node.id] = path
            if comp_node.id in config_of:
                for e in g.out_edges(config_of[comp_node.id], "contains"):
                    child = g.nodes[e.tgt]
                    rec(child, f"{path}/{nm(child.id)}")
        for n in top:
            rec(n, nm(n.id))

    index(None)

    def port_ref(pid: str) -> str:
        return f"{path_of_comp[owner[pid]]}#{nm(pid)}"

    role_conn = {e.tgt: e.src for e in g.edges.values() if e.type == "hasRole"}
    connectors = []
    for n in sorted((n for n in g.nodes.values() if n.type == "Connector"), key=lambda n: n.id):
        roles = [Role(nm(rid), _ROLE_DIR[g.nodes[rid].type])
                 for rid in sorted(role_conn) if role_conn[rid] == n.id]
        roles.sort(key=lambda r: r.name)
        connectors.append(Connector(nm(n.id), roles))
    connectors.sort(key=lambda k: k.name)

    attachments = sorted(
        (port_ref(e.src), f"{nm(role_conn[e.tgt])}.{nm(e.tgt)}")
        for e in g.edges.values() if e.type == "attachment")
    bindings = sorted((port_ref(e.src), port_ref(e.tgt))
                      for e in g.edges.values() if e.type == "binding")
    uses = sorted((port_ref(e.src), port_ref(e.tgt))
                  for e in g.edges.values() if e.type == "uses")

    return Architecture(name, components, connectors, attachments, bindings, uses)


# ---------------------------------------------------------------------------
# Built-in graph invariants


def _pat() -> Graph:
    return Graph()


def base_invariants() -> list[GraphConstraint]:
    """The four built-in well-formedness invariants, as constraints over the
    materialized graph (they mention the derived `connectsTo` edge)."""
    # (i) no component connected to, or contained in, itself
    self_conn = (_pat().with_node("a", "Component")
                 .with_edge("x", "connectsTo", "a", "a"))
    self_contain = (_pat().with_node("a", "Component").with_node("g", "Configuration")
                    .with_edge("x", "hasConfiguration", "a", "g")
                    .with_edge("y", "contains", "g", "a"))
    inv1 = forbidden("no-self-link", self_conn, self_contain)

    # (ii) bindings join same-direction ports across exactly one containment level
    mix1 = (_pat().with_node("a", "ProvPort").with_node("b", "ReqPort")
            .with_edge("x", "binding", "a", "b"))
    mix2 = (_pat().with_node("a", "ReqPort").with_node("b", "ProvPort")
            .with_edge("x", "binding", "a", "b"))
    premise = (_pat().with_node("a", "Port").with_node("b", "Port")
               .with_edge("x", "binding", "a", "b"))
    conclusion = (premise
                  .with_node("A", "Component").with_node("B", "Component")
                  .with_node("g", "Configuration")
                  .with_edge("pa", "hasPort", "A", "a")
                  .with_edge("pb", "hasPort", "B", "b")
                  .with_edge("cf", "hasConfiguration", "A", "g")
                  .with_edge("ct", "contains", "g", "B"))
    inv2 = GraphConstraint("binding-shape",
                           forbidden("_", mix1, mix2).clauses
                           + conditional("_", (premise, conclusion)).clauses)

    # (iii) uses only between different ports of the same component
    self_use = _pat().with_node("a", "Port").with_edge("x", "uses", "a", "a")
    u_prem = (_pat().with_node("a", "Port").with_node("b", "Port")
              .with_edge("x", "uses", "a", "b"))
    u_conc = (u_prem.with_node("c", "Component")
              .with_edge("pa", "hasPort", "c", "a")
              .with_edge("pb", "hasPort", "c", "b"))
    inv3 = GraphConstraint("uses-same-component",
                           forbidden("_", self_use).clauses
                           + conditional("_", (u_prem, u_conc)).clauses)

    # (iv) no two components both connected to and contained in one another
    conn_and_contain = (_pat().with_node("a", "Component").with_node("b", "Component")
                        .with_node("g", "Configuration")
                        .with_edge("cf", "hasConfiguration", "b", "g")
                        .with_edge("ct", "contains", "g", "a")
                        .with_edge("x", "connectsTo", "a", "b"))
    inv4 = forbidden("no-connect-and-contain", conn_and_contain)

    return [inv1, inv2, inv3, inv4]


def check_architecture(a: Architecture) -> ConformanceReport:
    """Full base conformance: typing plus the four invariants, over the
    materialized encoding."""
    tg = base_type_graph()
    g = encode(a)
    report = check_typing(g, tg)
    mat = materialize_derived(g, tg)
    for c in base_invariants():
        report = report + check_constraint(mat, c, tg)
    return report


# ---------------------------------------------------------------------------
# Dependency reachability


def dependency_edges(a: Architecture) -> set[tuple[str, str]]:
    """The elementary port dependency relation: p -> q means p depends on q.

    uses edges contribute as given; a connector makes each attached required
    port depend on each attached provided port; a binding on provided ports
    points outer -> inner, on required ports inner -> outer.
    """
    deps: set[tuple[str, str]] = set(a.uses)
    by_conn: dict[str, list[str]] = {}
    for pref, rref in a.attachments:
        by_conn.setdefault(rref.split(".", 1)[0], []).append(pref)
    for ports in by_conn.values():
        req = [p for p in ports if a.port(p).direction == "required"]
        prov = [p for p in ports if a.port(p).direction == "provided"]
        for r in req:
            for p in prov:
                deps.add((r, p))
    for outer, inner in a.bindings:
        if a.port(outer).direction == "provided":
            deps.add((outer, inner))
        else:
            deps.add((inner, outer))
    return deps


def reachable_pairs(a: Architecture) -> set[tuple[str, str]]:
    """Transitive closure of the dependency relation, all port pairs."""
    deps = dependency_edges(a)
    adj: dict[str, set[str]] = {}
    for f, t in deps:
        adj.setdefault(f, set()).add(t)
    out: set[tuple[str, str]] = set()
    for start in adj:
        seen: set[str] = set()
        stack = [start]
        while stack:
            v = stack.pop()
            for w in adj.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out.update((start, w) for w in seen if w != start)
    return out


def dependency_reachability(a: Architecture) -> set[tuple[str, str]]:
    """All (provided port, required port) pairs where the provided port
    transitively depends on the required port."""
    return {(p, q) for p, q in reachable_pairs(a)
            if a.port(p).direction == "provided" and a.port(q).direction == "required"}
