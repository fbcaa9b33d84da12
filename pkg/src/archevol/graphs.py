"""Typed attributed graphs: metamodel, instance graphs, constraints and conformance.

The substrate everything else is built on.  Node types support single
inheritance and instance-count bounds; edge types carry per-endpoint
multiplicities and may be *derived* (defined by a path expression over other
edge types, recomputed on demand and never persisted).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Optional, Sequence

UNBOUNDED = None  # upper multiplicity bound "many"

ATTRIBUTE_KINDS = ("string", "integer")


class GraphError(Exception):
    """Malformed graph, type graph or constraint."""


class TypingError(GraphError):
    """A graph references node or edge types unknown to its type graph."""


@dataclass(frozen=True)
class Var:
    """Attribute variable, used in pattern graphs and rule parameters."""

    name: str


@dataclass(frozen=True)
class NodeType:
    name: str
    abstract: bool = False
    supertype: Optional[str] = None
    attributes: tuple[tuple[str, str], ...] = ()
    count_min: int = 0
    count_max: Optional[int] = UNBOUNDED

    def __post_init__(self):
        for _, kind in self.attributes:
            if kind not in ATTRIBUTE_KINDS:
                raise GraphError(f"unknown attribute kind {kind!r} on {self.name}")
        if self.count_min < 0:
            raise GraphError(f"negative count_min on {self.name}")
        if self.count_max is not UNBOUNDED and self.count_max < max(self.count_min, 1):
            raise GraphError(f"count bounds violated on {self.name}")


@dataclass(frozen=True)
class PathStep:
    """One hop of a derivation path: traverse `edge_type` (reversed if
    `reverse`) and land on a node of `node_type`."""

    edge_type: str
    reverse: bool
    node_type: str


@dataclass(frozen=True)
class EdgeType:
    name: str
    source: str
    target: str
    source_min: int = 0
    source_max: Optional[int] = UNBOUNDED  # edges allowed per source node
    target_min: int = 0
    target_max: Optional[int] = UNBOUNDED  # edges allowed per target node
    derived: bool = False
    derivation_path: tuple[PathStep, ...] = ()

    def __post_init__(self):
        if self.derived and not self.derivation_path:
            raise GraphError(f"derived edge type {self.name} needs a derivation path")
        if not self.derived and self.derivation_path:
            raise GraphError(f"non-derived edge type {self.name} carries a path")
        for lo, hi in ((self.source_min, self.source_max), (self.target_min, self.target_max)):
            if hi is not UNBOUNDED and lo > hi:
                raise GraphError(f"multiplicity bounds violated on {self.name}")


class TypeGraph:
    def __init__(self, node_types: Iterable[NodeType], edge_types: Iterable[EdgeType]):
        self.node_types: dict[str, NodeType] = {}
        self.edge_types: dict[str, EdgeType] = {}
        for nt in node_types:
            if nt.name in self.node_types:
                raise GraphError(f"duplicate node type {nt.name}")
            self.node_types[nt.name] = nt
        for et in edge_types:
            if et.name in self.edge_types:
                raise GraphError(f"duplicate edge type {et.name}")
            if et.source not in self.node_types or et.target not in self.node_types:
                raise GraphError(f"edge type {et.name} references unknown node types")
            self.edge_types[et.name] = et
        # reject supertype cycles and dangling supertypes up front
        for nt in self.node_types.values():
            seen = set()
            cur: Optional[str] = nt.name
            while cur is not None:
                if cur in seen:
                    raise GraphError(f"supertype cycle through {nt.name}")
                seen.add(cur)
                if cur not in self.node_types:
                    raise GraphError(f"unknown supertype {cur}")
                cur = self.node_types[cur].supertype

    def supertypes(self, name: str) -> Iterator[str]:
        """The type itself followed by its transitive supertypes."""
        cur: Optional[str] = name
        while cur is not None:
            yield cur
            cur = self.node_types[cur].supertype

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes(sub)

    def extended(self, node_types: Iterable[NodeType], edge_types: Iterable[EdgeType] = (),
                 count_overrides: Mapping[str, tuple[int, Optional[int]]] = ()) -> "TypeGraph":
        """A new type graph with extra types and/or tightened node counts."""
        merged = dict(self.node_types)
        for nt in node_types:
            merged[nt.name] = nt
        overrides = dict(count_overrides or {})
        out = []
        for name, nt in merged.items():
            if name in overrides:
                lo, hi = overrides[name]
                nt = replace(nt, count_min=lo, count_max=hi)
            out.append(nt)
        return TypeGraph(out, list(self.edge_types.values()) + list(edge_types))


@dataclass(frozen=True)
class GNode:
    id: str
    type: str
    attrs: tuple[tuple[str, object], ...] = ()
    strict: bool = False  # pattern nodes only: match the exact type, no subtypes

    def attr(self, name: str):
        for k, v in self.attrs:
            if k == name:
                return v
        return None

    def attr_map(self) -> dict[str, object]:
        return dict(self.attrs)


@dataclass(frozen=True)
class GEdge:
    id: str
    type: str
    src: str
    tgt: str
    attrs: tuple[tuple[str, object], ...] = ()


def _attrs(attrs) -> tuple[tuple[str, object], ...]:
    if attrs is None:
        return ()
    if isinstance(attrs, tuple):
        return attrs
    return tuple(sorted(attrs.items()))


class Graph:
    """An immutable directed typed attributed graph.

    Mutator methods return new graphs; instances are safe to share.
    """

    def __init__(self, nodes: Iterable[GNode] = (), edges: Iterable[GEdge] = ()):
        self.nodes: dict[str, GNode] = {}
        self.edges: dict[str, GEdge] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise GraphError(f"duplicate node id {n.id}")
            self.nodes[n.id] = n
        for e in edges:
            if e.id in self.edges or e.id in self.nodes:
                raise GraphError(f"duplicate element id {e.id}")
            if e.src not in self.nodes or e.tgt not in self.nodes:
                raise GraphError(f"edge {e.id} has missing endpoint")
            self.edges[e.id] = e

    # -- construction helpers ------------------------------------------------

    def with_node(self, id: str, type: str, attrs=None, strict: bool = False) -> "Graph":
        return Graph(list(self.nodes.values()) + [GNode(id, type, _attrs(attrs), strict)],
                     self.edges.values())

    def with_edge(self, id: str, type: str, src: str, tgt: str, attrs=None) -> "Graph":
        return Graph(self.nodes.values(),
                     list(self.edges.values()) + [GEdge(id, type, src, tgt, _attrs(attrs))])

    def without(self, ids: Iterable[str]) -> "Graph":
        drop = set(ids)
        return Graph((n for n in self.nodes.values() if n.id not in drop),
                     (e for e in self.edges.values() if e.id not in drop))

    def fresh_node_id(self, used: Optional[set] = None) -> str:
        return self._fresh("n", used)

    def fresh_edge_id(self, used: Optional[set] = None) -> str:
        return self._fresh("e", used)

    def _fresh(self, prefix: str, used: Optional[set]) -> str:
        taken = set(self.nodes) | set(self.edges) | (used or set())
        k = 1
        while f"{prefix}{k}" in taken:
            k += 1
        return f"{prefix}{k}"

    # -- queries -------------------------------------------------------------

    def out_edges(self, node_id: str, etype: Optional[str] = None) -> list[GEdge]:
        return [e for e in self.edges.values()
                if e.src == node_id and (etype is None or e.type == etype)]

    def in_edges(self, node_id: str, etype: Optional[str] = None) -> list[GEdge]:
        return [e for e in self.edges.values()
                if e.tgt == node_id and (etype is None or e.type == etype)]

    def nodes_of(self, tg: TypeGraph, type_name: str) -> list[GNode]:
        return [n for n in self.nodes.values() if tg.is_subtype(n.type, type_name)]

    def digest(self) -> str:
        payload = {
            "nodes": sorted((n.id, n.type, list(map(list, n.attrs))) for n in self.nodes.values()),
            "edges": sorted((e.id, e.type, e.src, e.tgt, list(map(list, e.attrs)))
                            for e in self.edges.values()),
        }
        blob = json.dumps(payload, sort_keys=True,
                          default=lambda v: {"$var": v.name}).encode()
        return hashlib.sha1(blob).hexdigest()

    def __eq__(self, other):
        return (isinstance(other, Graph)
                and self.nodes == other.nodes and self.edges == other.edges)

    def __hash__(self):
        return hash(self.digest())

    def __repr__(self):
        return f"Graph({len(self.nodes)} nodes, {len(self.edges)} edges)"


# ---------------------------------------------------------------------------
# Conformance reports


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    witness: frozenset = frozenset()


@dataclass(frozen=True)
class ConformanceReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __add__(self, other: "ConformanceReport") -> "ConformanceReport":
        return ConformanceReport(self.violations + other.violations)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "message": v.message, "witness": sorted(v.witness)}
                for v in self.violations
            ],
        }


# ---------------------------------------------------------------------------
# Constraints

CONSTRAINT_KINDS = ("forbidden", "conditional")


@dataclass(frozen=True)
class ConstraintClause:
    kind: str
    premise: Graph
    conclusion: Optional[Graph] = None  # conditional only; extends premise (shared ids)

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise GraphError(f"unknown constraint kind {self.kind}")
        if self.kind == "conditional":
            if self.conclusion is None:
                raise GraphError("conditional clause needs a conclusion")
            if not (set(self.premise.nodes) <= set(self.conclusion.nodes)
                    and set(self.premise.edges) <= set(self.conclusion.edges)):
                raise GraphError("premise must be a subgraph of the conclusion")
        elif self.conclusion is not None:
            raise GraphError("forbidden clause cannot carry a conclusion")


@dataclass(frozen=True)
class GraphConstraint:
    """A named well-formedness condition.

    A single premise/conclusion pair covers the common case; a handful of the
    built-in invariants need several alternative patterns (e.g. a direction
    mismatch in either orientation), hence the clause list.
    """

    name: str
    clauses: tuple[ConstraintClause, ...]

    @property
    def kind(self) -> str:
        return self.clauses[0].kind

    @property
    def premise(self) -> Graph:
        return self.clauses[0].premise

    @property
    def conclusion(self) -> Optional[Graph]:
        return self.clauses[0].conclusion


def forbidden(name: str, *patterns: Graph) -> GraphConstraint:
    return GraphConstraint(name, tuple(ConstraintClause("forbidden", p) for p in patterns))


def conditional(name: str, *pairs: tuple[Graph, Graph]) -> GraphConstraint:
    return GraphConstraint(
        name, tuple(ConstraintClause("conditional", p, c) for p, c in pairs))


# ---------------------------------------------------------------------------
# Pattern matching (injective embeddings)


def _node_compatible(tg: TypeGraph, host: GNode, pat: GNode) -> bool:
    if pat.strict:
        return host.type == pat.type
    return tg.is_subtype(host.type, pat.type)


def _attrs_compatible(host_attrs: Mapping[str, object], pat: GNode | GEdge,
                      bindings: dict[str, object]) -> Optional[dict[str, object]]:
    """None if incompatible, else the bindings extended by new variable values."""
    new = dict(bindings)
    for k, v in pat.attrs:
        if k not in host_attrs:
            return None
        hv = host_attrs[k]
        if isinstance(v, Var):
            if v.name in new:
                if new[v.name] != hv:
                    return None
            else:
                new[v.name] = hv
        elif v != hv:
            return None
    return new


def find_embeddings(pattern: Graph, host: Graph, tg: TypeGraph,
                    partial: Optional[Mapping[str, str]] = None,
                    bindings: Optional[Mapping[str, object]] = None) -> list[tuple[dict, dict]]:
    """All injective type- and attribute-respecting embeddings of `pattern`
    into `host`, in canonical order.

    `partial` pre-assigns pattern element ids to host ids (used to extend a
    rule match into a NAC or a premise match into a conclusion).  Returns
    (mapping, bindings) pairs; mapping covers nodes and edges.
    """
    partial = dict(partial or {})
    base_bindings = dict(bindings or {})
    pat_nodes = sorted(pattern.nodes)
    pat_edges = sorted(pattern.edges)
    results: list[tuple[dict, dict]] = []

    host_nodes_sorted = sorted(host.nodes)
    host_edges_sorted = sorted(host.edges)

    def backtrack_edges(i: int, mapping: dict, binds: dict):
        if i == len(pat_edges):
            results.append((dict(mapping), dict(binds)))
            return
        pe = pattern.edges[pat_edges[i]]
        want_src = mapping[pe.src]
        want_tgt = mapping[pe.tgt]
        for heid in host_edges_sorted:
            he = host.edges[heid]
            if he.type != pe.type or he.src != want_src or he.tgt != want_tgt:
                continue
            if heid in mapping.values():
                continue
            nb = _attrs_compatible(dict(he.attrs), pe, binds)
            if nb is None:
                continue
            mapping[pe.id] = heid
            backtrack_edges(i + 1, mapping, nb)
            del mapping[pe.id]

    def backtrack_nodes(i: int, mapping: dict, binds: dict, used: set):
        if i == len(pat_nodes):
            backtrack_edges(0, mapping, binds)
            return
        pid = pat_nodes[i]
        pn = pattern.nodes[pid]
        if pid in mapping:
            backtrack_nodes(i + 1, mapping, binds, used)
            return
        for hid in host_nodes_sorted:
            if hid in used:
                continue
            hn = host.nodes[hid]
            if not _node_compatible(tg, hn, pn):
                continue
            nb = _attrs_compatible(hn.attr_map(), pn, binds)
            if nb is None:
                continue
            mapping[pid] = hid
            used.add(hid)
            backtrack_nodes(i + 1, mapping, nb, used)
            del mapping[pid]
            used.discard(hid)

    # validate and seed the partial assignment
    seed: dict[str, str] = {}
    used0: set[str] = set()
    binds0 = dict(base_bindings)
    ok = True
    for pid, hid in partial.items():
        if pid in pattern.nodes:
            if hid not in host.nodes or hid in used0:
                ok = False
                break
            hn, pn = host.nodes[hid], pattern.nodes[pid]
            if not _node_compatible(tg, hn, pn):
                ok = False
                break
            nb = _attrs_compatible(hn.attr_map(), pn, binds0)
            if nb is None:
                ok = False
                break
            binds0 = nb
            seed[pid] = hid
            used0.add(hid)
        elif pid in pattern.edges:
            seed[pid] = hid
        # ids outside the pattern (e.g. full-rule partials) are ignored
    if ok:
        # seeded edges must still be consistent; easiest to re-check via the
        # edge phase, so only keep node seeds and re-derive edge images there.
        edge_seed = {k: v for k, v in seed.items() if k in pattern.edges}
        node_seed = {k: v for k, v in seed.items() if k in pattern.nodes}
        mapping = dict(node_seed)
        backtrack_nodes(0, mapping, binds0, set(node_seed.values()))
        if edge_seed:
            results[:] = [r for r in results
                          if all(r[0].get(k) == v for k, v in edge_seed.items())]

    def sort_key(item):
        mapping, _ = item
        return (tuple(mapping[p] for p in pat_nodes), tuple(mapping[p] for p in pat_edges))

    results.sort(key=sort_key)
    return results


# ---------------------------------------------------------------------------
# Conformance checking


def _check_type_references(g: Graph, tg: TypeGraph) -> None:
    for n in g.nodes.values():
        if n.type not in tg.node_types:
            raise TypingError(f"unknown node type {n.type} (node {n.id})")
    for e in g.edges.values():
        if e.type not in tg.edge_types:
            raise TypingError(f"unknown edge type {e.type} (edge {e.id})")


def _value_kind_ok(value, kind: str) -> bool:
    if kind == "string":
        return isinstance(value, str)
    return isinstance(value, int) and not isinstance(value, bool)


def declared_attributes(tg: TypeGraph, type_name: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for t in tg.supertypes(type_name):
        for name, kind in tg.node_types[t].attributes:
            out.setdefault(name, kind)
    return out


def check_typing(g: Graph, tg: TypeGraph) -> ConformanceReport:
    """Structural conformance of an instance graph against its type graph.

    Covers: abstract instantiation, attribute completeness, edge endpoint
    typing (respecting inheritance), per-endpoint edge multiplicities and
    node-count bounds.  Unknown type references raise, they are not reported.
    """
    _check_type_references(g, tg)
    out: list[Violation] = []

    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        nt = tg.node_types[n.type]
        if nt.abstract:
            out.append(Violation("abstract-type", f"node {n.id} instantiates abstract type {n.type}",
                                 frozenset([n.id])))
        declared = declared_attributes(tg, n.type)
        have = n.attr_map()
        for name, kind in sorted(declared.items()):
            if name not in have:
                out.append(Violation("missing-attribute",
                                     f"node {n.id} ({n.type}) lacks attribute {name}",
                                     frozenset([n.id])))
            elif not _value_kind_ok(have[name], kind):
                out.append(Violation("attribute-kind",
                                     f"attribute {name} of node {n.id} is not a {kind}",
                                     frozenset([n.id])))
        for name in sorted(have):
            if name not in declared:
                out.append(Violation("undeclared-attribute",
                                     f"node {n.id} carries undeclared attribute {name}",
                                     frozenset([n.id])))

    for e in sorted(g.edges.values(), key=lambda e: e.id):
        et = tg.edge_types[e.type]
        if not tg.is_subtype(g.nodes[e.src].type, et.source):
            out.append(Violation("endpoint-typing",
                                 f"edge {e.id} ({e.type}) has source of type {g.nodes[e.src].type}, "
                                 f"expected {et.source}", frozenset([e.id, e.src])))
        if not tg.is_subtype(g.nodes[e.tgt].type, et.target):
            out.append(Violation("endpoint-typing",
                                 f"edge {e.id} ({e.type}) has target of type {g.nodes[e.tgt].type}, "
                                 f"expected {et.target}", frozenset([e.id, e.tgt])))

    for et in sorted(tg.edge_types.values(), key=lambda t: t.name):
        if et.derived:
            continue
        for n in sorted(g.nodes.values(), key=lambda n: n.id):
            if tg.is_subtype(n.type, et.source):
                k = len([e for e in g.out_edges(n.id, et.name)])
                if k < et.source_min or (et.source_max is not UNBOUNDED and k > et.source_max):
                    out.append(Violation(
                        "edge-multiplicity",
                        f"node {n.id} ({n.type}) has {k} outgoing {et.name} edges, "
                        f"allowed [{et.source_min}, {et.source_max if et.source_max is not None else '*'}]",
                        frozenset([n.id])))
            if tg.is_subtype(n.type, et.target):
                k = len([e for e in g.in_edges(n.id, et.name)])
                if k < et.target_min or (et.target_max is not UNBOUNDED and k > et.target_max):
                    out.append(Violation(
                        "edge-multiplicity",
                        f"node {n.id} ({n.type}) has {k} incoming {et.name} edges, "
                        f"allowed [{et.target_min}, {et.target_max if et.target_max is not None else '*'}]",
                        frozenset([n.id])))

    for nt in sorted(tg.node_types.values(), key=lambda t: t.name):
        if nt.count_min == 0 and nt.count_max is UNBOUNDED:
            continue
        k = len(g.nodes_of(tg, nt.name))
        if k < nt.count_min or (nt.count_max is not UNBOUNDED and k > nt.count_max):
            out.append(Violation(
                "node-count",
                f"{k} instances of {nt.name}, allowed "
                f"[{nt.count_min}, {nt.count_max if nt.count_max is not None else '*'}]",
                frozenset(n.id for n in g.nodes_of(tg, nt.name))))

    return ConformanceReport(tuple(out))


def satisfies_max_multiplicities(g: Graph, tg: TypeGraph) -> bool:
    """Upper-bound-only multiplicity check, usable on partial graphs such as
    rule overlap witnesses where lower bounds legitimately fail."""
    for et in tg.edge_types.values():
        if et.derived:
            continue
        if et.source_max is not UNBOUNDED:
            for n in g.nodes.values():
                if tg.is_subtype(n.type, et.source):
                    if len(g.out_edges(n.id, et.name)) > et.source_max:
                        return False
        if et.target_max is not UNBOUNDED:
            for n in g.nodes.values():
                if tg.is_subtype(n.type, et.target):
                    if len(g.in_edges(n.id, et.name)) > et.target_max:
                        return False
    return True


def check_constraint(g: Graph, c: GraphConstraint, tg: TypeGraph) -> ConformanceReport:
    """Forbidden clause: one violation per injective match of the pattern.
    Conditional clause: one violation per premise match with no extension to
    a conclusion match."""
    out: list[Violation] = []
    for clause in c.clauses:
        if clause.kind == "forbidden":
            for mapping, _ in find_embeddings(clause.premise, g, tg):
                out.append(Violation(
                    c.name, f"forbidden pattern {c.name} present",
                    frozenset(mapping.values())))
        else:
            for mapping, binds in find_embeddings(clause.premise, g, tg):
                ext = find_embeddings(clause.conclusion, g, tg,
                                      partial=mapping, bindings=binds)
                if not ext:
                    out.append(Violation(
                        c.name, f"premise of {c.name} holds with no matching conclusion",
                        frozenset(mapping.values())))
    return ConformanceReport(tuple(out))


# ---------------------------------------------------------------------------
# Derived edges


def _path_targets(g: Graph, start: str, path: Sequence[PathStep],
                  used_edges: frozenset) -> Iterator[str]:
    """All nodes reachable from `start` along `path`, never traversing the
    same edge twice (a round trip over one role must not yield a self link)."""
    if not path:
        yield start
        return
    step = path[0]
    candidates = g.in_edges(start, step.edge_type) if step.reverse \
        else g.out_edges(start, step.edge_type)
    for e in candidates:
        if e.id in used_edges:
            continue
        nxt = e.src if step.reverse else e.tgt
        yield from _path_targets(g, nxt, path[1:], used_edges | {e.id})


def materialize_derived(g: Graph, tg: TypeGraph) -> Graph:
    """Copy of `g` with one derived edge per distinct (src, tgt) pair that is
    connected by the edge type's derivation path."""
    _check_type_references(g, tg)
    for e in g.edges.values():
        if tg.edge_types[e.type].derived:
            raise GraphError(f"graph already contains derived edge {e.id}")
    out = g
    for et in sorted(tg.edge_types.values(), key=lambda t: t.name):
        if not et.derived:
            continue
        pairs = set()
        for n in g.nodes.values():
            if not tg.is_subtype(n.type, et.source):
                continue
            for tgt in _path_targets(g, n.id, et.derivation_path, frozenset()):
                if tg.is_subtype(g.nodes[tgt].type, et.target):
                    pairs.add((n.id, tgt))
        for src, tgt in sorted(pairs):
            out = out.with_edge(f"d:{et.name}:{src}:{tgt}", et.name, src, tgt)
    return out


def strip_derived(g: Graph, tg: TypeGraph) -> Graph:
    return g.without(e.id for e in g.edges.values() if tg.edge_types[e.type].derived)
