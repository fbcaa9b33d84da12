"""Critical pair analysis and rule sequence applicability.

Parallel conflicts (delete-use, produce-forbid) and sequential dependencies
(produce-use, delete-forbid) are found by enumerating jointly-surjective
overlaps of the relevant rule sides, restricted to overlaps that share at
least one critical (deleted / created / forbidden) element.

Overlap witnesses are kept honest by two validity filters:
  * the overlap must respect the type graph's upper multiplicity bounds, and
  * for overlaps built on a rule's result side, created nodes may not carry
    incident edges the rule did not create (the inverse gluing condition),
    otherwise no pre-state exists from which the rule could have produced
    the overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .graphs import (
    GEdge, GNode, Graph, GraphError, TypeGraph, Var, find_embeddings,
    satisfies_max_multiplicities,
)
from .rewriting import (
    ApplicationTrace, Match, Rule, RuleSequence, SequenceError, apply_sequence,
    find_matches, nac_blocked,
)

PARALLEL_KINDS = ("delete-use", "produce-forbid")
SEQUENTIAL_KINDS = ("produce-use", "delete-forbid")

DEFAULT_OVERLAP_CEILING = 14


class OverlapExplosion(GraphError):
    """Rule pair too large for exhaustive overlap enumeration."""


@dataclass(frozen=True)
class CriticalPair:
    kind: str
    witness: Graph


@dataclass(frozen=True)
class CpaMatrix:
    rules: tuple[str, ...]
    cells: Mapping[tuple[str, str], tuple[CriticalPair, ...]]

    def conflict_free(self, a: str, b: str) -> bool:
        return not self.cells[(a, b)]

    def kinds(self, a: str, b: str) -> tuple[str, ...]:
        return tuple(sorted({cp.kind for cp in self.cells[(a, b)]}))

    def to_table(self) -> str:
        """Tab-delimited matrix; empty cells print '-'."""
        lines = ["\t" + "\t".join(self.rules)]
        for a in self.rules:
            row = [a]
            for b in self.rules:
                ks = self.kinds(a, b)
                row.append(",".join(ks) if ks else "-")
            lines.append("\t".join(row))
        return "\n".join(lines) + "\n"

    def to_adjacency(self) -> str:
        """Arc listing: solid arcs are parallel conflicts, dotted arcs are
        sequential dependencies."""
        solid, dotted = [], []
        for (a, b), cell in sorted(self.cells.items()):
            ks = {cp.kind for cp in cell}
            if ks & set(PARALLEL_KINDS):
                solid.append(f"solid {a} -- {b}")
            if ks & set(SEQUENTIAL_KINDS):
                dotted.append(f"dotted {a} -> {b}")
        return "\n".join(solid + dotted) + ("\n" if solid or dotted else "")

    def to_dict(self) -> dict:
        return {
            "rules": list(self.rules),
            "cells": [
                {"first": a, "second": b, "kinds": list(self.kinds(a, b))}
                for (a, b) in sorted(self.cells) if self.cells[(a, b)]
            ],
        }


# ---------------------------------------------------------------------------
# Overlap enumeration


def _merge_type(tg: TypeGraph, na: GNode, nb: GNode) -> Optional[tuple[str, bool]]:
    if tg.is_subtype(na.type, nb.type):
        merged = na.type
    elif tg.is_subtype(nb.type, na.type):
        merged = nb.type
    else:
        return None
    if na.strict and merged != na.type:
        return None
    if nb.strict and merged != nb.type:
        return None
    return merged, na.strict or nb.strict


def _merge_attrs(attrs_a, attrs_b) -> Optional[tuple]:
    merged = dict(attrs_a)
    for k, v in attrs_b:
        if k not in merged:
            merged[k] = v
            continue
        cur = merged[k]
        if isinstance(cur, Var) and not isinstance(v, Var):
            merged[k] = v
        elif not isinstance(cur, Var) and not isinstance(v, Var) and cur != v:
            return None
        # Var/Var or const/Var: keep the A-side value
    return tuple(sorted(merged.items(), key=lambda kv: kv[0]))


def _concretize(g: Graph, side_of: Mapping[str, str]) -> Graph:
    """Replace attribute variables with distinct concrete strings so the
    overlap is an ordinary instance graph.  Variables from the two source
    graphs live in separate namespaces unless they were merged."""
    def fix(el_id, attrs):
        prefix = side_of.get(el_id, "a")
        return tuple((k, f"{prefix}_{v.name}" if isinstance(v, Var) else v)
                     for k, v in attrs)

    return Graph(
        [GNode(n.id, n.type, fix(n.id, n.attrs)) for n in g.nodes.values()],
        [GEdge(e.id, e.type, e.src, e.tgt, fix(e.id, e.attrs)) for e in g.edges.values()],
    )


@dataclass(frozen=True)
class Overlap:
    graph: Graph                 # concretized, ready to use as a host
    map_a: Mapping[str, str]     # element id in A -> id in overlap
    map_b: Mapping[str, str]


def enumerate_overlaps(ga: Graph, gb: Graph, tg: TypeGraph,
                       ceiling: int = DEFAULT_OVERLAP_CEILING) -> Iterator[Overlap]:
    """All jointly-surjective gluings of `ga` and `gb` (including the disjoint
    one).  Attribute variables are concretized per originating side; merged
    elements take the A-side variable."""
    if len(ga.nodes) + len(gb.nodes) > ceiling:
        raise OverlapExplosion(
            f"overlap of {len(ga.nodes)}+{len(gb.nodes)} nodes exceeds the "
            f"ceiling of {ceiling}; simplify the rules")

    b_nodes = sorted(gb.nodes)
    a_nodes = sorted(ga.nodes)

    def node_assignments(i: int, assign: dict) -> Iterator[dict]:
        if i == len(b_nodes):
            yield dict(assign)
            return
        bid = b_nodes[i]
        yield from node_assignments(i + 1, assign)  # bid stays separate
        nb = gb.nodes[bid]
        for aid in a_nodes:
            if aid in assign.values():
                continue
            if _merge_type(tg, ga.nodes[aid], nb) is None:
                continue
            if _merge_attrs(ga.nodes[aid].attrs, nb.attrs) is None:
                continue
            assign[bid] = aid
            yield from node_assignments(i + 1, assign)
            del assign[bid]

    for nassign in node_assignments(0, {}):
        # candidate edge identifications compatible with the node assignment
        b_edges = sorted(gb.edges)
        candidates: dict[str, list[str]] = {}
        for beid in b_edges:
            be = gb.edges[beid]
            if be.src in nassign and be.tgt in nassign:
                opts = [aeid for aeid, ae in sorted(ga.edges.items())
                        if ae.type == be.type and ae.src == nassign[be.src]
                        and ae.tgt == nassign[be.tgt]
                        and _merge_attrs(ae.attrs, be.attrs) is not None]
                if opts:
                    candidates[beid] = opts

        def edge_assignments(i: int, assign: dict) -> Iterator[dict]:
            if i == len(b_edges):
                yield dict(assign)
                return
            beid = b_edges[i]
            yield from edge_assignments(i + 1, assign)
            for aeid in candidates.get(beid, ()):
                if aeid in assign.values():
                    continue
                assign[beid] = aeid
                yield from edge_assignments(i + 1, assign)
                del assign[beid]

        for eassign in edge_assignments(0, {}):
            overlap = _build_overlap(ga, gb, tg, nassign, eassign)
            if overlap is not None:
                yield overlap


def _build_overlap(ga: Graph, gb: Graph, tg: TypeGraph,
                   nassign: Mapping[str, str], eassign: Mapping[str, str]) -> Optional[Overlap]:
    map_a = {el: f"A.{el}" for el in list(ga.nodes) + list(ga.edges)}
    map_b: dict[str, str] = {}
    side_of: dict[str, str] = {v: "a" for v in map_a.values()}

    nodes: dict[str, GNode] = {}
    for aid, n in ga.nodes.items():
        nodes[map_a[aid]] = GNode(map_a[aid], n.type, n.attrs)
    for bid, n in gb.nodes.items():
        if bid in nassign:
            oid = map_a[nassign[bid]]
            map_b[bid] = oid
            merged = _merge_type(tg, ga.nodes[nassign[bid]], n)
            attrs = _merge_attrs(ga.nodes[nassign[bid]].attrs, n.attrs)
            if merged is None or attrs is None:
                return None
            nodes[oid] = GNode(oid, merged[0], attrs)
        else:
            oid = f"B.{bid}"
            map_b[bid] = oid
            side_of[oid] = "b"
            nodes[oid] = GNode(oid, n.type, n.attrs)

    edges: dict[str, GEdge] = {}
    for aid, e in ga.edges.items():
        edges[map_a[aid]] = GEdge(map_a[aid], e.type, map_a[e.src], map_a[e.tgt], e.attrs)
    for bid, e in gb.edges.items():
        if bid in eassign:
            oid = map_a[eassign[bid]]
            map_b[bid] = oid
            attrs = _merge_attrs(ga.edges[eassign[bid]].attrs, e.attrs)
            if attrs is None:
                return None
            edges[oid] = GEdge(oid, e.type, edges[oid].src, edges[oid].tgt, attrs)
        else:
            oid = f"B.{bid}"
            map_b[bid] = oid
            side_of[oid] = "b"
            edges[oid] = GEdge(oid, e.type, map_b[e.src], map_b[e.tgt], e.attrs)

    raw = Graph(nodes.values(), edges.values())
    return Overlap(_concretize(raw, side_of), map_a, map_b)


# ---------------------------------------------------------------------------
# Helper checks on an overlap host


def _match_in(rule_graph: Graph, host: Graph, tg: TypeGraph,
              partial: Mapping[str, str]) -> Optional[tuple[dict, dict]]:
    """The unique embedding of a fully-placed pattern, with its attribute
    bindings, or None if the placement is not a valid embedding."""
    for mapping, binds in find_embeddings(rule_graph, host, tg, partial=partial):
        if all(mapping.get(k) == v for k, v in partial.items()):
            return mapping, binds
    return None


def _inverse_gluing_ok(r1: Rule, overlap: Overlap) -> bool:
    """Created nodes of r1 in the overlap may only touch edges r1 created;
    otherwise no host exists from which applying r1 yields this overlap."""
    created_node_imgs = {overlap.map_a[n] for n in r1.created_nodes()}
    created_edge_imgs = {overlap.map_a[e] for e in r1.created_edges()}
    for e in overlap.graph.edges.values():
        if (e.src in created_node_imgs or e.tgt in created_node_imgs) \
                and e.id not in created_edge_imgs:
            return False
    return True


def _pre_state(r1: Rule, overlap: Overlap) -> tuple[Graph, dict]:
    """Undo r1 inside an overlap built on its RHS: drop created elements and
    re-instantiate deleted ones, returning the pre-graph and the full match
    of r1's LHS into it."""
    g = overlap.graph.without(
        {overlap.map_a[x] for x in r1.created_nodes() | r1.created_edges()})
    m1 = {el: overlap.map_a[el] for el in r1.preserved_nodes() | r1.preserved_edges()}
    for nid in sorted(r1.deleted_nodes()):
        n = r1.lhs.nodes[nid]
        attrs = tuple((k, f"del_{v.name}" if isinstance(v, Var) else v) for k, v in n.attrs)
        g = Graph(list(g.nodes.values()) + [GNode(f"del.{nid}", n.type, attrs)],
                  g.edges.values())
        m1[nid] = f"del.{nid}"
    for eid in sorted(r1.deleted_edges()):
        e = r1.lhs.edges[eid]
        attrs = tuple((k, f"del_{v.name}" if isinstance(v, Var) else v) for k, v in e.attrs)
        g = g.with_edge(f"del.{eid}", e.type, m1[e.src], m1[e.tgt], attrs)
        m1[eid] = f"del.{eid}"
    return g, m1


def _applicable_at(rule: Rule, host: Graph, partial: Mapping[str, str]) -> bool:
    got = _match_in(rule.lhs, host, rule.tg, partial)
    if got is None:
        return False
    mapping, binds = got
    return not nac_blocked(rule, host, mapping, binds)


# ---------------------------------------------------------------------------
# The four analyses


def _delete_use(r1: Rule, r2: Rule, ceiling: int) -> list[CriticalPair]:
    out, seen = [], set()
    deleted = r1.deleted_nodes() | r1.deleted_edges()
    if not deleted:
        return out
    for ov in enumerate_overlaps(r1.lhs, r2.lhs, r1.tg, ceiling):
        shared_deleted = {ov.map_a[d] for d in deleted} & set(ov.map_b.values())
        if not shared_deleted:
            continue
        host = ov.graph
        if not satisfies_max_multiplicities(host, r1.tg):
            continue
        if not _applicable_at(r1, host, {k: ov.map_a[k] for k in ov.map_a}):
            continue
        if not _applicable_at(r2, host, {k: ov.map_b[k] for k in ov.map_b}):
            continue
        # deleting must not dangle in the witness itself
        del_node_imgs = {ov.map_a[n] for n in r1.deleted_nodes()}
        del_edge_imgs = {ov.map_a[e] for e in r1.deleted_edges()}
        if any((e.src in del_node_imgs or e.tgt in del_node_imgs)
               and e.id not in del_edge_imgs for e in host.edges.values()):
            continue
        key = host.digest()
        if key not in seen:
            seen.add(key)
            out.append(CriticalPair("delete-use", host))
    return out


def _produce_forbid(r1: Rule, r2: Rule, ceiling: int) -> list[CriticalPair]:
    out, seen = [], set()
    created = r1.created_nodes() | r1.created_edges()
    if not created:
        return out
    for nac in r2.nacs:
        nac_only = (set(nac.nodes) | set(nac.edges)) \
            - set(r2.lhs.nodes) - set(r2.lhs.edges)
        for ov in enumerate_overlaps(r1.rhs, nac, r1.tg, ceiling):
            created_imgs = {ov.map_a[c] for c in created}
            if not created_imgs & {ov.map_b[x] for x in nac_only}:
                continue
            lhs2_imgs = {ov.map_b[x] for x in set(r2.lhs.nodes) | set(r2.lhs.edges)}
            if lhs2_imgs & created_imgs:
                continue  # r2's match must predate r1's application
            if not satisfies_max_multiplicities(ov.graph, r1.tg):
                continue
            if not _inverse_gluing_ok(r1, ov):
                continue
            pre, m1 = _pre_state(r1, ov)
            if not _applicable_at(r1, pre, m1):
                continue
            m2 = {x: ov.map_b[x] for x in set(r2.lhs.nodes) | set(r2.lhs.edges)}
            if not _applicable_at(r2, pre, m2):
                continue
            key = pre.digest()
            if key not in seen:
                seen.add(key)
                out.append(CriticalPair("produce-forbid", pre))
    return out


def _produce_use(r1: Rule, r2: Rule, ceiling: int) -> list[CriticalPair]:
    out, seen = [], set()
    created = r1.created_nodes() | r1.created_edges()
    if not created or (not r2.lhs.nodes and not r2.lhs.edges):
        return out
    for ov in enumerate_overlaps(r1.rhs, r2.lhs, r1.tg, ceiling):
        created_imgs = {ov.map_a[c] for c in created}
        if not created_imgs & set(ov.map_b.values()):
            continue
        if not satisfies_max_multiplicities(ov.graph, r1.tg):
            continue
        if not _inverse_gluing_ok(r1, ov):
            continue
        m2 = {k: v for k, v in ov.map_b.items()}
        if not _applicable_at(r2, ov.graph, m2):
            continue
        pre, m1 = _pre_state(r1, ov)
        if not _applicable_at(r1, pre, m1):
            continue
        key = ov.graph.digest()
        if key not in seen:
            seen.add(key)
            out.append(CriticalPair("produce-use", ov.graph))
    return out


def _delete_forbid(r1: Rule, r2: Rule, ceiling: int) -> list[CriticalPair]:
    out, seen = [], set()
    deleted = r1.deleted_nodes() | r1.deleted_edges()
    if not deleted:
        return out
    for nac in r2.nacs:
        nac_only = (set(nac.nodes) | set(nac.edges)) \
            - set(r2.lhs.nodes) - set(r2.lhs.edges)
        for ov in enumerate_overlaps(r1.lhs, nac, r1.tg, ceiling):
            deleted_imgs = {ov.map_a[d] for d in deleted}
            if not deleted_imgs & {ov.map_b[x] for x in nac_only}:
                continue
            lhs2_imgs = {ov.map_b[x] for x in set(r2.lhs.nodes) | set(r2.lhs.edges)}
            if lhs2_imgs & deleted_imgs:
                continue  # r2's match must survive r1
            host = ov.graph
            if not satisfies_max_multiplicities(host, r1.tg):
                continue
            if not _applicable_at(r1, host, dict(ov.map_a)):
                continue
            del_node_imgs = {ov.map_a[n] for n in r1.deleted_nodes()}
            del_edge_imgs = {ov.map_a[e] for e in r1.deleted_edges()}
            if any((e.src in del_node_imgs or e.tgt in del_node_imgs)
                   and e.id not in del_edge_imgs for e in host.edges.values()):
                continue
            key = host.digest()
            if key not in seen:
                seen.add(key)
                out.append(CriticalPair("delete-forbid", host))
    return out


def critical_pairs(r1: Rule, r2: Rule,
                   ceiling: int = DEFAULT_OVERLAP_CEILING) -> list[CriticalPair]:
    """Parallel conflicts: r1 can disable an independently chosen application
    of r2.  Empty result means the pair is parallel independent."""
    return _delete_use(r1, r2, ceiling) + _produce_forbid(r1, r2, ceiling)


def sequential_dependencies(r1: Rule, r2: Rule,
                            ceiling: int = DEFAULT_OVERLAP_CEILING) -> list[CriticalPair]:
    """r2 applications that only become possible after r1."""
    return _produce_use(r1, r2, ceiling) + _delete_forbid(r1, r2, ceiling)


def cpa_matrix(rules: Sequence[Rule],
               ceiling: int = DEFAULT_OVERLAP_CEILING) -> CpaMatrix:
    if not rules:
        raise GraphError("cpa_matrix needs at least one rule")
    names = tuple(r.name for r in rules)
    cells: dict[tuple[str, str], tuple[CriticalPair, ...]] = {}
    for a in rules:
        for b in rules:
            cells[(a.name, b.name)] = tuple(
                critical_pairs(a, b, ceiling) + sequential_dependencies(a, b, ceiling))
    return CpaMatrix(names, cells)


# ---------------------------------------------------------------------------
# Rule sequence applicability


@dataclass(frozen=True)
class SequenceFinding:
    position: int
    kind: str                    # no-enabler | consumed-before-use
    detail: str


@dataclass(frozen=True)
class SequenceReport:
    sequence: RuleSequence
    static_findings: tuple[SequenceFinding, ...]
    dynamic: Optional[tuple[bool, Optional[int], ApplicationTrace]] = None

    @property
    def applicable(self) -> Optional[bool]:
        return self.dynamic[0] if self.dynamic else None

    def to_dict(self) -> dict:
        d = {
            "sequence": [(r.name, rep) for r, rep in self.sequence.items],
            "staticFindings": [
                {"position": f.position, "kind": f.kind, "detail": f.detail}
                for f in self.static_findings
            ],
        }
        if self.dynamic:
            ok, pos, trace = self.dynamic
            d["dynamicResult"] = {
                "applicable": ok,
                "failingPosition": pos,
                "trace": [{"rule": s.rule, "match": list(map(list, s.match))}
                          for s in trace.steps],
            }
        return d


def _static_check(s: RuleSequence, assumed_types: set[str]) -> list[SequenceFinding]:
    findings: list[SequenceFinding] = []
    tg = s.items[0][0].tg

    def produces(rule: Rule, want: str, strict: bool) -> bool:
        for nid in rule.created_nodes():
            t = rule.rhs.nodes[nid].type
            if (t == want) if strict else tg.is_subtype(t, want):
                return True
        return False

    def deletes(rule: Rule, want: str, strict: bool) -> bool:
        for nid in rule.deleted_nodes():
            t = rule.lhs.nodes[nid].type
            if (t == want) if strict else tg.is_subtype(t, want):
                return True
        return False

    for i, (rule, rep) in enumerate(s.items):
        if rep != "once":
            continue  # star items may legally run zero times
        missing, consumed = [], []
        for nid in sorted(rule.lhs.nodes):
            n = rule.lhs.nodes[nid]
            if n.type in assumed_types:
                continue
            producer = None
            for j in range(i - 1, -1, -1):
                if produces(s.items[j][0], n.type, n.strict):
                    producer = j
                    break
            if producer is None:
                missing.append(n.type)
            elif any(deletes(s.items[k][0], n.type, n.strict)
                     for k in range(producer + 1, i)):
                consumed.append(n.type)
        if missing:
            findings.append(SequenceFinding(
                i, "no-enabler",
                f"rule {rule.name}: no earlier rule supplies {', '.join(sorted(set(missing)))}"))
        if consumed:
            findings.append(SequenceFinding(
                i, "consumed-before-use",
                f"rule {rule.name}: {', '.join(sorted(set(consumed)))} deleted before use"))
    return findings


def analyze_sequence(s: RuleSequence, host: Optional[Graph] = None,
                     bindings: Optional[Mapping[str, object]] = None,
                     assumed_types: Optional[set[str]] = None,
                     max_rewrites: Optional[int] = None) -> SequenceReport:
    """Conservative static applicability check plus, when a host is supplied,
    an authoritative dynamic run with the default chooser."""
    findings = tuple(_static_check(s, assumed_types or set()))
    dynamic = None
    if host is not None:
        g = host
        trace = ApplicationTrace()
        failing: Optional[int] = None
        for i, item in enumerate(s.items):
            try:
                g, t = apply_sequence(RuleSequence.of(item), g,
                                      bindings=bindings, max_rewrites=max_rewrites)
            except SequenceError:
                failing = i
                break
            trace = ApplicationTrace(trace.steps + t.steps)
        dynamic = (failing is None, failing, trace)
    return SequenceReport(s, findings, dynamic)
