"""Graph transformation rules with negative application conditions.

Rules follow the shared-id convention: elements present in both LHS and RHS
are preserved, LHS-only elements are deleted, RHS-only elements are created.
Deletion is guarded by the gluing condition: a rule application that would
leave a dangling edge fails instead of silently cascading.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .graphs import (
    GEdge, GNode, Graph, GraphError, TypeGraph, Var, find_embeddings,
)

DEFAULT_MAX_REWRITES = 10_000
MAX_REWRITES_ENV = "ARCHEVOL_MAX_REWRITES"


class RuleError(GraphError):
    """Malformed rule or invalid application."""


class GluingError(RuleError):
    """Application would leave dangling edges."""

    def __init__(self, dangling: Sequence[str]):
        super().__init__(f"deleting would orphan edges: {', '.join(sorted(dangling))}")
        self.dangling = tuple(sorted(dangling))


class SequenceError(RuleError):
    """A mandatory rule in a sequence found no match, or a star ran away."""


def _rhs_vars(g: Graph) -> set[str]:
    out = set()
    for el in list(g.nodes.values()) + list(g.edges.values()):
        for _, v in el.attrs:
            if isinstance(v, Var):
                out.add(v.name)
    return out


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: Graph
    rhs: Graph
    tg: TypeGraph
    nacs: tuple[Graph, ...] = ()
    params: tuple[tuple[str, str], ...] = ()  # (name, attribute kind)

    def __post_init__(self):
        for nid in self.preserved_nodes():
            if self.lhs.nodes[nid].type != self.rhs.nodes[nid].type:
                raise RuleError(f"preserved node {nid} changes type in rule {self.name}")
        for eid in self.preserved_edges():
            le, re = self.lhs.edges[eid], self.rhs.edges[eid]
            if (le.type, le.src, le.tgt) != (re.type, re.src, re.tgt):
                raise RuleError(f"preserved edge {eid} changes shape in rule {self.name}")
        for nac in self.nacs:
            if not (set(self.lhs.nodes) <= set(nac.nodes)
                    and set(self.lhs.edges) <= set(nac.edges)):
                raise RuleError(f"NAC of rule {self.name} does not extend the LHS")
        bound = _rhs_vars(self.lhs) | {p for p, _ in self.params}
        free = _rhs_vars(self.rhs) - bound
        if free:
            raise RuleError(f"rule {self.name} has unbound RHS variables: {sorted(free)}")

    def preserved_nodes(self) -> set[str]:
        return set(self.lhs.nodes) & set(self.rhs.nodes)

    def preserved_edges(self) -> set[str]:
        return set(self.lhs.edges) & set(self.rhs.edges)

    def deleted_nodes(self) -> set[str]:
        return set(self.lhs.nodes) - set(self.rhs.nodes)

    def deleted_edges(self) -> set[str]:
        return set(self.lhs.edges) - set(self.rhs.edges)

    def created_nodes(self) -> set[str]:
        return set(self.rhs.nodes) - set(self.lhs.nodes)

    def created_edges(self) -> set[str]:
        return set(self.rhs.edges) - set(self.lhs.edges)


@dataclass(frozen=True)
class Match:
    rule: Rule
    host: Graph
    mapping: tuple[tuple[str, str], ...]  # lhs element id -> host element id
    bindings: tuple[tuple[str, object], ...] = ()

    def map(self) -> dict[str, str]:
        return dict(self.mapping)

    def binds(self) -> dict[str, object]:
        return dict(self.bindings)

    def footprint(self) -> tuple:
        return (self.rule.name, self.mapping, self.bindings)


def nac_blocked(rule: Rule, host: Graph, mapping: Mapping[str, str],
                bindings: Mapping[str, object]) -> bool:
    for nac in rule.nacs:
        if find_embeddings(nac, host, rule.tg, partial=mapping, bindings=bindings):
            return True
    return False


def find_matches(rule: Rule, host: Graph,
                 bindings: Optional[Mapping[str, object]] = None) -> list[Match]:
    """All injective NAC-satisfying matches, in canonical order.  An empty
    LHS yields exactly one candidate match."""
    bindings = dict(bindings or {})
    lhs_vars = _rhs_vars(rule.lhs)
    for pname, _ in rule.params:
        if pname not in bindings and pname not in lhs_vars:
            raise RuleError(f"rule {rule.name} requires a binding for parameter {pname!r}")
    out: list[Match] = []
    for mapping, binds in find_embeddings(rule.lhs, host, rule.tg, bindings=bindings):
        if nac_blocked(rule, host, mapping, binds):
            continue
        out.append(Match(rule, host,
                         tuple(sorted(mapping.items())),
                         tuple(sorted(binds.items()))))
    return out


def _resolve_attrs(attrs, bindings: Mapping[str, object]):
    out = []
    for k, v in attrs:
        if isinstance(v, Var):
            if v.name not in bindings:
                raise RuleError(f"unbound attribute variable {v.name}")
            v = bindings[v.name]
        out.append((k, v))
    return tuple(out)


def apply(m: Match, host: Optional[Graph] = None) -> Graph:
    """Apply a match: delete, then create with fresh ids and bound attribute
    values.  Fails on dangling edges (gluing condition) and on stale matches."""
    rule = m.rule
    if host is not None and host.digest() != m.host.digest():
        raise RuleError(f"stale match for rule {rule.name}: host graph changed")
    host = m.host
    mapping = m.map()
    bindings = m.binds()

    deleted_edge_imgs = {mapping[eid] for eid in rule.deleted_edges()}
    deleted_node_imgs = {mapping[nid] for nid in rule.deleted_nodes()}

    dangling = [e.id for e in host.edges.values()
                if (e.src in deleted_node_imgs or e.tgt in deleted_node_imgs)
                and e.id not in deleted_edge_imgs]
    if dangling:
        raise GluingError(dangling)

    g = host.without(deleted_edge_imgs | deleted_node_imgs)

    fresh: dict[str, str] = {}
    used: set[str] = set(g.nodes) | set(g.edges)
    for nid in sorted(rule.created_nodes()):
        rn = rule.rhs.nodes[nid]
        new_id = g._fresh("n", used)
        used.add(new_id)
        fresh[nid] = new_id
        g = Graph(list(g.nodes.values())
                  + [GNode(new_id, rn.type, _resolve_attrs(rn.attrs, bindings))],
                  g.edges.values())

    def image(rhs_id: str) -> str:
        if rhs_id in fresh:
            return fresh[rhs_id]
        return mapping[rhs_id]

    for eid in sorted(rule.created_edges()):
        re = rule.rhs.edges[eid]
        new_id = g._fresh("e", used)
        used.add(new_id)
        g = g.with_edge(new_id, re.type, image(re.src), image(re.tgt),
                        _resolve_attrs(re.attrs, bindings))
    return g


# ---------------------------------------------------------------------------
# Rule sequences

REPETITIONS = ("once", "star")


@dataclass(frozen=True)
class RuleSequence:
    items: tuple[tuple[Rule, str], ...]

    def __post_init__(self):
        if not self.items:
            raise RuleError("empty rule sequence")
        for _, rep in self.items:
            if rep not in REPETITIONS:
                raise RuleError(f"unknown repetition {rep!r}")

    @classmethod
    def of(cls, *items: tuple[Rule, str]) -> "RuleSequence":
        return cls(tuple(items))


@dataclass(frozen=True)
class TraceStep:
    rule: str
    match: tuple[tuple[str, str], ...]
    pre_digest: str
    post_digest: str


@dataclass(frozen=True)
class ApplicationTrace:
    steps: tuple[TraceStep, ...] = ()

    def __add__(self, step: TraceStep) -> "ApplicationTrace":
        return ApplicationTrace(self.steps + (step,))


Chooser = Callable[[Rule, Sequence[Match]], Optional[Match]]


def first_match(rule: Rule, matches: Sequence[Match]) -> Match:
    return matches[0]


def max_rewrites_limit(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get(MAX_REWRITES_ENV)
    return int(env) if env else DEFAULT_MAX_REWRITES


def apply_sequence(s: RuleSequence, host: Graph,
                   chooser: Optional[Chooser] = None,
                   bindings: Optional[Mapping[str, object]] = None,
                   max_rewrites: Optional[int] = None) -> tuple[Graph, ApplicationTrace]:
    """`once` items must apply exactly once; `star` items repeat as long as a
    match not applied before is available (so rules that do not disable
    themselves still terminate), guarded by an application-count ceiling.

    The chooser may return None to decline: a declined `star` stops early, a
    declined `once` is a sequence error.
    """
    chooser = chooser or first_match
    limit = max_rewrites_limit(max_rewrites)
    trace = ApplicationTrace()
    g = host
    applications = 0

    def step(match: Match) -> Graph:
        nonlocal trace, applications
        pre = g.digest()
        out = apply(match)
        applications += 1
        if applications > limit:
            raise SequenceError(
                f"rule sequence exceeded {limit} applications (possible runaway star)")
        trace = trace + TraceStep(match.rule.name, match.mapping, pre, out.digest())
        return out

    for rule, rep in s.items:
        if rep == "once":
            matches = find_matches(rule, g, bindings)
            m = chooser(rule, matches) if matches else None
            if m is None:
                raise SequenceError(f"rule {rule.name} has no match but must apply once")
            g = step(m)
        else:
            seen: set[tuple] = set()
            while True:
                matches = [m for m in find_matches(rule, g, bindings)
                           if m.footprint() not in seen]
                if not matches:
                    break
                m = chooser(rule, matches)
                if m is None:
                    break
                seen.add(m.footprint())
                g = step(m)
    return g, trace
