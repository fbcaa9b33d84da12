"""Elementary dependency-preserving evolution operations.

Every operation is a pure function Architecture -> Architecture.  The central
contract: port-level dependency reachability, restricted to ports that exist
both before and after, is unchanged.  When a restructuring severs a `uses`
edge across a component boundary, the dependency is re-established through a
bridge: a provided port on the providing side, a required port on the
requiring side, and a fresh connector between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .cosa import check_architecture
from .model import (
    Architecture, Component, Connector, ModelError, Port, Role,
    split_port_ref, split_role_ref,
)


class EvolutionError(ModelError):
    """Operation precondition failure."""


OPERATION_NAMES = ("create", "delete", "movePort", "splitComponent",
                   "mergeComponents", "moveIn", "moveOut", "delegatePort")


@dataclass(frozen=True)
class OperationDescriptor:
    name: str
    context: str = ""
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.name not in OPERATION_NAMES:
            raise EvolutionError(f"unknown operation {self.name!r}")

    def param_map(self) -> dict[str, object]:
        return dict(self.params)

    @classmethod
    def of(cls, name: str, context: str = "", /, **params) -> "OperationDescriptor":
        return cls(name, context, tuple(sorted(params.items())))

    def to_dict(self) -> dict:
        return {"op": self.name, "context": self.context, "params": self.param_map()}

    @classmethod
    def from_dict(cls, d: dict) -> "OperationDescriptor":
        return cls(d["op"], d.get("context", ""),
                   tuple(sorted(d.get("params", {}).items())))


# ---------------------------------------------------------------------------
# Internals


def _validated(a: Architecture) -> Architecture:
    probs = a.problems() + a.semantic_problems()
    if probs:
        raise EvolutionError("operation produced an invalid architecture: "
                             + "; ".join(probs))
    report = check_architecture(a)
    if not report.ok:
        raise EvolutionError("operation broke a graph invariant: "
                             + "; ".join(v.message for v in report.violations))
    return a


def _rewrite_refs(a: Architecture, mapping: Mapping[str, str]) -> None:
    """In-place rewrite of port references in attachments, bindings and uses."""
    def rw(ref: str) -> str:
        return mapping.get(ref, ref)

    a.attachments = [(rw(p), r) for p, r in a.attachments]
    a.bindings = [(rw(o), rw(i)) for o, i in a.bindings]
    a.uses = [(rw(f), rw(t)) for f, t in a.uses]


def _rewrite_prefix(a: Architecture, old: str, new: str) -> None:
    """Rewrite refs under a moved component subtree: `old#...` and `old/...`."""
    def rw(ref: str) -> str:
        cpath, pname = split_port_ref(ref)
        if cpath == old:
            return f"{new}#{pname}"
        if cpath.startswith(old + "/"):
            return f"{new}{cpath[len(old):]}#{pname}"
        return ref

    a.attachments = [(rw(p), r) for p, r in a.attachments]
    a.bindings = [(rw(o), rw(i)) for o, i in a.bindings]
    a.uses = [(rw(f), rw(t)) for f, t in a.uses]


def _siblings(a: Architecture, path: str) -> list[Component]:
    """The component list that directly holds `path`."""
    parent = a.parent_of(path)
    if parent is None:
        return a.components
    plist = a.component(parent).children
    assert plist is not None
    return plist


def _detach_component(a: Architecture, path: str) -> Component:
    sibs = _siblings(a, path)
    comp = a.component(path)
    sibs.remove(comp)
    return comp


def _fresh_bridge_k(a: Architecture, req_comp: str, prov_comp: str) -> int:
    conn_names = {c.name for c in a.connectors}
    k = 1
    while (a.component(req_comp).has_port(f"Req{k}")
           or a.component(prov_comp).has_port(f"Pro{k}")
           or f"Conn{k}" in conn_names):
        k += 1
    return k


def _fresh_port_name(comp: Component, want: str) -> str:
    if not comp.has_port(want):
        return want
    k = 2
    while comp.has_port(f"{want}_{k}"):
        k += 1
    return f"{want}_{k}"


# ---------------------------------------------------------------------------
# Port moves


def _move_ports(a: Architecture, ports: Sequence[str], target: str) -> Architecture:
    """Move several ports of one component to `target` in a single step, so
    that uses edges whose two endpoints travel together simply move along.

    A uses edge left crossing the boundary is bridged: for `u uses v`, the
    side keeping v gets a provided port Pro<k>, the side keeping u a required
    port Req<k>, joined by a fresh connector; u uses Req<k> and Pro<k> uses v
    re-anchor the chain, so u still transitively depends on v.
    """
    if not ports:
        raise EvolutionError("no ports to move")
    owners = {split_port_ref(p)[0] for p in ports}
    if len(owners) != 1:
        raise EvolutionError("ports to move must share one owner")
    owner = owners.pop()
    if owner == target:
        raise EvolutionError("target equals the port owner")

    a = a.copy()
    src = a.component(owner)
    dst = a.component(target)

    names = [split_port_ref(p)[1] for p in ports]
    for n in names:
        src.port(n)  # existence check
        if dst.has_port(n):
            raise EvolutionError(
                f"component {target} already has a port named {n}; rename first")

    moving = set(names)
    port_objs = [p for p in src.ports if p.name in moving]
    src.ports = [p for p in src.ports if p.name not in moving]
    dst.ports.extend(port_objs)

    _rewrite_refs(a, {f"{owner}#{n}": f"{target}#{n}" for n in names})

    # classify uses edges after the reference rewrite
    crossing = []
    for f, t in a.uses:
        fc, fn = split_port_ref(f)
        tc, tn = split_port_ref(t)
        involved = (fc == target and fn in moving) or (tc == target and tn in moving)
        if involved and fc != tc:
            crossing.append((f, t))

    for f, t in sorted(crossing):
        a.uses.remove((f, t))
        fc, _ = split_port_ref(f)
        tc, _ = split_port_ref(t)
        k = _fresh_bridge_k(a, req_comp=fc, prov_comp=tc)
        pro, req, conn = f"Pro{k}", f"Req{k}", f"Conn{k}"
        a.component(tc).ports.append(Port(pro, "provided"))
        a.component(fc).ports.append(Port(req, "required"))
        a.connectors.append(Connector(conn, [Role("prov", "provided"),
                                             Role("req", "required")]))
        a.attachments.append((f"{tc}#{pro}", f"{conn}.prov"))
        a.attachments.append((f"{fc}#{req}", f"{conn}.req"))
        a.uses.append((f, f"{fc}#{req}"))
        a.uses.append((f"{tc}#{pro}", t))

    return _validated(a)


def move_port(a: Architecture, port: str, target: str) -> Architecture:
    return _move_ports(a, [port], target)


# ---------------------------------------------------------------------------
# Split / merge


def split_component(a: Architecture, comp: str, partition: Iterable[str],
                    new_name: Optional[str] = None) -> Architecture:
    """Extract `partition` (port names) of `comp` into a fresh sibling."""
    src = a.component(comp)
    part = sorted(set(partition))
    if not part:
        raise EvolutionError("empty partition")
    all_names = {p.name for p in src.ports}
    unknown = [n for n in part if n not in all_names]
    if unknown:
        raise EvolutionError(f"unknown ports in partition: {', '.join(unknown)}")
    if set(part) == all_names:
        raise EvolutionError("partition covers all ports; the source would be emptied")

    a = a.copy()
    parent = a.parent_of(comp)
    sibs = a.components if parent is None else a.component(parent).children
    if new_name is None:
        k = 2
        taken = {c.name for c in sibs}
        while f"{src.name}_{k}" in taken:
            k += 1
        new_name = f"{src.name}_{k}"
    if any(c.name == new_name for c in sibs):
        raise EvolutionError(f"component {new_name} already exists")
    sibs.append(Component(new_name))
    new_path = new_name if parent is None else f"{parent}/{new_name}"
    return _move_ports(a, [f"{comp}#{n}" for n in part], new_path)


def merge_components(a: Architecture, comps: Sequence[str],
                     new_name: str) -> Architecture:
    """Fuse sibling components; connectors linking only the merged components
    collapse back into direct uses edges (required end uses provided end)."""
    if len(comps) < 2:
        raise EvolutionError("merge needs at least two components")
    parents = {a.parent_of(c) for c in comps}
    if len(parents) != 1:
        raise EvolutionError("merge candidates must be siblings")
    parent = parents.pop()

    members = [a.component(c) for c in comps]
    seen: dict[str, str] = {}
    collisions = []
    for path, m in zip(comps, members):
        for p in m.ports:
            if p.name in seen:
                collisions.append(p.name)
            seen[p.name] = path
    if collisions:
        raise EvolutionError("port name collisions: " + ", ".join(sorted(set(collisions))))

    a = a.copy()
    merged_children: Optional[list[Component]] = None
    merged_ports: list[Port] = []
    for path in comps:
        c = _detach_component(a, path)
        merged_ports.extend(c.ports)
        if c.children is not None:
            merged_children = (merged_children or []) + c.children

    sibs = a.components if parent is None else a.component(parent).children
    if any(c.name == new_name for c in sibs):
        raise EvolutionError(f"component {new_name} already exists")
    sibs.append(Component(new_name, ports=merged_ports, children=merged_children))
    new_path = new_name if parent is None else f"{parent}/{new_name}"
    for path in comps:
        _rewrite_prefix(a, path, new_path)

    # collapse now-internal connectors into uses edges
    by_conn: dict[str, list[str]] = {}
    for pref, rref in a.attachments:
        by_conn.setdefault(split_role_ref(rref)[0], []).append(pref)
    for conn_name in sorted(by_conn):
        attached = by_conn[conn_name]
        if not attached:
            continue
        if not all(split_port_ref(p)[0] == new_path for p in attached):
            continue
        req = sorted(p for p in attached if a.port(p).direction == "required")
        prov = sorted(p for p in attached if a.port(p).direction == "provided")
        a.connectors = [c for c in a.connectors if c.name != conn_name]
        a.attachments = [(p, r) for p, r in a.attachments
                         if split_role_ref(r)[0] != conn_name]
        for rp in req:
            for pp in prov:
                if (rp, pp) not in a.uses:
                    a.uses.append((rp, pp))
    return _validated(a)


# ---------------------------------------------------------------------------
# Containment moves


def _conn_partners(a: Architecture, conn: str, exclude: str) -> list[str]:
    return [p for p, r in a.attachments
            if split_role_ref(r)[0] == conn and p != exclude]


def move_in(a: Architecture, comp: str, parent: str) -> Architecture:
    """Put `comp` inside `parent`'s configuration.  Connectors running to the
    outside are rerouted through fresh delegated ports on the parent; a
    connector whose other end is a delegated port of the parent itself is
    short-circuited to the inner port that delegation pointed at."""
    if comp == parent:
        raise EvolutionError("cannot move a component into itself")
    if parent == comp or parent.startswith(comp + "/"):
        raise EvolutionError(f"{parent} is inside {comp}; the move would create a cycle")
    a = a.copy()
    a.component(parent)  # existence
    moved = _detach_component(a, comp)
    pc = a.component(parent)
    if pc.children is None:
        pc.children = []
    pc.children.append(moved)
    new_path = f"{parent}/{moved.name}"
    _rewrite_prefix(a, comp, new_path)

    for port in list(moved.ports):
        pref = f"{new_path}#{port.name}"
        for rref in [r for p, r in a.attachments if p == pref]:
            conn = split_role_ref(rref)[0]
            partners = _conn_partners(a, conn, pref)
            inside = [p for p in partners
                      if split_port_ref(p)[0] == parent
                      or split_port_ref(p)[0].startswith(parent + "/")]
            if not partners or (inside and not any(
                    split_port_ref(p)[0] == parent for p in inside)):
                continue  # already internal to the parent subtree
            parent_side = [p for p in inside if split_port_ref(p)[0] == parent]
            if parent_side:
                # short-circuit: the other end is the parent's own delegated
                # port; attach the role straight to the port it was bound to
                for q in parent_side:
                    bound = [(o, i) for o, i in a.bindings if o == q]
                    if not bound:
                        continue
                    _, inner = bound[0]
                    a.bindings.remove(bound[0])
                    a.attachments = [(inner if p == q else p, r)
                                     for p, r in a.attachments]
                    qc, qn = split_port_ref(q)
                    a.component(qc).ports = [x for x in a.component(qc).ports
                                             if x.name != qn]
            else:
                # standard delegation through a fresh same-direction parent port
                dname = _fresh_port_name(pc, port.name)
                pc.ports.append(Port(dname, port.direction))
                a.bindings.append((f"{parent}#{dname}", pref))
                a.attachments = [(f"{parent}#{dname}" if (p, r) == (pref, rref) else p,
                                  r) for p, r in a.attachments]
    return _validated(a)


def move_out(a: Architecture, comp: str) -> Architecture:
    """Lift `comp` out of its parent, dissolving its own delegations and
    delegating connectors it shares with remaining inner components."""
    parent = a.parent_of(comp)
    if parent is None:
        raise EvolutionError(f"{comp} is already top-level")
    a = a.copy()
    moved = _detach_component(a, comp)
    gp = a.parent_of(parent)
    sibs = a.components if gp is None else a.component(gp).children
    sibs.append(moved)
    new_path = moved.name if gp is None else f"{gp}/{moved.name}"
    _rewrite_prefix(a, comp, new_path)
    pc = a.component(parent)

    # dissolve the parent ports that only delegated to the moved component
    for outer, inner in [b for b in a.bindings
                         if split_port_ref(b[0])[0] == parent
                         and split_port_ref(b[1])[0] == new_path]:
        a.bindings.remove((outer, inner))
        a.attachments = [(inner if p == outer else p, r) for p, r in a.attachments]
        pc.ports = [x for x in pc.ports if x.name != split_port_ref(outer)[1]]

    # connectors still shared with inner siblings: delegate the inner end
    for pref, rref in list(a.attachments):
        owner = split_port_ref(pref)[0]
        if owner != new_path:
            continue
        conn = split_role_ref(rref)[0]
        for q in _conn_partners(a, conn, pref):
            qc, qn = split_port_ref(q)
            if qc == parent or not (qc == parent or qc.startswith(parent + "/")):
                continue
            if qc.startswith(parent + "/"):
                port = a.port(q)
                dname = _fresh_port_name(pc, qn)
                pc.ports.append(Port(dname, port.direction))
                a.bindings.append((f"{parent}#{dname}", q))
                a.attachments = [(f"{parent}#{dname}" if x == q else x, r)
                                 for x, r in a.attachments]
    return _validated(a)


def delegate_port(a: Architecture, port: str) -> Architecture:
    """Expose a contained component's port on its parent via a binding.
    Calling it again for the same port is a no-op."""
    owner, pname = split_port_ref(port)
    parent = a.parent_of(owner)
    if parent is None:
        raise EvolutionError(f"{owner} is top-level; nothing to delegate to")
    p = a.port(port)
    if any(i == port and split_port_ref(o)[0] == parent for o, i in a.bindings):
        return a.copy()
    a = a.copy()
    pc = a.component(parent)
    dname = _fresh_port_name(pc, pname)
    pc.ports.append(Port(dname, p.direction))
    a.bindings.append((f"{parent}#{dname}", port))
    return _validated(a)


# ---------------------------------------------------------------------------
# Create / delete and the descriptor dispatcher


def create_component(a: Architecture, name: str, kind: str = "plain") -> Architecture:
    a = a.copy()
    if any(c.name == name for c in a.components):
        raise EvolutionError(f"component {name} already exists")
    a.components.append(Component(name, kind))
    return _validated(a)


def delete_component(a: Architecture, comp: str) -> Architecture:
    a = a.copy()
    sub = {p for p, _, _ in a.copy().walk()}  # all paths, for prefix math
    _detach_component(a, comp)
    gone = {p for p in sub if p == comp or p.startswith(comp + "/")}

    def dead(ref: str) -> bool:
        return split_port_ref(ref)[0] in gone

    a.attachments = [(p, r) for p, r in a.attachments if not dead(p)]
    a.bindings = [(o, i) for o, i in a.bindings if not dead(o) and not dead(i)]
    a.uses = [(f, t) for f, t in a.uses if not dead(f) and not dead(t)]
    return _validated(a)


def apply_descriptor(a: Architecture, d: OperationDescriptor) -> Architecture:
    p = d.param_map()
    if d.name == "create":
        return create_component(a, str(p["name"]), str(p.get("kind", "plain")))
    if d.name == "delete":
        return delete_component(a, d.context)
    if d.name == "movePort":
        return move_port(a, d.context, str(p["target"]))
    if d.name == "splitComponent":
        return split_component(a, d.context, [str(x) for x in p["ports"]],
                               p.get("name"))
    if d.name == "mergeComponents":
        return merge_components(a, [str(x) for x in p["components"]], str(p["name"]))
    if d.name == "moveIn":
        return move_in(a, d.context, str(p["parent"]))
    if d.name == "moveOut":
        return move_out(a, d.context)
    if d.name == "delegatePort":
        return delegate_port(a, d.context)
    raise EvolutionError(f"unknown operation {d.name!r}")
