"""Seeded random architecture and operation generators shared by the
property suites."""

from __future__ import annotations

import random
import string

from archevol.evolution import OperationDescriptor
from archevol.model import Architecture, Component, Connector, Port, Role


def random_architecture(rng: random.Random, max_components: int = 6,
                        max_ports: int = 4) -> Architecture:
    """A flat, valid architecture: components with ports, acyclic
    intra-component uses, and connectors joining opposite-direction ports of
    different components (each port attached at most once)."""
    n_comps = rng.randint(1, max_components)
    comps = []
    for i in range(n_comps):
        name = string.ascii_uppercase[i]
        # globally unique port names: a port ref stays unambiguous even after
        # operations move the port into another component
        ports = [Port(f"{name.lower()}{j}", rng.choice(("provided", "required")))
                 for j in range(rng.randint(0, max_ports))]
        comps.append(Component(name, ports=ports))
    a = Architecture("random", comps)

    # acyclic uses: only forward edges within a component's port order
    for c in comps:
        for j, p in enumerate(c.ports):
            for q in c.ports[j + 1:]:
                if rng.random() < 0.25:
                    a.uses.append((f"{c.name}#{p.name}", f"{c.name}#{q.name}"))

    # connectors between free ports of different components
    free = [(c.name, p) for c in comps for p in c.ports]
    rng.shuffle(free)
    k = 1
    while len(free) >= 2:
        cn, pn = free.pop()
        partners = [x for x in free if x[0] != cn and x[1].direction != pn.direction]
        if not partners or rng.random() < 0.4:
            continue
        other = rng.choice(partners)
        free.remove(other)
        conn = Connector(f"K{k}", [Role("prov", "provided"), Role("req", "required")])
        a.connectors.append(conn)
        for owner, port in ((cn, pn), other):
            role = "prov" if port.direction == "provided" else "req"
            a.attachments.append((f"{owner}#{port.name}", f"K{k}.{role}"))
        k += 1

    assert a.problems() == [] and a.semantic_problems() == []
    return a


def random_operations(rng: random.Random, a: Architecture,
                      count: int) -> list[OperationDescriptor]:
    """Up to `count` descriptors aimed at the given architecture.  Only
    dependency-preserving operations are drawn; some may still fail their
    preconditions once earlier operations have reshaped the architecture."""
    ops: list[OperationDescriptor] = []
    paths = [p for p, _, _ in a.walk()]
    ports = a.port_refs()
    top = [c.name for c in a.components]
    for _ in range(count):
        kind = rng.choice(("create", "movePort", "splitComponent",
                           "mergeComponents", "moveIn", "moveOut",
                           "delegatePort"))
        if kind == "create":
            ops.append(OperationDescriptor.of("create",
                                              name=f"New{rng.randint(1, 99)}"))
        elif kind == "movePort" and ports and len(paths) >= 2:
            ops.append(OperationDescriptor.of("movePort", rng.choice(ports),
                                              target=rng.choice(paths)))
        elif kind == "splitComponent" and ports:
            ref = rng.choice(ports)
            comp, port = ref.split("#", 1)
            ops.append(OperationDescriptor.of("splitComponent", comp,
                                              ports=[port]))
        elif kind == "mergeComponents" and len(top) >= 2:
            pair = rng.sample(top, 2)
            ops.append(OperationDescriptor.of("mergeComponents",
                                              components=pair,
                                              name=f"M{rng.randint(1, 99)}"))
        elif kind == "moveIn" and len(top) >= 2:
            c, p = rng.sample(top, 2)
            ops.append(OperationDescriptor.of("moveIn", c, parent=p))
        elif kind == "moveOut" and paths:
            ops.append(OperationDescriptor.of("moveOut", rng.choice(paths)))
        elif kind == "delegatePort" and ports:
            ops.append(OperationDescriptor.of("delegatePort", rng.choice(ports)))
    return ops


def random_graph(rng: random.Random, tg, max_nodes: int = 12):
    """A host graph over the given type graph: concrete node types only,
    edges drawn from the declared endpoint types.  Multiplicities are not
    enforced; the matcher must cope with arbitrary well-typed hosts."""
    from archevol.graphs import Graph

    concrete = [nt for nt in tg.node_types.values() if not nt.abstract]
    g = Graph()
    n = rng.randint(0, max_nodes)
    for i in range(n):
        nt = rng.choice(concrete)
        attrs = {k: f"v{rng.randint(0, 3)}" for k, _ in nt.attributes}
        g = g.with_node(f"n{i}", nt.name, attrs)
    eid = 0
    plain_edge_types = [et for et in tg.edge_types.values() if not et.derived]
    for _ in range(rng.randint(0, 2 * max(n, 1))):
        et = rng.choice(plain_edge_types)
        srcs = [x.id for x in g.nodes.values() if tg.is_subtype(x.type, et.source)]
        tgts = [x.id for x in g.nodes.values() if tg.is_subtype(x.type, et.target)]
        if not srcs or not tgts:
            continue
        g = g.with_edge(f"e{eid}", et.name, rng.choice(srcs), rng.choice(tgts))
        eid += 1
    return g
