"""Architecture domain model and its canonical file format.

Components own ports and (optionally) a configuration of child components.
Connectors carry roles; attachments tie ports to roles, bindings tie a parent
port to a child port, and `uses` records an internal dependency between two
ports of the same component.

Element references use path syntax: components are addressed as
``Top/Child/...``, ports as ``Top/Child#Port`` and roles as ``Conn.Role``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

FORMAT_ARCHITECTURE = "archevol/architecture@1"

DIRECTIONS = ("provided", "required")
KINDS = ("plain", "client", "server")


class ModelError(Exception):
    """Invalid architecture or unresolvable reference."""


@dataclass
class Port:
    name: str
    direction: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ModelError(f"bad port direction {self.direction!r} on {self.name}")


@dataclass
class Role:
    name: str
    direction: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ModelError(f"bad role direction {self.direction!r} on {self.name}")


@dataclass
class Component:
    name: str
    kind: str = "plain"
    ports: list[Port] = field(default_factory=list)
    children: Optional[list["Component"]] = None  # None: no configuration

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"bad component kind {self.kind!r} on {self.name}")

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise ModelError(f"no port {name} on component {self.name}")

    def has_port(self, name: str) -> bool:
        return any(p.name == name for p in self.ports)


@dataclass
class Connector:
    name: str
    roles: list[Role] = field(default_factory=list)

    def role(self, name: str) -> Role:
        for r in self.roles:
            if r.name == name:
                return r
        raise ModelError(f"no role {name} on connector {self.name}")


@dataclass
class Architecture:
    name: str
    components: list[Component] = field(default_factory=list)
    connectors: list[Connector] = field(default_factory=list)
    attachments: list[tuple[str, str]] = field(default_factory=list)  # (port ref, role ref)
    bindings: list[tuple[str, str]] = field(default_factory=list)     # (outer port, inner port)
    uses: list[tuple[str, str]] = field(default_factory=list)         # (from port, to port)

    # -- traversal ----------------------------------------------------------

    def walk(self) -> Iterator[tuple[str, Component, Optional[str]]]:
        """Yields (path, component, parent path) in preorder."""
        def rec(comp: Component, prefix: str, parent: Optional[str]):
            path = f"{prefix}/{comp.name}" if prefix else comp.name
            yield path, comp, parent
            for child in comp.children or []:
                yield from rec(child, path, path)
        for c in self.components:
            yield from rec(c, "", None)

    def component(self, path: str) -> Component:
        for p, c, _ in self.walk():
            if p == path:
                return c
        raise ModelError(f"no component {path}")

    def parent_of(self, path: str) -> Optional[str]:
        for p, _, parent in self.walk():
            if p == path:
                return parent
        raise ModelError(f"no component {path}")

    def connector(self, name: str) -> Connector:
        for k in self.connectors:
            if k.name == name:
                return k
        raise ModelError(f"no connector {name}")

    def port(self, ref: str) -> Port:
        cpath, pname = split_port_ref(ref)
        return self.component(cpath).port(pname)

    def port_refs(self) -> list[str]:
        return [f"{path}#{p.name}" for path, c, _ in self.walk() for p in c.ports]

    def copy(self) -> "Architecture":
        return copy.deepcopy(self)

    # -- validation ---------------------------------------------------------

    def problems(self) -> list[str]:
        out: list[str] = []
        paths = [p for p, _, _ in self.walk()]
        dupes = {p for p in paths if paths.count(p) > 1}
        out += [f"duplicate component path {p}" for p in sorted(dupes)]
        for path, comp, _ in self.walk():
            names = [p.name for p in comp.ports]
            out += [f"duplicate port {n} on {path}" for n in sorted(set(n for n in names if names.count(n) > 1))]
        knames = [k.name for k in self.connectors]
        out += [f"duplicate connector {n}" for n in sorted(set(n for n in knames if knames.count(n) > 1))]
        for k in self.connectors:
            rnames = [r.name for r in k.roles]
            out += [f"duplicate role {n} on {k.name}" for n in sorted(set(n for n in rnames if rnames.count(n) > 1))]
        if out:
            return out  # reference checks need unique paths

        ports = set(self.port_refs())
        roles = {f"{k.name}.{r.name}" for k in self.connectors for r in k.roles}
        for pref, rref in self.attachments:
            if pref not in ports:
                out.append(f"attachment references unknown port {pref}")
            if rref not in roles:
                out.append(f"attachment references unknown role {rref}")
        for outer, inner in self.bindings:
            if outer not in ports or inner not in ports:
                out.append(f"binding references unknown port {outer if outer not in ports else inner}")
        for frm, to in self.uses:
            if frm not in ports or to not in ports:
                out.append(f"uses references unknown port {frm if frm not in ports else to}")
        out += self._uses_cycles()
        return out

    def semantic_problems(self) -> list[str]:
        """Domain-level invariants beyond referential integrity.  These mirror
        the graph invariants, so a file violating them still loads and encodes
        and the violation is reported by conformance checking instead."""
        out: list[str] = []
        for outer, inner in self.bindings:
            oc, _ = split_port_ref(outer)
            ic, _ = split_port_ref(inner)
            if self.parent_of(ic) != oc:
                out.append(f"binding {outer} -> {inner} does not cross one containment level")
            elif self.port(outer).direction != self.port(inner).direction:
                out.append(f"binding {outer} -> {inner} mixes port directions")
        for frm, to in self.uses:
            if frm == to:
                out.append(f"uses self-dependency on {frm}")
            elif split_port_ref(frm)[0] != split_port_ref(to)[0]:
                out.append(f"uses {frm} -> {to} crosses components")
        return out

    def _uses_cycles(self) -> list[str]:
        adj: dict[str, list[str]] = {}
        for frm, to in self.uses:
            adj.setdefault(frm, []).append(to)
        state: dict[str, int] = {}
        bad: list[str] = []

        def dfs(v: str) -> bool:
            state[v] = 1
            for w in adj.get(v, []):
                if state.get(w) == 1:
                    return True
                if state.get(w, 0) == 0 and dfs(w):
                    return True
            state[v] = 2
            return False

        for v in sorted(adj):
            if state.get(v, 0) == 0 and dfs(v):
                bad.append(f"cycle among uses dependencies through {v}")
        return bad

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise ModelError("; ".join(probs))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        def comp_dict(c: Component) -> dict:
            d = {
                "name": c.name,
                "kind": c.kind,
                "ports": [{"name": p.name, "direction": p.direction} for p in c.ports],
            }
            if c.children is not None:
                d["children"] = [comp_dict(ch) for ch in c.children]
            return d

        return {
            "format": FORMAT_ARCHITECTURE,
            "name": self.name,
            "components": [comp_dict(c) for c in self.components],
            "connectors": [
                {"name": k.name,
                 "roles": [{"name": r.name, "direction": r.direction} for r in k.roles]}
                for k in self.connectors
            ],
            "attachments": [{"port": p, "role": r} for p, r in self.attachments],
            "bindings": [{"outer": o, "inner": i} for o, i in self.bindings],
            "uses": [{"from": f, "to": t} for f, t in self.uses],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Architecture":
        if d.get("format") != FORMAT_ARCHITECTURE:
            raise ModelError(f"unsupported architecture format {d.get('format')!r}")

        def comp(cd: dict) -> Component:
            return Component(
                name=cd["name"],
                kind=cd.get("kind", "plain"),
                ports=[Port(p["name"], p["direction"]) for p in cd.get("ports", [])],
                children=[comp(ch) for ch in cd["children"]] if "children" in cd else None,
            )

        return cls(
            name=d["name"],
            components=[comp(cd) for cd in d.get("components", [])],
            connectors=[
                Connector(kd["name"], [Role(r["name"], r["direction"]) for r in kd.get("roles", [])])
                for kd in d.get("connectors", [])
            ],
            attachments=[(a["port"], a["role"]) for a in d.get("attachments", [])],
            bindings=[(b["outer"], b["inner"]) for b in d.get("bindings", [])],
            uses=[(u["from"], u["to"]) for u in d.get("uses", [])],
        )

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "Architecture":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "Architecture":
        return cls.loads(Path(path).read_text())

    # -- structural comparison (order-insensitive) ---------------------------

    def _shape(self):
        def comp_shape(c: Component):
            kids = None if c.children is None else \
                tuple(sorted(comp_shape(ch) for ch in c.children))
            return (c.name, c.kind,
                    tuple(sorted((p.name, p.direction) for p in c.ports)), kids)

        return (
            tuple(sorted(comp_shape(c) for c in self.components)),
            tuple(sorted((k.name, tuple(sorted((r.name, r.direction) for r in k.roles)))
                         for k in self.connectors)),
            tuple(sorted(self.attachments)),
            tuple(sorted(self.bindings)),
            tuple(sorted(self.uses)),
        )

    def same_structure(self, other: "Architecture") -> bool:
        return self._shape() == other._shape()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def split_port_ref(ref: str) -> tuple[str, str]:
    if "#" not in ref:
        raise ModelError(f"bad port reference {ref!r}")
    cpath, pname = ref.rsplit("#", 1)
    return cpath, pname


def split_role_ref(ref: str) -> tuple[str, str]:
    if "." not in ref:
        raise ModelError(f"bad role reference {ref!r}")
    kname, rname = ref.rsplit(".", 1)
    return kname, rname
