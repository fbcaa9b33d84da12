"""Built-in transformation rules for introducing a Client-Server split.

Eight rules over the base architecture type graph:

* CreateServer / CreateClient add a fresh tier component with an empty
  configuration; CreateServer is guarded so at most one server exists.
* MoveComponentToServer / MoveComponentToClient place a not-yet-assigned
  plain component into a tier's configuration.
* The four Delegate rules lift a provided or required port of a contained
  component onto the surrounding tier, with a binding from the new outer
  port down to the original one.

The `server-intro` and `client-intro` sequences chain these per tier:
create once, then move and delegate as often as matches remain.
"""

from __future__ import annotations

from .cosa import NAME_ATTR, base_type_graph
from .graphs import Graph, TypeGraph, Var
from .rewriting import Rule, RuleSequence


def _create_rule(name: str, tier: str, guarded: bool, tg: TypeGraph) -> Rule:
    lhs = Graph()
    rhs = (Graph()
           .with_node("s", tier, {NAME_ATTR: Var("name")})
           .with_node("g", "Configuration", {NAME_ATTR: Var("name")})
           .with_edge("cf", "hasConfiguration", "s", "g"))
    nacs = (Graph().with_node("other", tier),) if guarded else ()
    return Rule(name, lhs, rhs, tg, nacs=nacs, params=(("name", "string"),))


def _move_rule(name: str, tier: str, tg: TypeGraph) -> Rule:
    lhs = (Graph()
           .with_node("s", tier, {NAME_ATTR: Var("sn")})
           .with_node("g", "Configuration", {NAME_ATTR: Var("sn")})
           .with_edge("cf", "hasConfiguration", "s", "g")
           .with_node("c", "Component", {NAME_ATTR: Var("cn")}, strict=True))
    rhs = lhs.with_edge("ct", "contains", "g", "c")
    # not already assigned: neither to some other configuration nor to this one
    nac_other = lhs.with_node("g2", "Configuration").with_edge("x", "contains", "g2", "c")
    nac_here = lhs.with_edge("x", "contains", "g", "c")
    return Rule(name, lhs, rhs, tg, nacs=(nac_other, nac_here))


def _delegate_rule(name: str, tier: str, port_type: str, tg: TypeGraph) -> Rule:
    lhs = (Graph()
           .with_node("s", tier, {NAME_ATTR: Var("sn")})
           .with_node("g", "Configuration", {NAME_ATTR: Var("sn")})
           .with_edge("cf", "hasConfiguration", "s", "g")
           .with_node("c", "Component", {NAME_ATTR: Var("cn")}, strict=True)
           .with_edge("ct", "contains", "g", "c")
           .with_node("p", port_type, {NAME_ATTR: Var("pn")})
           .with_edge("hp", "hasPort", "c", "p"))
    rhs = (lhs
           .with_node("np", port_type, {NAME_ATTR: Var("pn")})
           .with_edge("nhp", "hasPort", "s", "np")
           .with_edge("bd", "binding", "np", "p"))
    return Rule(name, lhs, rhs, tg)


def client_server_rules(tg: TypeGraph | None = None) -> dict[str, Rule]:
    """The rule set, keyed by rule name."""
    tg = tg or base_type_graph()
    rules = [
        _create_rule("CreateServer", "Server", guarded=True, tg=tg),
        _create_rule("CreateClient", "Client", guarded=False, tg=tg),
        _move_rule("MoveComponentToServer", "Server", tg),
        _move_rule("MoveComponentToClient", "Client", tg),
        _delegate_rule("DelegateProvPortToServer", "Server", "ProvPort", tg),
        _delegate_rule("DelegateReqPortToServer", "Server", "ReqPort", tg),
        _delegate_rule("DelegateProvPortToClient", "Client", "ProvPort", tg),
        _delegate_rule("DelegateReqPortToClient", "Client", "ReqPort", tg),
    ]
    return {r.name: r for r in rules}


def server_intro_sequence(rules: dict[str, Rule] | None = None) -> RuleSequence:
    r = rules or client_server_rules()
    return RuleSequence.of(
        (r["CreateServer"], "once"),
        (r["MoveComponentToServer"], "star"),
        (r["DelegateProvPortToServer"], "star"),
        (r["DelegateReqPortToServer"], "star"),
    )


def client_intro_sequence(rules: dict[str, Rule] | None = None) -> RuleSequence:
    r = rules or client_server_rules()
    return RuleSequence.of(
        (r["CreateClient"], "once"),
        (r["MoveComponentToClient"], "star"),
        (r["DelegateProvPortToClient"], "star"),
        (r["DelegateReqPortToClient"], "star"),
    )


SEQUENCES = {
    "server-intro": server_intro_sequence,
    "client-intro": client_intro_sequence,
}

RULE_SET_NAME = "client-server-rules"
