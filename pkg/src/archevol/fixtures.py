"""Example architectures used by tests and the documentation.

The main one is a small e-shop: a Product catalogue, a Customer and an Order
handler, wired through four connectors, before any client/server split.
"""

from __future__ import annotations

from .model import Architecture, Component, Connector, Port, Role


def _conn(name: str) -> Connector:
    return Connector(name, [Role("prov", "provided"), Role("req", "required")])


def eshop() -> Architecture:
    """Flat initial e-shop architecture: three peer components."""
    product = Component("Product", ports=[
        Port("ViewProduct", "required"),
        Port("SelectProduct", "provided"),
        Port("OpenOrder", "provided"),
    ])
    customer = Component("Customer", ports=[
        Port("UserDetails", "required"),
        Port("Pwd", "required"),
        Port("AcceptBill", "required"),
        Port("Pay", "required"),
        Port("Authenticate", "provided"),
        Port("CreateCustomer", "provided"),
        Port("Bill", "provided"),
    ])
    order = Component("Order", ports=[
        Port("OpenOrder", "required"),
        Port("Authenticate", "required"),
        Port("CreateCustomer", "required"),
        Port("Bill", "required"),
        Port("Cancel", "provided"),
    ])
    return Architecture(
        name="e-shop",
        components=[product, customer, order],
        connectors=[_conn("OpenOrder"), _conn("Authenticate"),
                    _conn("CreateCustomer"), _conn("Bill")],
        attachments=[
            ("Product#OpenOrder", "OpenOrder.prov"),
            ("Order#OpenOrder", "OpenOrder.req"),
            ("Customer#Authenticate", "Authenticate.prov"),
            ("Order#Authenticate", "Authenticate.req"),
            ("Customer#CreateCustomer", "CreateCustomer.prov"),
            ("Order#CreateCustomer", "CreateCustomer.req"),
            ("Customer#Bill", "Bill.prov"),
            ("Order#Bill", "Bill.req"),
        ],
        uses=[
            ("Product#SelectProduct", "Product#ViewProduct"),
            ("Product#OpenOrder", "Product#SelectProduct"),
        ],
    )


def empty() -> Architecture:
    return Architecture(name="empty")


def broken_binding() -> Architecture:
    """Referentially sound but semantically broken: the binding joins ports of
    opposite directions between unrelated components.  Loads fine; conformance
    checking reports the violation."""
    a = Component("A", ports=[Port("p", "provided")])
    b = Component("B", ports=[Port("q", "required")])
    return Architecture(
        name="broken-binding",
        components=[a, b],
        bindings=[("A#p", "B#q")],
    )
