import pytest

from archevol import fixtures
from archevol.clientserver import client_server_rules
from archevol.cosa import base_type_graph, encode


@pytest.fixture
def eshop():
    return fixtures.eshop()


@pytest.fixture
def eshop_graph(eshop):
    return encode(eshop)


@pytest.fixture
def tg():
    return base_type_graph()


@pytest.fixture
def rules():
    return client_server_rules()
