import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import dcl


@pytest.fixture(scope="session")
def dectiger():
    return dcl.builtin("dectiger")


@pytest.fixture(scope="session")
def dectiger4():
    return dcl.builtin("dectiger", horizon=4)


@pytest.fixture(scope="session")
def beverage():
    return dcl.builtin("beverage")


@pytest.fixture(scope="session")
def meetgrid():
    return dcl.builtin("meetgrid3")


@pytest.fixture(scope="session")
def listen_open_tables(dectiger):
    policy = dcl.dectiger_listen_open(dectiger)
    return policy, dcl.values(dectiger, policy)


@pytest.fixture(scope="session")
def listen_open_tables4(dectiger4):
    policy = dcl.dectiger_listen_open(dectiger4)
    return policy, dcl.values(dectiger4, policy)
