import pytest

from foqc import parse_program
from foqc.programs import BRANCHING_SOURCE, QFT_SOURCE, TELEPORT_SOURCE


@pytest.fixture(scope="session")
def qft():
    return parse_program(QFT_SOURCE, "qft.foq")


@pytest.fixture(scope="session")
def teleport():
    return parse_program(TELEPORT_SOURCE, "teleport.foq")


@pytest.fixture(scope="session")
def branching():
    return parse_program(BRANCHING_SOURCE, "appendix-b.foq")


@pytest.fixture(scope="session")
def corpus(qft, teleport, branching):
    return {"qft": qft, "teleport": teleport, "branching": branching}
