import pathlib
import sys

import pytest

from bago import BagOntology, parse_abox, parse_cq, parse_tbox

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def load_fixture(name):
    tbox = parse_tbox((FIXTURES / name / "tbox.dl").read_text())
    abox = parse_abox((FIXTURES / name / "abox.bag").read_text())
    return tbox, abox


@pytest.fixture(scope="session")
def employees():
    tbox, abox = load_fixture("employees")
    query = parse_cq((FIXTURES / "employees" / "query.cq").read_text())
    return BagOntology(tbox, abox), query


@pytest.fixture(scope="session")
def managers():
    tbox, abox = load_fixture("managers")
    rooted = parse_cq((FIXTURES / "managers" / "query_managed.cq").read_text())
    non_rooted = parse_cq((FIXTURES / "managers" / "query_some.cq").read_text())
    return BagOntology(tbox, abox), rooted, non_rooted


@pytest.fixture(scope="session")
def prime():
    tbox, abox = load_fixture("prime")
    query = parse_cq((FIXTURES / "prime" / "query.cq").read_text())
    return BagOntology(tbox, abox), query


@pytest.fixture(scope="session")
def prime_pair():
    tbox, abox = load_fixture("prime_pair")
    query = parse_cq((FIXTURES / "prime_pair" / "query.cq").read_text())
    return BagOntology(tbox, abox), query
