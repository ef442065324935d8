import math

import pytest

from bago import (
    AnswerBag,
    BagOntology,
    CertRequest,
    CrosscheckMismatch,
    NotRooted,
    UnsatisfiableOntology,
    UnsupportedTBoxKind,
    bag_cert,
    certain_answers,
    crosscheck_one,
    crosscheck_random,
    parse_abox,
    parse_cq,
    parse_tbox,
)
from bago.answers import VIA_BOTH, VIA_CHASE, VIA_REWRITE
from bago.ontology import BagABox


def test_certain_answers_running_example(employees):
    k, q = employees
    expected = AnswerBag(1, {("Lee",): 3})
    assert certain_answers(q, k, via=VIA_CHASE) == expected
    assert certain_answers(q, k, via=VIA_REWRITE) == expected
    assert certain_answers(q, k, via=VIA_BOTH) == expected


def test_certain_answers_empty_abox(employees):
    k, q = employees
    empty = BagOntology(k.tbox, BagABox())
    assert certain_answers(q, empty) == AnswerBag(1)
    assert certain_answers(q, empty, via=VIA_REWRITE) == AnswerBag(1)


def test_certain_answers_two_component_fixture(prime_pair):
    k, q = prime_pair
    expected = AnswerBag(2, {("a", "a"): 448})
    assert certain_answers(q, k, via=VIA_BOTH) == expected


def test_certain_answers_refusals(managers):
    k, q_rooted, q_nr = managers
    with pytest.raises(NotRooted):
        certain_answers(q_nr, k)
    k_r = BagOntology(parse_tbox("KIND R\nR SUBR S\n"), parse_abox("R(a,b)\n"))
    with pytest.raises(UnsupportedTBoxKind):
        certain_answers(parse_cq("q() :- R(x, y), A(x)"), k_r)
    unsat = BagOntology(parse_tbox("DISJ A B\n"), parse_abox("A(a)\nB(a)\n"))
    with pytest.raises(UnsatisfiableOntology):
        certain_answers(parse_cq("q(x) :- A(x)"), unsat)
    with pytest.raises(UnsatisfiableOntology):
        certain_answers(parse_cq("q(x) :- A(x)"), unsat, via=VIA_REWRITE)


def test_bag_cert_thresholds(employees):
    k, q = employees
    assert bag_cert(CertRequest(q, k, ("Lee",), 3))
    assert not bag_cert(CertRequest(q, k, ("Lee",), 4))
    assert bag_cert(CertRequest(q, k, ("Lee",), 0))
    assert bag_cert(CertRequest(q, k, ("Nobody",), 0))
    assert not bag_cert(CertRequest(q, k, ("Lee",), math.inf))
    assert bag_cert(CertRequest(q, k, ("Lee",), 3), via=VIA_REWRITE)


def test_cert_request_checks_arity(employees):
    k, q = employees
    with pytest.raises(ValueError):
        CertRequest(q, k, ("Lee", "Hill"), 1)


def test_crosscheck_single_pass(managers):
    k, q_rooted, _ = managers
    outcome = crosscheck_one(k.tbox, k.abox, q_rooted)
    assert outcome.passed
    assert outcome.chase_bag == AnswerBag(1, {("Lee",): 1})
    assert outcome.rewrite_bag == outcome.chase_bag


def test_crosscheck_detects_corrupted_rewriting(managers, monkeypatch):
    # Dropping a branch from the arithmetic union must be caught.
    import bago.answers as answers_mod
    from bago.rewrite import Rewriting, rewrite as real_rewrite

    k, q_rooted, _ = managers

    def broken_rewrite(q, tbox, link_chooser=None):
        rw = real_rewrite(q, tbox, link_chooser=link_chooser)
        return Rewriting(
            rw.source, rw.tbox, rw.branches[:1],
            rw.branches[0].compiled, rw.certificates,
        )

    monkeypatch.setattr(answers_mod, "rewrite", broken_rewrite)
    outcome = crosscheck_one(k.tbox, k.abox, q_rooted)
    assert not outcome.passed
    assert "chase=1 rewrite=0" in outcome.detail
    with pytest.raises(CrosscheckMismatch):
        certain_answers(q_rooted, k, via=VIA_BOTH)


def test_crosscheck_random_batch_is_reproducible():
    report = crosscheck_random(30, seed=99)
    assert report.summary() == "30/30 PASS"
    again = crosscheck_random(30, seed=99)
    assert [o.label for o in report.outcomes] == [o.label for o in again.outcomes]
