"""Seeded random instances for the cross-check harness and property suites.

The generated corpus stays inside the rewritable fragment: core TBoxes built
from inclusions only (hence always satisfiable), small bag ABoxes, and rooted
queries with at most four atoms over at most four variables. A separate
generator adds disjointness axioms for satisfiability-specific tests.
"""

from __future__ import annotations

import random

from .ontology import (
    AtomicConcept,
    BagABox,
    ConceptAssertion,
    ConceptDisjointness,
    ConceptInclusion,
    ExistsRole,
    Role,
    RoleAssertion,
    TBox,
)
from .query import CQ, ConceptAtom, Const, EqualityAtom, RoleAtom, Var, is_rooted

CONCEPTS = ("A", "B", "C")
ROLES = ("R", "S")
INDIVIDUALS = ("a", "b", "c")

_CONCEPT_POOL = tuple(
    [AtomicConcept(c) for c in CONCEPTS]
    + [ExistsRole(Role(r, inv)) for r in ROLES for inv in (False, True)]
)


def random_core_tbox(rng: random.Random, max_axioms: int = 10) -> TBox:
    axioms = set()
    for _ in range(rng.randint(0, max_axioms)):
        sub, sup = rng.sample(_CONCEPT_POOL, 2)
        axioms.add(ConceptInclusion(sub, sup))
    return TBox(axioms)


def random_tbox_with_disjointness(rng: random.Random, max_axioms: int = 10) -> TBox:
    axioms = set()
    for _ in range(rng.randint(1, max_axioms)):
        if rng.random() < 0.3:
            first, second = rng.sample(_CONCEPT_POOL, 2)
            axioms.add(ConceptDisjointness(first, second))
        else:
            sub, sup = rng.sample(_CONCEPT_POOL, 2)
            axioms.add(ConceptInclusion(sub, sup))
    return TBox(axioms)


def random_bag_abox(rng: random.Random, max_assertions: int = 12,
                    max_multiplicity: int = 5) -> BagABox:
    entries = []
    for _ in range(rng.randint(1, max_assertions)):
        if rng.random() < 0.5:
            assertion = ConceptAssertion(rng.choice(CONCEPTS), rng.choice(INDIVIDUALS))
        else:
            assertion = RoleAssertion(
                rng.choice(ROLES), rng.choice(INDIVIDUALS), rng.choice(INDIVIDUALS)
            )
        entries.append((assertion, rng.randint(1, max_multiplicity)))
    return BagABox(entries)


def random_rooted_cq(rng: random.Random, max_atoms: int = 4, max_vars: int = 4) -> CQ:
    """Rooted, safe query; retries until the Gaifman condition holds."""
    for _ in range(200):
        arity = rng.choice((0, 1, 1))
        answer_vars = tuple(Var(f"x{i}") for i in range(arity))
        var_pool = list(answer_vars) + [
            Var(f"y{i}") for i in range(max_vars - arity)
        ]
        n_atoms = rng.randint(1, max_atoms)

        def pick_term(allow_const=0.25):
            if rng.random() < allow_const:
                return Const(rng.choice(INDIVIDUALS))
            return rng.choice(var_pool)

        atoms = []
        for _ in range(n_atoms):
            if atoms and rng.random() < 0.15:
                atoms.append(rng.choice(atoms))  # repeated atoms matter for bags
            elif rng.random() < 0.35:
                atoms.append(ConceptAtom(rng.choice(CONCEPTS), pick_term()))
            else:
                atoms.append(RoleAtom(rng.choice(ROLES), pick_term(), pick_term()))
        used = {t for a in atoms for t in a.terms if isinstance(t, Var)}
        if rng.random() < 0.2 and len(used) >= 2 and len(atoms) < max_atoms:
            left, right = rng.sample(sorted(used, key=lambda v: v.name), 2)
            atoms.append(EqualityAtom(left, right))
        if not all(v in used for v in answer_vars):
            continue
        try:
            q = CQ(answer_vars, atoms)
        except Exception:
            continue
        if is_rooted(q):
            return q
    raise RuntimeError("failed to generate a rooted query")


def random_instance(rng: random.Random):
    """One cross-check instance: core TBox, bag ABox, rooted query."""
    return random_core_tbox(rng), random_bag_abox(rng), random_rooted_cq(rng)
