"""Staged construction of the canonical bag model.

Stage 0 reads the bag ABox as an interpretation over the named individuals.
Each later stage (i) resets every old element's concept multiplicities to its
concept-closure values over the previous stage and (ii) repairs every
existential deficit delta = ccl(u)(EX R) - (EX R)(u) by attaching delta fresh
anonymous role successors, each with one role edge of multiplicity 1. Fresh
elements carry no concept memberships at birth; the next stage picks them up.

Stages grow monotonically under bag containment, so the bag union of stages
0..d equals stage d. Evaluating a rooted query with n concept/role atoms over
stage n already yields its answers over the full (infinite) union, which is
why callers always pass an explicit depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import UnsatisfiableOntology, UnsupportedTBoxKind
from .ontology import (
    CORE,
    AtomicConcept,
    BagABox,
    BagOntology,
    Concept,
    ConceptAssertion,
    ExistsRole,
    Role,
    TBox,
    is_satisfiable,
)
from .query import CQ, ConceptAtom, RoleAtom


@dataclass(frozen=True, eq=False)
class Named:
    name: str

    def __post_init__(self):
        # Elements are dict keys everywhere; precompute the hash.
        object.__setattr__(self, "_hash", hash(("n", self.name)))

    def __eq__(self, other):
        return type(other) is Named and other.name == self.name

    def __hash__(self):
        return self._hash

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Anon:
    parent: "Element"
    role: Role
    index: int

    def __post_init__(self):
        object.__setattr__(
            self, "_hash", hash(("a", self.parent, self.role, self.index))
        )

    def __eq__(self, other):
        return (
            type(other) is Anon
            and other.index == self.index
            and other.role == self.role
            and other.parent == self.parent
        )

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"_w({self.parent},{self.role},{self.index})"


Element = Union[Named, Anon]


def element_key(el: Element):
    key = getattr(el, "_key", None)
    if key is None:
        if isinstance(el, Named):
            key = (0, el.name)
        else:
            key = (1, element_key(el.parent), el.role.name, el.role.inverted, el.index)
        object.__setattr__(el, "_key", key)
    return key


class BagInterpretation:
    """Finite bag interpretation with per-role successor/predecessor indexes."""

    def __init__(
        self,
        domain: Iterable[Element],
        concepts: Mapping[str, Mapping[Element, int]],
        roles: Mapping[str, Mapping[tuple[Element, Element], int]],
    ):
        self.domain = frozenset(domain)
        self.concepts = {
            name: {el: m for el, m in ext.items() if m > 0}
            for name, ext in concepts.items()
        }
        self.concepts = {n: e for n, e in self.concepts.items() if e}
        self.roles = {
            name: {pair: m for pair, m in ext.items() if m > 0}
            for name, ext in roles.items()
        }
        self.roles = {n: e for n, e in self.roles.items() if e}
        for ext in self.concepts.values():
            for el in ext:
                if el not in self.domain:
                    raise ValueError(f"element {el} outside the domain")
        self._fwd: dict[str, dict[Element, dict[Element, int]]] = {}
        self._bwd: dict[str, dict[Element, dict[Element, int]]] = {}
        for name, ext in self.roles.items():
            fwd: dict[Element, dict[Element, int]] = {}
            bwd: dict[Element, dict[Element, int]] = {}
            for (u, v), m in ext.items():
                if u not in self.domain or v not in self.domain:
                    raise ValueError(f"pair ({u},{v}) outside the domain")
                fwd.setdefault(u, {})[v] = m
                bwd.setdefault(v, {})[u] = m
            self._fwd[name] = fwd
            self._bwd[name] = bwd

    def concept_mult(self, name: str, el: Element) -> int:
        return self.concepts.get(name, {}).get(el, 0)

    def role_mult(self, name: str, u: Element, v: Element) -> int:
        return self.roles.get(name, {}).get((u, v), 0)

    def successors(self, role: Role, u: Element) -> dict[Element, int]:
        index = self._bwd if role.inverted else self._fwd
        return index.get(role.name, {}).get(u, {})

    def exists_mult(self, role: Role, u: Element) -> int:
        return sum(self.successors(role, u).values())

    def named(self) -> list[Named]:
        return sorted((el for el in self.domain if isinstance(el, Named)),
                      key=element_key)

    def anonymous(self) -> list[Anon]:
        return sorted((el for el in self.domain if isinstance(el, Anon)),
                      key=element_key)

    def role_names(self) -> list[str]:
        return sorted(self.roles)

    def __eq__(self, other):
        return (
            isinstance(other, BagInterpretation)
            and self.domain == other.domain
            and self.concepts == other.concepts
            and self.roles == other.roles
        )

    def __hash__(self):
        return hash(self.domain)

    def __repr__(self):
        return (f"BagInterpretation(|domain|={len(self.domain)}, "
                f"concepts={sorted(self.concepts)}, roles={sorted(self.roles)})")

    def contains(self, other: "BagInterpretation") -> bool:
        """Bag containment: other's extensions are pointwise dominated."""
        if not other.domain <= self.domain:
            return False
        for name, ext in other.concepts.items():
            for el, m in ext.items():
                if self.concept_mult(name, el) < m:
                    return False
        for name, ext in other.roles.items():
            for (u, v), m in ext.items():
                if self.role_mult(name, u, v) < m:
                    return False
        return True

    def to_text(self) -> str:
        lines = []
        for name in sorted(self.concepts):
            for el, m in sorted(self.concepts[name].items(),
                                key=lambda kv: element_key(kv[0])):
                lines.append(f"{name}({el}) {m}")
        for name in sorted(self.roles):
            for (u, v), m in sorted(self.roles[name].items(),
                                    key=lambda kv: (element_key(kv[0][0]),
                                                    element_key(kv[0][1]))):
                lines.append(f"{name}({u},{v}) {m}")
        return "\n".join(lines) + ("\n" if lines else "")


def bag_union(a: BagInterpretation, b: BagInterpretation) -> BagInterpretation:
    """Pointwise-max union of two interpretations over a shared domain."""
    concepts: dict[str, dict[Element, int]] = {}
    for src in (a.concepts, b.concepts):
        for name, ext in src.items():
            dst = concepts.setdefault(name, {})
            for el, m in ext.items():
                dst[el] = max(dst.get(el, 0), m)
    roles: dict[str, dict[tuple[Element, Element], int]] = {}
    for src in (a.roles, b.roles):
        for name, ext in src.items():
            dst = roles.setdefault(name, {})
            for pair, m in ext.items():
                dst[pair] = max(dst.get(pair, 0), m)
    return BagInterpretation(a.domain | b.domain, concepts, roles)


def interpretation_from_abox(abox: BagABox) -> BagInterpretation:
    """Stage 0: assertions become extensions over the named individuals."""
    domain = {Named(name) for name in abox.individuals()}
    concepts: dict[str, dict[Element, int]] = {}
    roles: dict[str, dict[tuple[Element, Element], int]] = {}
    for assertion, m in abox.items():
        if isinstance(assertion, ConceptAssertion):
            concepts.setdefault(assertion.concept, {})[Named(assertion.individual)] = m
        else:
            pair = (Named(assertion.subject), Named(assertion.object))
            roles.setdefault(assertion.role, {})[pair] = m
    return BagInterpretation(domain, concepts, roles)


def concept_closure(i: BagInterpretation, u: Element, tbox: TBox) -> dict[Concept, int]:
    """Max multiplicity forced at u for every concept, via entailed subsumees."""
    seeds: dict[Concept, int] = {}
    for name, ext in i.concepts.items():
        m = ext.get(u, 0)
        if m:
            seeds[AtomicConcept(name)] = m
    for name in i.roles:
        for role in (Role(name), Role(name, True)):
            m = i.exists_mult(role, u)
            if m:
                seeds[ExistsRole(role)] = m
    closure: dict[Concept, int] = {}
    for c0, m in seeds.items():
        for c in tbox.concepts_entailed_by(c0):
            if closure.get(c, 0) < m:
                closure[c] = m
    return closure


def _step(prev: BagInterpretation, tbox: TBox, process) -> tuple[BagInterpretation, list]:
    domain = set(prev.domain)
    concepts: dict[str, dict[Element, int]] = {
        name: dict(ext) for name, ext in prev.concepts.items()
    }
    roles = {name: dict(ext) for name, ext in prev.roles.items()}
    born: list[Element] = []
    for u in sorted(process, key=element_key):
        closure = concept_closure(prev, u, tbox)
        for c, m in closure.items():
            if isinstance(c, AtomicConcept):
                concepts.setdefault(c.name, {})[u] = m
                continue
            role = c.role
            deficit = m - prev.exists_mult(role, u)
            for j in range(1, deficit + 1):
                w = Anon(u, role, j)
                if w in domain:  # stabilization argument makes this unreachable
                    raise AssertionError(f"witness {w} created twice")
                domain.add(w)
                born.append(w)
                ext = roles.setdefault(role.name, {})
                ext[(w, u) if role.inverted else (u, w)] = 1
    return BagInterpretation(domain, concepts, roles), born


def chase_step(prev: BagInterpretation, tbox: TBox) -> BagInterpretation:
    """One stage of the canonical construction over the previous stage."""
    if tbox.kind != CORE:
        raise UnsupportedTBoxKind("the canonical bag model is defined for core TBoxes")
    return _step(prev, tbox, prev.domain)[0]


@dataclass(frozen=True)
class ChaseResult:
    stages: tuple[BagInterpretation, ...]
    depth: int

    @property
    def union(self) -> BagInterpretation:
        # Stages grow monotonically, so their bag union is the last stage.
        return self.stages[-1]


def chase(k: BagOntology, depth: int) -> ChaseResult:
    """Stages 0..depth of the canonical bag model of a satisfiable ontology."""
    if k.tbox.kind != CORE:
        raise UnsupportedTBoxKind("the canonical bag model is defined for core TBoxes")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if not is_satisfiable(k):
        raise UnsatisfiableOntology("the ontology has no bag model")
    stages = [interpretation_from_abox(k.abox)]
    # After its first processing step an element is saturated (its closure
    # and role deficits never change again), so later steps only need to
    # process the elements born in the previous one.
    frontier = None
    for _ in range(depth):
        nxt, frontier = _step(
            stages[-1], k.tbox,
            stages[-1].domain if frontier is None else frontier,
        )
        stages.append(nxt)
    return ChaseResult(tuple(stages), depth)


def required_depth(q: CQ) -> int:
    """Concept/role atom count (with repetitions): a lossless chase depth for rooted q."""
    return sum(1 for a in q.atoms if isinstance(a, (ConceptAtom, RoleAtom)))


def dump_chase(result: ChaseResult) -> str:
    return f"# depth={result.depth}\n" + result.union.to_text()
