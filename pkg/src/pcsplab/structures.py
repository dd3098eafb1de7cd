"""Finite relational structures and the named template catalog.

A structure is a finite domain {0, ..., k-1} together with an ordered list of
nonempty relations.  The workhorse here is a single ternary relation on a
small domain; the catalog below fixes one concrete vertex labelling for every
named template (the labelling is irrelevant up to homomorphic equivalence,
but fixing it keeps all output reproducible).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import FormatError, SignatureMismatchError


@dataclass(frozen=True)
class Relation:
    """A nonempty set of same-arity tuples, stored sorted for determinism."""

    arity: int
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"relation arity must be >= 1, got {self.arity}")
        if not self.tuples:
            raise ValueError("relation must be nonempty")
        canon = tuple(sorted(set(self.tuples)))
        if canon != self.tuples:
            object.__setattr__(self, "tuples", canon)
        for t in self.tuples:
            if len(t) != self.arity:
                raise ValueError(f"tuple {t} does not have arity {self.arity}")

    @cached_property
    def as_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.tuples)

    def is_symmetric(self) -> bool:
        s = self.as_set
        return all(p in s for t in self.tuples for p in itertools.permutations(t))


@dataclass(frozen=True)
class RelStructure:
    """A finite domain 0..domain_size-1 with an ordered list of relations."""

    domain_size: int
    relations: tuple[Relation, ...]

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError(f"domain size must be >= 1, got {self.domain_size}")
        if not isinstance(self.relations, tuple):
            object.__setattr__(self, "relations", tuple(self.relations))
        for rel in self.relations:
            for t in rel.tuples:
                for x in t:
                    if not 0 <= x < self.domain_size:
                        raise ValueError(f"tuple entry {x} outside domain 0..{self.domain_size - 1}")

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(rel.arity for rel in self.relations)

    def is_symmetric(self) -> bool:
        return all(rel.is_symmetric() for rel in self.relations)

    def single_ternary(self) -> Relation:
        if self.signature != (3,):
            raise SignatureMismatchError(f"expected a single ternary relation, signature is {self.signature}")
        return self.relations[0]

    def encoding(self) -> tuple:
        """Deterministic comparable encoding (used for canonical choices)."""
        return (self.domain_size, tuple((rel.arity, rel.tuples) for rel in self.relations))


@dataclass(frozen=True)
class Digraph:
    """Arc b -> b' recorded whenever (b, b, b') lies in the ternary relation."""

    vertex_count: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self):
        for a, b in self.arcs:
            if not (0 <= a < self.vertex_count and 0 <= b < self.vertex_count):
                raise ValueError(f"arc ({a},{b}) outside vertex range")

    def sorted_arcs(self) -> list[tuple[int, int]]:
        return sorted(self.arcs)

    def has_directed_cycle(self) -> bool:
        adj: dict[int, list[int]] = {v: [] for v in range(self.vertex_count)}
        for a, b in self.arcs:
            adj[a].append(b)
        state = [0] * self.vertex_count

        def visit(v: int) -> bool:
            state[v] = 1
            for w in adj[v]:
                if state[w] == 1 or (state[w] == 0 and visit(w)):
                    return True
            state[v] = 2
            return False

        return any(state[v] == 0 and visit(v) for v in range(self.vertex_count))


def make_structure(domain_size: int, relations) -> RelStructure:
    """Build a validated structure from raw tuple collections.

    Rejects empty relations, out-of-domain entries and arity mismatches
    within a relation.
    """
    rels = []
    for raw in relations:
        tuples = tuple(tuple(t) for t in raw)
        if not tuples:
            raise ValueError("relation must be nonempty")
        arity = len(tuples[0])
        rels.append(Relation(arity, tuples))
    return RelStructure(domain_size, tuple(rels))


def _perm_closure(tuples) -> set[tuple[int, ...]]:
    out: set[tuple[int, ...]] = set()
    for t in tuples:
        out.update(itertools.permutations(t))
    return out


def rainbow_triples(domain_size: int) -> set[tuple[int, int, int]]:
    """All ordered triples with three pairwise distinct entries."""
    return {t for t in itertools.product(range(domain_size), repeat=3) if len(set(t)) == 3}


def ternary_structure(domain_size: int, orbit_tuples) -> RelStructure:
    """Structure with one ternary relation: the symmetric closure of the given tuples."""
    return make_structure(domain_size, [_perm_closure(orbit_tuples)])


def _linear_order_template(k: int) -> RelStructure:
    # two equal entries force the third strictly above them; rainbow always allowed
    tuples = rainbow_triples(k)
    for b in range(k):
        for c in range(b + 1, k):
            tuples |= _perm_closure([(b, b, c)])
    return make_structure(k, [tuples])


def _nae_template(k: int) -> RelStructure:
    tuples = {t for t in itertools.product(range(k), repeat=3) if len(set(t)) > 1}
    return make_structure(k, [tuples])


# Fixed vertex labels for the catalog; base names are the smaller of the two
# structures sharing an associated digraph, "<name>plus" adds the rainbow orbit.
_BASE_ORBITS: dict[str, tuple[int, tuple[tuple[int, int, int], ...]]] = {
    "1in3": (2, ((0, 0, 1),)),
    "NAE": (2, ((0, 0, 1), (1, 1, 0))),
    "D1": (3, ((0, 0, 1), (0, 0, 2))),
    "D2": (3, ((0, 0, 1), (1, 1, 2))),
    "T1": (3, ((0, 0, 1), (0, 0, 2), (1, 1, 2))),
    "T2": (3, ((0, 0, 1), (1, 1, 2), (2, 2, 0))),
    "Q1": (3, ((0, 0, 1), (0, 0, 2), (1, 1, 2), (2, 2, 1))),
    "Q2": (3, ((0, 0, 1), (1, 1, 0), (0, 0, 2), (2, 2, 1))),
    "Q3": (3, ((0, 0, 1), (0, 0, 2), (2, 2, 0), (2, 2, 1))),
    "C": (3, ((0, 0, 1), (1, 1, 0), (0, 0, 2), (2, 2, 0), (2, 2, 1))),
    "S": (3, ((0, 0, 1), (1, 1, 0), (0, 0, 2), (2, 2, 0), (1, 1, 2), (2, 2, 1))),
    "CH": (4, ((0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 3, 0))),
}

NAMED_TEMPLATES: tuple[str, ...] = tuple(
    name for base in _BASE_ORBITS for name in (base, base + "plus")
) + ("LO_<k>", "NAE_<k>")


def named_template(name: str, k: int | None = None) -> RelStructure:
    """Return a catalog template by name.

    Accepts the fixed names (1in3, NAE, D1..S, CH and their "plus" variants)
    and the parametric families LO_k and NAE_k, either spelled with the size
    in the name ("LO_3") or passed via ``k``.
    """
    if name.startswith(("LO_", "NAE_")) and k is None:
        prefix, _, suffix = name.partition("_")
        try:
            k = int(suffix)
        except ValueError:
            raise ValueError(f"unknown template name {name!r}") from None
        name = prefix
    if name in ("LO", "NAE") and k is not None:
        if k < 2:
            raise ValueError(f"parametric template {name}_{k}: size must be >= 2")
        return _linear_order_template(k) if name == "LO" else _nae_template(k)
    base = name[:-4] if name.endswith("plus") else name
    if base not in _BASE_ORBITS:
        raise ValueError(f"unknown template name {name!r}")
    size, orbits = _BASE_ORBITS[base]
    structure = ternary_structure(size, orbits)
    if name.endswith("plus"):
        structure = plus_closure(structure)
    return structure


def template_names_3() -> list[str]:
    """The named two- and three-element templates plus their rainbow variants."""
    return [n for base in _BASE_ORBITS if base != "CH" for n in (base, base + "plus")]


def symmetrize(structure: RelStructure) -> RelStructure:
    """Close every relation under coordinate permutations."""
    rels = [Relation(rel.arity, tuple(sorted(_perm_closure(rel.tuples)))) for rel in structure.relations]
    return RelStructure(structure.domain_size, tuple(rels))


def plus_closure(structure: RelStructure) -> RelStructure:
    """Add every rainbow triple to the single ternary relation."""
    rel = structure.single_ternary()
    tuples = set(rel.tuples) | rainbow_triples(structure.domain_size)
    return RelStructure(structure.domain_size, (Relation(3, tuple(sorted(tuples))),))


def associated_digraph(structure: RelStructure) -> Digraph:
    rel = structure.single_ternary().as_set
    arcs = frozenset(
        (b, b2)
        for b in range(structure.domain_size)
        for b2 in range(structure.domain_size)
        if (b, b, b2) in rel
    )
    return Digraph(structure.domain_size, arcs)


def automorphisms(structure: RelStructure) -> list[tuple[int, ...]]:
    """All domain permutations mapping every relation onto itself."""
    out = []
    for perm in itertools.permutations(range(structure.domain_size)):
        ok = True
        for rel in structure.relations:
            image = {tuple(perm[x] for x in t) for t in rel.tuples}
            if image != rel.as_set:
                ok = False
                break
        if ok:
            out.append(perm)
    return out


def automorphism_orbits(structure: RelStructure) -> list[frozenset[int]]:
    """Orbits of the domain under the automorphism group, sorted by minimum."""
    autos = automorphisms(structure)
    seen: set[int] = set()
    orbits = []
    for v in range(structure.domain_size):
        if v in seen:
            continue
        orbit = frozenset(perm[v] for perm in autos)
        seen.update(orbit)
        orbits.append(orbit)
    return orbits


@dataclass(frozen=True)
class TemplatePair:
    """A pair of same-signature structures with source -> target required."""

    source: RelStructure
    target: RelStructure

    def __post_init__(self):
        if self.source.signature != self.target.signature:
            raise SignatureMismatchError(
                f"signatures differ: {self.source.signature} vs {self.target.signature}"
            )
        from .homs import hom_exists

        if not hom_exists(self.source, self.target):
            raise ValueError("invalid template: no homomorphism from source to target")


# --- text format -------------------------------------------------------------
#
#   domain <k>
#   rel <arity>
#   t a b c
#
# one "rel" header per relation followed by its tuple lines; "#" starts a
# comment; symmetric closure is never implicit.


def parse_structure(text: str) -> RelStructure:
    domain_size = None
    relations: list[tuple[int, list[tuple[int, ...]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "domain":
            if domain_size is not None or len(parts) != 2:
                raise FormatError(f"line {lineno}: bad domain header")
            domain_size = int(parts[1])
        elif parts[0] == "rel":
            if domain_size is None or len(parts) != 2:
                raise FormatError(f"line {lineno}: bad rel header")
            relations.append((int(parts[1]), []))
        elif parts[0] == "t":
            if not relations:
                raise FormatError(f"line {lineno}: tuple before any rel header")
            arity, tuples = relations[-1]
            entries = tuple(int(x) for x in parts[1:])
            if len(entries) != arity:
                raise FormatError(f"line {lineno}: expected {arity} entries, got {len(entries)}")
            tuples.append(entries)
        else:
            raise FormatError(f"line {lineno}: unrecognized directive {parts[0]!r}")
    if domain_size is None:
        raise FormatError("missing domain header")
    try:
        return make_structure(domain_size, [tuples for _, tuples in relations])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_structure(structure: RelStructure) -> str:
    lines = [f"domain {structure.domain_size}"]
    for rel in structure.relations:
        lines.append(f"rel {rel.arity}")
        for t in rel.tuples:
            lines.append("t " + " ".join(str(x) for x in t))
    return "\n".join(lines) + "\n"
