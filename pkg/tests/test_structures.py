import itertools
import random

import pytest

from pcsplab.errors import FormatError, SignatureMismatchError
from pcsplab.structures import (
    associated_digraph,
    automorphisms,
    format_structure,
    make_structure,
    named_template,
    parse_structure,
    plus_closure,
    rainbow_triples,
    symmetrize,
    ternary_structure,
)


def perm_closure(tuples):
    return {p for t in tuples for p in itertools.permutations(t)}


def random_ternary(rng, domain_size=3):
    all_tuples = list(itertools.product(range(domain_size), repeat=3))
    while True:
        chosen = [t for t in all_tuples if rng.random() < 0.3]
        if chosen:
            return make_structure(domain_size, [chosen])


def test_make_structure_one_in_three():
    s = make_structure(2, [perm_closure([(0, 0, 1)])])
    assert s.domain_size == 2
    assert s.relations[0].as_set == {(0, 0, 1), (0, 1, 0), (1, 0, 0)}
    assert s == named_template("1in3")


def test_make_structure_smallest():
    s = make_structure(1, [{(0, 0, 0)}])
    assert s.domain_size == 1 and s.relations[0].tuples == ((0, 0, 0),)


def test_make_structure_rejects_empty_relation():
    with pytest.raises(ValueError):
        make_structure(3, [set()])


def test_make_structure_rejects_out_of_domain():
    with pytest.raises(ValueError):
        make_structure(2, [{(0, 0, 2)}])


def test_make_structure_rejects_mixed_arity():
    with pytest.raises(ValueError):
        make_structure(2, [{(0, 0, 1), (0, 1)}])


def test_named_d2plus():
    s = named_template("D2plus")
    expected = perm_closure([(0, 0, 1), (1, 1, 2), (0, 1, 2)])
    assert s.domain_size == 3 and s.relations[0].as_set == expected


def test_named_lo2_equals_one_in_three():
    assert named_template("LO_2") == named_template("1in3")


def test_named_lo3_equals_t1plus():
    assert named_template("LO_3") == named_template("T1plus")


def test_named_ch():
    s = named_template("CH")
    expected = perm_closure([(0, 0, 1), (1, 1, 2), (2, 2, 3), (0, 3, 3)])
    assert s.domain_size == 4 and s.relations[0].as_set == expected


def test_named_nae_k():
    assert named_template("NAE_2") == named_template("NAE")
    nae3 = named_template("NAE_3")
    assert nae3.relations[0].as_set == {
        t for t in itertools.product(range(3), repeat=3) if len(set(t)) > 1
    }


def test_named_unknown_and_bad_k():
    with pytest.raises(ValueError):
        named_template("NOSUCH")
    with pytest.raises(ValueError):
        named_template("LO_1")
    with pytest.raises(ValueError):
        named_template("LO_x")


def test_symmetrize_rainbow_orbit():
    s = make_structure(3, [{(0, 1, 2)}])
    assert symmetrize(s).relations[0].as_set == perm_closure([(0, 1, 2)])


def test_symmetrize_boolean_tuple_gives_one_in_three():
    s = make_structure(2, [{(0, 0, 1)}])
    assert symmetrize(s) == named_template("1in3")


def test_symmetrize_idempotent_and_monotone():
    rng = random.Random(7)
    for _ in range(30):
        s = random_ternary(rng)
        sym = symmetrize(s)
        assert sym.is_symmetric()
        assert symmetrize(sym) == sym
        assert sym.relations[0].as_set >= s.relations[0].as_set


def test_plus_closure_named_pairs():
    assert plus_closure(named_template("D2")) == named_template("D2plus")
    assert plus_closure(named_template("CH")) == named_template("CHplus")


def test_plus_closure_two_element_identity():
    for name in ("1in3", "NAE"):
        s = named_template(name)
        assert plus_closure(s) == s


def test_plus_closure_requires_single_ternary():
    two_rel = make_structure(2, [{(0, 1)}, {(0, 0, 1)}])
    with pytest.raises(SignatureMismatchError):
        plus_closure(two_rel)


def test_plus_closure_preserves_digraph():
    rng = random.Random(11)
    names = ["1in3", "NAE", "D1", "D2", "T1", "T2", "Q1", "Q2", "Q3", "C", "S", "CH"]
    candidates = [named_template(n) for n in names] + [random_ternary(rng) for _ in range(20)]
    for s in candidates:
        assert associated_digraph(plus_closure(s)) == associated_digraph(s)


def test_associated_digraph_values():
    assert associated_digraph(named_template("T2")).sorted_arcs() == [(0, 1), (1, 2), (2, 0)]
    assert associated_digraph(named_template("1in3")).sorted_arcs() == [(0, 1)]
    assert associated_digraph(named_template("CHplus")).sorted_arcs() == [(0, 1), (1, 2), (2, 3), (3, 0)]


def test_automorphisms_examples():
    shifts = {tuple((v + j) % 4 for v in range(4)) for j in range(4)}
    assert set(automorphisms(named_template("CHplus"))) == shifts
    assert automorphisms(named_template("NAE")) == [(0, 1), (1, 0)]
    assert automorphisms(named_template("1in3")) == [(0, 1)]


def test_automorphisms_form_a_group():
    rng = random.Random(13)
    for _ in range(15):
        s = random_ternary(rng)
        autos = set(automorphisms(s))
        identity = tuple(range(s.domain_size))
        assert identity in autos
        for p in autos:
            inverse = tuple(p.index(v) for v in range(s.domain_size))
            assert inverse in autos
            for q in autos:
                assert tuple(p[q[v]] for v in range(s.domain_size)) in autos


def test_exactly_two_structures_per_digraph():
    # on 3 elements, relations built from a digraph's orbits plus optionally
    # the rainbow orbit: only the base structure and its plus variant match
    for name in ("D1", "D2", "T1", "T2", "Q1", "Q2", "Q3", "C", "S"):
        base = named_template(name)
        digraph = associated_digraph(base)
        orbit_tuples = base.relations[0].as_set
        matches = []
        for add_rainbow in (False, True):
            tuples = set(orbit_tuples) | (rainbow_triples(3) if add_rainbow else set())
            candidate = make_structure(3, [tuples])
            if associated_digraph(candidate) == digraph:
                matches.append(candidate)
        assert matches == [base, plus_closure(base)]


def test_ternary_structure_closure():
    s = ternary_structure(4, [(3, 3, 0)])
    assert s.relations[0].as_set == perm_closure([(0, 3, 3)])


def test_text_format_round_trip():
    for name in ("1in3", "D2plus", "CH", "LO_3"):
        s = named_template(name)
        assert parse_structure(format_structure(s)) == s


def test_text_format_comments_and_errors():
    text = "# header\ndomain 2\nrel 3\nt 0 0 1  # a tuple\nt 0 1 0\nt 1 0 0\n"
    assert parse_structure(text) == named_template("1in3")
    with pytest.raises(FormatError):
        parse_structure("rel 3\nt 0 0 1\n")
    with pytest.raises(FormatError):
        parse_structure("domain 2\nrel 3\nt 0 0\n")
    with pytest.raises(FormatError):
        parse_structure("domain 2\nrel 3\n")
    with pytest.raises(FormatError):
        parse_structure("domain 2\nbogus 1\n")
