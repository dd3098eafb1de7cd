import itertools

import pytest

from pcsplab.polymorphisms import PolyTable, dictator, enumerate_polymorphisms
from pcsplab.properties import (
    PROPERTY_CATALOG,
    SELECTOR_CATALOG,
    check_property,
    chromatic_number,
    compute_Ef,
    kneser_graph,
    properties_for_template,
    selector_rule,
    verify_selector,
)
from pcsplab.structures import TemplatePair, named_template


def pair(src, tgt):
    return TemplatePair(named_template(src), named_template(tgt))


def test_compute_Ef_dictator():
    template = pair("1in3", "T1")
    d1 = dictator(4, 1, 3)
    e, i = compute_Ef(d1)
    assert sorted(e.members) == [1]
    assert sorted(i.members) == [2, 3, 4]


def test_compute_Ef_all_zero_singletons():
    f = PolyTable(3, 3, (0, 0, 0, 1, 0, 1, 1, 1))  # singleton masks 1, 2, 4 all zero
    e, _ = compute_Ef(f)
    assert e.members == frozenset()


def test_compute_Ef_requires_three_colors():
    with pytest.raises(ValueError):
        compute_Ef(dictator(3, 1))


def test_Ef_odd_for_enumerated_t1_polymorphisms():
    template = pair("1in3", "T1")
    for table in enumerate_polymorphisms(template, 3):
        if table.values[0] == 0:
            e, _ = compute_Ef(table)
            assert len(e.members) % 2 == 1


def test_kneser_graph_petersen():
    g = kneser_graph(5, 2)
    assert len(g.vertices) == 10
    assert g.edge_count == 15


def test_kneser_graph_matching_and_point():
    g = kneser_graph(6, 3)  # perfect matching on 20 vertices
    assert len(g.vertices) == 20
    assert all(len(nb) == 1 for nb in g.adjacency)
    point = kneser_graph(3, 3)
    assert len(point.vertices) == 1 and point.edge_count == 0


def test_kneser_graph_bad_parameters():
    with pytest.raises(ValueError):
        kneser_graph(2, 3)
    with pytest.raises(ValueError):
        kneser_graph(3, 0)


def test_chromatic_number_examples():
    assert chromatic_number(kneser_graph(5, 2), 5) == 3
    assert chromatic_number([[], [], []], 5) == 1  # edgeless
    assert chromatic_number(kneser_graph(6, 2), 6) == 4
    assert chromatic_number(kneser_graph(6, 2), 3) is None


def test_property_catalog_complete():
    assert len(PROPERTY_CATALOG) == 15
    assert sorted(properties_for_template("D2plus")) == [
        "D2_singleton", "D2_small02", "D2_successor", "D2_unions"
    ]
    assert len(properties_for_template("T1")) == 6
    assert len(properties_for_template("CH")) == 3
    assert len(properties_for_template("D1plus")) == 2


def test_all_properties_hold_at_arity_three():
    for pid, spec in PROPERTY_CATALOG.items():
        template = pair("1in3", spec.template_name)
        report = check_property(template, pid, 3, template_label=spec.template_name)
        assert report.holds, (pid, report.counterexamples[:1])
        assert report.examined > 0


def test_property_sanity_on_projection_minion():
    report = check_property(pair("1in3", "1in3"), "D1_no_disjoint", 3)
    assert report.holds


def test_property_counterexample_reporting_and_reverification():
    # the no-disjoint fact is specific to its home template: against the
    # not-all-equal target it fails and every witness must re-verify
    report = check_property(pair("1in3", "NAE"), "D1_no_disjoint", 3)
    assert not report.holds
    for ce in report.counterexamples:
        tag, color, x, y = ce.witness
        assert tag == "disjoint-sets"
        assert x & y == 0
        assert ce.table.values[x] == color and ce.table.values[y] == color


def test_unknown_property_id():
    with pytest.raises(KeyError):
        check_property(pair("1in3", "T1"), "NOSUCH", 2)


def test_report_json_shape():
    report = check_property(pair("1in3", "D2plus"), "D2_unions", 2)
    data = report.to_dict()
    assert data["property"] == "D2_unions"
    assert data["examined"] == report.examined
    assert data["counterexamples"] == []


def test_selector_catalog_parameters():
    params = {(s.name, s.k, s.l) for s in SELECTOR_CATALOG.values()}
    assert params == {("SEL_D1", 3, 2), ("SEL_D2", 2, 5), ("SEL_T1", 5, 2), ("SEL_CH", 2, 5)}


def test_selector_rules_total_and_bounded():
    for spec in SELECTOR_CATALOG.values():
        template = pair("1in3", spec.template_name)
        for n in (1, 2, 3):
            for table in enumerate_polymorphisms(template, n):
                chosen = selector_rule(spec, table)
                assert chosen is not None
                assert len(chosen.members) <= spec.k


def test_selector_d1_tie_breaking():
    # prefers a 2-set over a 1-set, then smaller, then lexicographic
    spec = SELECTOR_CATALOG["SEL_D1"]
    template = pair("1in3", "D1plus")
    for table in enumerate_polymorphisms(template, 3):
        chosen = selector_rule(spec, table)
        mask = chosen.mask
        if table.values[mask] == 1:
            assert all(table.values[m] != 2 for m in range(8) if bin(m).count("1") <= 3)


def test_verify_selectors_hold_at_arity_two():
    for spec in SELECTOR_CATALOG.values():
        template = pair("1in3", spec.template_name)
        report = verify_selector(template, spec, 2)
        assert report.holds, (spec.name, report.violations[:1])
        assert report.states_explored > 0


def test_verify_selector_report_shape():
    spec = SELECTOR_CATALOG["SEL_T1"]
    report = verify_selector(pair("1in3", "T1"), spec, 2)
    data = report.to_dict()
    assert data["selector"] == "SEL_T1"
    assert data["violations"] == []
    assert data["chain_length"] == 2


def test_subunion_disjointness_is_needed():
    # the stated fact without disjointness has an arity-2 counterexample;
    # keep it on record so the hypothesis is not dropped by accident
    values = (0, 0, 2, 1)  # f(empty)=0, f({1})=0, f({2})=2, f({1,2})=1
    table = PolyTable(2, 3, values)
    template = pair("1in3", "T1")
    from pcsplab.polymorphisms import is_polymorphism

    assert is_polymorphism(table, template)
    x = y = 3  # the overlapping pair {1,2},{1,2}
    z = 2
    assert table.values[x] == 1 and table.values[y] == 1
    assert z & ~(x | y) == 0 and table.values[z] == 2
    # the catalog predicate (disjoint pairs only) accepts this table
    assert PROPERTY_CATALOG["T1_subunion"].predicate(values, 2) is None


def test_verify_selector_detects_bad_rules():
    from pcsplab.properties import SelectorSpec, verify_selector

    template = pair("1in3", "T1")
    # an empty selection can never intersect anything: every chain violates
    empty_rule = SelectorSpec("SEL_EMPTY", 1, 2, "T1", "always empty", lambda f, n: 0)
    report = verify_selector(template, empty_rule, 2)
    assert not report.holds and report.violations

    # a partial rule is reported as a totality failure
    partial_rule = SelectorSpec(
        "SEL_PARTIAL", 1, 2, "T1", "undefined on arity 2",
        lambda f, n: None if n == 2 else 1,
    )
    report = verify_selector(template, partial_rule, 2)
    assert report.totality_failures

    # an oversized selection is flagged against the bound
    big_rule = SelectorSpec("SEL_BIG", 1, 2, "T1", "whole coordinate set", lambda f, n: (1 << n) - 1)
    report = verify_selector(template, big_rule, 2)
    assert report.bound_failures
