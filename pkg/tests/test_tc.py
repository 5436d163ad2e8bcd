from __future__ import annotations

import dataclasses
import logging

import pytest

from braidscape.arcs import CASE_2A, CASE_2B_EVEN, CASE_2B_ODD, CASE_STATEMENT1
from braidscape.cell_complex import critical_cells
from braidscape.cohomology import search_disjoint_critical_pair
from braidscape.errors import ArcSearchCapExceededError, CertificateInconsistentError
from braidscape.models import TcCertificateDocument
from braidscape.settings import BraidscapeLimits
from braidscape.tree import build_tree, order_vertices, subdivide_for
from braidscape.tc import (
    CASE_INTERVAL,
    CASE_TRIVIAL,
    DETERMINED,
    NOT_APPLICABLE,
    ReasonCode,
    certificate_from_tc_document,
    decide_tc,
    gap,
    tc_profile,
    verify_certificate,
)


def test_single_point_is_trivial(y_tree):
    cert = decide_tc(y_tree, 1)

    assert cert.status == DETERMINED
    assert (cert.value, cert.case) == (1, CASE_TRIVIAL)
    assert verify_certificate(cert).ok


def test_interval_has_value_one_and_ordered_caveat(make_path, caplog):
    with caplog.at_level(logging.WARNING, logger="braidscape.tree"):
        cert = decide_tc(make_path(3), 2)

    assert (cert.value, cert.case) == (1, CASE_INTERVAL)
    assert cert.applies_to == ("unordered",)
    assert cert.ordered_caveat is ReasonCode.CONNECTIVITY_FAILURE
    assert "disconnected" in caplog.text


def test_y_tree_gap_at_two_points(y_tree):
    cert = decide_tc(y_tree, 2)

    assert cert.status == NOT_APPLICABLE
    assert cert.value is None
    assert cert.reason is ReasonCode.BELOW_STATEMENT1_THRESHOLD
    assert cert.diagnostics["k"] == 1
    assert cert.diagnostics["threshold"] == 3
    assert cert.top_dimension == 1


@pytest.mark.parametrize("n", [3, 4])
def test_y_tree_statement1(y_tree, n):
    cert = decide_tc(y_tree, n)

    assert cert.determined
    assert (cert.value, cert.case) == (3, CASE_STATEMENT1)
    assert cert.applies_to == ("unordered", "ordered")
    assert cert.ordered_caveat is None


@pytest.mark.parametrize(
    ("n", "value", "case"),
    [(2, 3, CASE_2A), (3, 3, CASE_2A), (5, 5, CASE_STATEMENT1), (6, 5, CASE_STATEMENT1), (7, 5, CASE_STATEMENT1)],
)
def test_h_tree_values(h_tree, n, value, case):
    cert = decide_tc(h_tree, n)

    assert (cert.value, cert.case) == (value, case)
    assert len(cert.phi_factors) == len(cert.psi_factors) == cert.top_dimension
    assert not set(cert.phi_factors) & set(cert.psi_factors)


def test_h_tree_four_points_is_undetermined(h_tree):
    cert = decide_tc(h_tree, 4)

    assert cert.status == NOT_APPLICABLE
    assert cert.reason is ReasonCode.BELOW_STATEMENT1_THRESHOLD
    assert cert.phi is None


@pytest.mark.parametrize("n", [2, 3])
def test_high_degree_star_needs_no_arcs(make_star, n):
    cert = decide_tc(make_star(4), n)

    assert (cert.value, cert.case) == (3, CASE_STATEMENT1)
    assert cert.arc_certificate.k == 0


def test_caterpillar_even_case(make_caterpillar):
    cert = decide_tc(make_caterpillar(4), 6)

    assert (cert.value, cert.case) == (7, CASE_2B_EVEN)
    assert cert.arc_certificate.k == 1
    assert cert.arc_certificate.r_prime == 0
    assert verify_certificate(cert).ok


def test_caterpillar_odd_case(make_caterpillar):
    cert = decide_tc(make_caterpillar(3), 5)

    assert (cert.value, cert.case) == (5, CASE_2B_ODD)
    assert cert.arc_certificate.initial_arc is not None


def test_caterpillar_gap_below_threshold(make_caterpillar):
    assert decide_tc(make_caterpillar(3), 6).reason is ReasonCode.BELOW_STATEMENT1_THRESHOLD
    assert decide_tc(make_caterpillar(4), 8).status == NOT_APPLICABLE


def test_profile_and_gap(h_tree):
    profile = tc_profile(h_tree, range(2, 6))

    assert [c.n for c in profile] == [2, 3, 4, 5]
    assert gap(profile) == [4]


def test_decide_rejects_zero_points(y_tree):
    with pytest.raises(ValueError):
        decide_tc(y_tree, 0)


def test_arc_search_cap_propagates(make_caterpillar):
    with pytest.raises(ArcSearchCapExceededError):
        decide_tc(make_caterpillar(4), 6, limits=BraidscapeLimits(max_arc_collections=1))


def test_verify_detects_wrong_value(h_tree):
    cert = decide_tc(h_tree, 2)

    report = verify_certificate(dataclasses.replace(cert, value=7))

    assert not report.ok
    assert report.failure.startswith("value")
    assert report.checks["top_dimension"]


def test_verify_detects_shared_factors(h_tree):
    cert = decide_tc(h_tree, 2)

    report = verify_certificate(dataclasses.replace(cert, psi=cert.phi, psi_factors=cert.phi_factors))

    assert not report.ok
    assert report.failure.startswith("factors_distinct")
    assert "zero_divisor_product" not in report.checks


def test_verify_rejects_undetermined(h_tree):
    report = verify_certificate(decide_tc(h_tree, 4))

    assert not report.ok
    assert report.checks == {"status": False}


def test_certificate_document_verifies_independently(h_tree):
    cert = decide_tc(h_tree, 5)
    text = cert.to_document().model_dump_json()

    rebuilt = certificate_from_tc_document(TcCertificateDocument.model_validate_json(text))

    assert rebuilt == cert
    assert verify_certificate(rebuilt).ok


def test_certificate_document_needs_tree(h_tree):
    document = decide_tc(h_tree, 2).to_document().model_copy(update={"tree": None})

    with pytest.raises(CertificateInconsistentError):
        certificate_from_tc_document(document)


def test_certificate_document_with_foreign_cell(h_tree):
    document = decide_tc(h_tree, 2).to_document()
    document.phi.members[0] = "v:nowhere"

    with pytest.raises(CertificateInconsistentError):
        certificate_from_tc_document(document)


SPLIT_TREE = build_tree(
    {
        "b": ["n0"],
        "n0": ["b", "n1", "l0_0"],
        "l0_0": ["n0"],
        "n1": ["n0", "l1_0", "l1_1"],
        "l1_0": ["n1"],
        "l1_1": ["n1"],
    },
    "b",
)


@pytest.mark.parametrize("n", [5, 6])
def test_statement1_when_mixed_bounds_lack_critical_cells(n):
    cert = decide_tc(SPLIT_TREE, n)

    assert (cert.value, cert.case) == (5, CASE_STATEMENT1)
    assert verify_certificate(cert).ok


@pytest.mark.parametrize("n", [4, 5])
def test_high_degree_star_beyond_threshold(make_star, n):
    cert = decide_tc(make_star(4), n)

    assert (cert.value, cert.case) == (3, CASE_STATEMENT1)
    assert verify_certificate(cert).ok


@pytest.mark.parametrize("m", [2, 3, 4])
def test_caterpillar_gap_is_contiguous(make_caterpillar, m):
    tree = make_caterpillar(m)

    profile = tc_profile(tree, range(2, 2 * m + 2))

    assert gap(profile) == [2 * m]
    for cert in profile:
        if cert.n != 2 * m:
            assert cert.value == 2 * cert.top_dimension + 1


@pytest.mark.parametrize("m", [2, 3, 4])
def test_pair_search_cannot_close_the_caterpillar_gap(make_caterpillar, m):
    order = order_vertices(subdivide_for(make_caterpillar(m), 2 * m))

    assert len(critical_cells(order, 2 * m, m)) == 1
    assert search_disjoint_critical_pair(order, 2 * m, m) is None


@pytest.mark.parametrize(("tree_name", "n"), [("y", 3), ("h", 2), ("h", 5), ("star", 3)])
def test_presubdivided_tree_gives_same_answer(y_tree, h_tree, make_star, tree_name, n):
    tree = {"y": y_tree, "h": h_tree, "star": make_star(4)}[tree_name]

    plain = decide_tc(tree, n)
    for extra in (0, 2):
        subdivided = decide_tc(subdivide_for(tree, n + extra), n)
        assert (subdivided.status, subdivided.value, subdivided.case) == (plain.status, plain.value, plain.case)
        assert subdivided.top_dimension == plain.top_dimension


@pytest.mark.parametrize("seed", range(12))
def test_random_trees_decide_cleanly(make_random_tree, seed):
    tree = make_random_tree(seed, 6)

    for n in range(2, 6):
        cert = decide_tc(tree, n)

        if cert.determined:
            assert verify_certificate(cert).ok
            assert cert.value == 2 * cert.top_dimension + 1
        else:
            assert cert.reason is not None
