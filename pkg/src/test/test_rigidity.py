# src/test/test_rigidity.py

import os
import sys
from fractions import Fraction

import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.directions.directions import directions_of_additive
from src.field.field_core import build_field
from src.field.mult_structure import make_coset_union
from src.rigidity.example import in_u_basis, reproduce_f25_example, sqrt_of_two
from src.rigidity.search import (check_corollary_bound, check_lbp, check_p_bound, enumerate_additive_in_D,
                                 enumerate_additive_in_D_naive, find_exceptional_examples, frobenius_orbit_key,
                                 p_bound_threshold, run_directions_bruteforce, scan_bound_margin,
                                 verify_thm_directions_bruteforce, verify_thm_main)
from src.utils.errors import ParamOutOfRange, SearchSpaceTooLarge, ZeroInD


@pytest.mark.parametrize("p,n,d,r,expected", [
    (37, 2, 2, 1, True),
    (23, 2, 3, 1, True),
    (83, 2, 7, 3, True),
    (5, 2, 6, 3, False),
    (79, 2, 7, 3, False),
])
def test_check_p_bound(p, n, d, r, expected):
    assert check_p_bound(p, n, d, r) is expected


def test_bound_parameter_errors():
    with pytest.raises(ParamOutOfRange):
        check_p_bound(37, 1, 2, 1)
    with pytest.raises(ParamOutOfRange):
        check_p_bound(37, 2, 2, 2)
    with pytest.raises(ParamOutOfRange):
        check_p_bound(37, 2, 1, 1)


def test_threshold_and_corollary_bounds():
    assert p_bound_threshold(2, 2, 1) == Fraction(36)
    assert check_corollary_bound(36, 2, 2)
    assert not check_corollary_bound(35, 2, 2)
    # 49 * 4 = 196 for the clique bound with n = 2, d = 2, r = 1
    assert check_lbp(196, 2, 2, 1)
    assert not check_lbp(195, 2, 2, 1)


def test_whole_group_keeps_every_injective_map():
    field = build_field(3, 2)
    D = make_coset_union(field, 1, [0])
    assert len(enumerate_additive_in_D(D)) == 48


def test_whole_group_f25():
    field = build_field(5, 2)
    D = make_coset_union(field, 1, [0])
    assert len(enumerate_additive_in_D(D)) == 480


def test_squares_only_keep_frobenius_maps():
    field = build_field(5, 2)
    D = make_coset_union(field, 2, [0])
    maps = enumerate_additive_in_D(D)
    assert len(maps) == 24
    assert all(L.frobenius_witness() is not None for L in maps)
    for L in maps:
        assert directions_of_additive(L).issubset(D)


@pytest.mark.parametrize("p,n,d,M", [(3, 2, 4, (0, 1)), (5, 2, 6, (0, 1, 4)), (2, 3, 7, (0, 1, 3)), (7, 1, 3, (1,))])
def test_search_matches_naive_filter(p, n, d, M):
    field = build_field(p, n)
    D = make_coset_union(field, d, M)
    fast = [L.coeffs for L in enumerate_additive_in_D(D)]
    slow = [L.coeffs for L in enumerate_additive_in_D_naive(D)]
    assert fast == slow


def test_search_with_workers_matches_serial():
    field = build_field(5, 2)
    D = make_coset_union(field, 6, [0, 1, 4])
    serial = [L.coeffs for L in enumerate_additive_in_D(D)]
    parallel = [L.coeffs for L in enumerate_additive_in_D(D, jobs=3)]
    assert serial == parallel


def test_search_caps():
    field = build_field(5, 2)
    D = make_coset_union(field, 2, [0])
    with pytest.raises(SearchSpaceTooLarge):
        enumerate_additive_in_D(D, search_cap=100)


def test_zero_in_D_is_rejected():
    D = make_coset_union(build_field(5, 1), 1, [0])
    with pytest.raises(ZeroInD):
        enumerate_additive_in_D(_ZeroD(D))


class _ZeroD:
    """A coset union whose mask wrongly admits 0."""

    def __init__(self, D):
        self.field = D.field
        self.d = D.d
        self.M = D.M
        mask = D.member_mask.copy()
        mask[0] = True
        self.member_mask = mask


def test_verify_small_instance_without_violations():
    report = verify_thm_main(23, 2, 3, [0])
    assert report.p_bound
    assert report.violations == []
    assert report.exceptional_count == 0
    assert report.survivor_count == report.frobenius_count
    assert report.d_size == 176


def test_verify_reports_exceptions_below_bound_as_data():
    example = reproduce_f25_example()
    report = verify_thm_main(5, 2, example.d, example.M)
    assert report.p_bound is False
    assert report.exceptional_count > 0
    assert report.survivor_count == report.frobenius_count + report.exceptional_count
    assert report.violations == []


@pytest.mark.parametrize("p,n,d,small,large", [
    (5, 2, 6, (0, 1), (0, 1, 4)),
    (5, 2, 6, (2, 3, 4), (2, 3, 4, 5)),
    (3, 2, 4, (0,), (0, 1)),
])
def test_survivors_grow_with_D(p, n, d, small, large):
    field = build_field(p, n)
    D1 = make_coset_union(field, d, small)
    D2 = make_coset_union(field, d, large)
    assert D1.is_subset(D2)
    inner = {L.coeffs for L in enumerate_additive_in_D(D1)}
    outer = {L.coeffs for L in enumerate_additive_in_D(D2)}
    assert inner <= outer


def test_verify_report_is_deterministic():
    first = verify_thm_main(5, 2, 6, [2, 3, 4])
    second = verify_thm_main(5, 2, 6, [2, 3, 4], jobs=2)
    assert first.model_dump_json(exclude={"elapsed_seconds"}) == second.model_dump_json(exclude={"elapsed_seconds"})


def test_directions_bruteforce_small_q():
    report = run_directions_bruteforce(5)
    assert report.small_direction_count == 5
    assert report.additive_count == 5
    assert report.violations == 0
    assert verify_thm_directions_bruteforce(4) == 0
    with pytest.raises(SearchSpaceTooLarge):
        run_directions_bruteforce(11)
    with pytest.raises(ParamOutOfRange):
        run_directions_bruteforce(6)


def test_f25_example():
    report = reproduce_f25_example()
    assert report.u == 10
    assert report.fourth_powers_match
    assert report.directions_match
    assert report.directions_in_D
    assert report.frobenius_witness is None
    assert report.additive
    assert report.triple_quotient_size == 24
    assert not report.p_bound
    assert report.violations == []
    assert sorted(report.directions_labels) == sorted(["2u", "3u", "1+u", "1+4u", "2+2u", "2+3u"])


def test_u_basis_helpers():
    field = build_field(5, 2)
    u = sqrt_of_two(field)
    assert in_u_basis(field, u, 1) == "1"
    assert in_u_basis(field, u, field.add(1, u)) == "1+u"


def test_exceptional_search_finds_f25_example():
    examples = find_exceptional_examples(5, 2, [6], 3)
    field = build_field(5, 2)
    found = {(e.f.coeffs, e.D.M) for e in examples}
    # x + u x^5 normalized by f(1) = 1 + u
    f1 = field.add(1, 10)
    c0 = field.div(1, f1)
    c1 = field.div(10, f1)
    assert any(coeffs == (c0, c1) for coeffs, _ in found)
    for e in examples:
        assert e.f.frobenius_witness() is None
        assert e.D.r <= 3
        assert e.f(1) == 1
        assert e.frobenius_orbit == frobenius_orbit_key(e.f)


def test_scan_bound_margin_lists_small_primes():
    scan = scan_bound_margin(2, 6, 3, [5, 7, 11])
    assert 5 in scan.primes_with_exceptions
    assert scan.exceptions_above_threshold == []
    assert scan.threshold == pytest.approx(108.0)


@pytest.mark.parametrize("p,n,d,r", [(37, 2, 2, 1), (23, 2, 3, 1)])
def test_no_exceptional_examples_above_the_bound(p, n, d, r):
    assert check_p_bound(p, n, d, r)
    assert find_exceptional_examples(p, n, [d], r) == []


def test_exceptional_examples_have_few_directions():
    # d = 1 puts every direction set inside D, so only the direction count filters
    examples = find_exceptional_examples(3, 3, [1], 1)
    for e in examples:
        assert 2 * e.direction_count <= 27 + 1
        assert e.direction_count == len(directions_of_additive(e.f))
