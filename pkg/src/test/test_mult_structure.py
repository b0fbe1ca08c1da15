# src/test/test_mult_structure.py

import itertools
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.field.field_core import build_field
from src.field.mult_structure import (CharacterRef, coset_of, coset_union_from_elements, make_coset_union,
                                      power_residue_subgroup, psi_audit, psi_indicator, scale_coset_union)
from src.utils.errors import DuplicateExponent, EmptyM, ExponentOutOfRange, IndexNotDividing, LogOfZero


def test_coset_union_sizes_and_membership():
    field = build_field(7, 2)
    D = make_coset_union(field, 6, [0, 3])
    assert D.r == 2
    assert len(D) == 16
    assert D.elements().size == 16
    assert not D.member_mask[0]
    for x in D.elements().tolist():
        assert field.log(x) % 6 in (0, 3)
        assert x in D
    assert 0 not in D


def test_subgroup_is_closed_under_multiplication():
    field = build_field(3, 3)
    H = make_coset_union(field, 2, [0])
    elems = H.elements()
    for x in elems.tolist():
        assert np.all(H.member_mask[field.mul_vec(elems, x)])


def test_power_residue_subgroup_fourth_powers_f25():
    field = build_field(5, 2)
    H = power_residue_subgroup(field, 4)
    fourth = sorted({field.pow(x, 4) for x in range(1, 25)})
    assert H.d == 4
    assert H.elements().tolist() == fourth
    assert len(fourth) == 6


def test_coset_union_from_elements_and_coset_of():
    field = build_field(5, 2)
    D = coset_union_from_elements(field, 6, [field.g, field.pow(field.g, 9)])
    assert D.M == (1, 3)
    assert coset_of(D, field.pow(field.g, 15)) == 3
    with pytest.raises(LogOfZero):
        coset_of(D, 0)


def test_scale_coset_union():
    field = build_field(11, 1)
    D = make_coset_union(field, 5, [1, 2])
    scaled = scale_coset_union(D, field.g)
    assert scaled.M == (0, 1)
    for x in D.elements().tolist():
        assert field.div(x, field.g) in scaled


def test_scaling_round_trip():
    field = build_field(5, 2)
    D = make_coset_union(field, 6, [2, 3, 4])
    for c in range(1, field.q):
        assert scale_coset_union(scale_coset_union(D, c), field.inv(c)) == D


@pytest.mark.parametrize("p,n", [(7, 2), (2, 4), (13, 1)])
def test_cosets_partition_the_multiplicative_group(p, n):
    field = build_field(p, n)
    for d in [d for d in range(1, field.q) if (field.q - 1) % d == 0]:
        masks = [make_coset_union(field, d, [m]).member_mask for m in range(d)]
        for mask in masks:
            assert mask.sum() == (field.q - 1) // d
        cover = np.sum(masks, axis=0)
        assert cover[0] == 0
        assert np.all(cover[1:] == 1)
        H = make_coset_union(field, d, [0])
        classes = np.array([coset_of(H, x) for x in range(1, field.q)])
        assert np.bincount(classes, minlength=d).tolist() == [(field.q - 1) // d] * d


def test_construction_errors():
    field = build_field(7, 1)
    with pytest.raises(IndexNotDividing):
        make_coset_union(field, 4, [0])
    with pytest.raises(EmptyM):
        make_coset_union(field, 3, [])
    with pytest.raises(ExponentOutOfRange):
        make_coset_union(field, 3, [3])
    with pytest.raises(DuplicateExponent):
        make_coset_union(field, 3, [1, 1])
    with pytest.raises(IndexNotDividing):
        coset_union_from_elements(field, 0, [1, 3])
    with pytest.raises(IndexNotDividing):
        coset_union_from_elements(field, 4, [1])


def test_character_is_multiplicative():
    field = build_field(13, 1)
    chi = CharacterRef(field, 4, 1)
    assert chi(field.g) == pytest.approx(1j)
    assert chi(0) == 0
    for x in range(1, 13):
        for y in range(1, 13):
            assert chi(field.mul(x, y)) == pytest.approx(chi(x) * chi(y))
    assert chi.exponent_vec([0, 1]).tolist() == [-1, 0]
    assert CharacterRef(field, 4, 2).is_trivial_on(field.pow(field.g, 2))


@pytest.mark.parametrize("p,n", [(5, 1), (7, 1), (3, 2), (13, 1), (5, 2)])
def test_psi_matches_membership_for_all_m(p, n):
    field = build_field(p, n)
    for d in [d for d in range(1, field.q) if (field.q - 1) % d == 0 and d <= 8]:
        for size in range(1, d + 1):
            for M in itertools.combinations(range(d), size):
                D = make_coset_union(field, d, M)
                frame = psi_audit(D)
                assert frame["agrees"].all()


def test_psi_indicator_pointwise():
    field = build_field(5, 2)
    D = make_coset_union(field, 6, [1, 4])
    for x in range(1, 25):
        value = psi_indicator(D, x)
        assert abs(value - (1.0 if x in D else 0.0)) < 1e-9
    with pytest.raises(LogOfZero):
        psi_indicator(D, 0)
