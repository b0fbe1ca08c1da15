# src/test/test_charsum.py

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.charsum.audit import (FAIL, NOT_APPLICABLE, PASS, WeilInstance, audit_field_coverage, audits_frame,
                               autocorrelation,
                               counts_value, cyclotomic_is_zero, exact_abs_squared_le, exponent_counts,
                               indicator_decomposition, quotient_sum_cor22, rou_exhaustive, rou_l1_audit,
                               run_audit_batch, span_elements, subfield_quotient_sum_cor23, subspace_generator,
                               weil_pair_sum)
from src.field.field_core import build_field
from src.field.mult_structure import CharacterRef, make_coset_union
from src.utils.errors import DegenerateInput, EmptyM, HypothesisViolated, PreconditionViolated


def _direct_pair_sum(inst):
    field = inst.field
    ch1 = CharacterRef(field, inst.d, inst.j1)
    ch2 = CharacterRef(field, inst.d, inst.j2)
    return sum(ch1(field.sub(lam, inst.xi1)) * ch2(field.sub(lam, inst.xi2)) for lam in range(field.p))


def test_exponent_counts_and_value():
    counts = exponent_counts(np.array([0, 1, 1, -1, 3]), 4)
    assert counts.tolist() == [1, 2, 0, 1]
    assert counts_value(counts) == pytest.approx(1 + 2j - 1j)


def test_cyclotomic_helpers():
    # 1 + theta + theta^2 = 0 for a primitive cube root
    assert cyclotomic_is_zero([1, 1, 1], 3)
    assert not cyclotomic_is_zero([1, 1, 0], 3)
    counts = np.array([2, 0, 1, 0])
    A = autocorrelation(counts)
    assert A[0] == 5
    # |2 + theta^2|^2 = |2 - 1|^2 = 1 for d = 4
    assert exact_abs_squared_le(counts, 1)
    assert not exact_abs_squared_le(counts, 0)


def test_weil_pair_sum_matches_direct_sum():
    field = build_field(7, 2)
    inst = WeilInstance(field, field.g, field.pow(field.g, 5), 8, 1, 3)
    audit = weil_pair_sum(inst)
    assert audit.value == pytest.approx(_direct_pair_sum(inst))
    assert audit.hypotheses_hold
    assert audit.verdict == PASS
    assert audit.bound == pytest.approx(3 * math.sqrt(7))


def test_weil_pair_sum_conjugate_inputs_not_applicable():
    field = build_field(7, 2)
    x = field.g
    inst = WeilInstance(field, x, field.frobenius(x), 4, 1, 1)
    audit = weil_pair_sum(inst)
    assert not audit.hypotheses["not_galois_conjugate"]
    assert audit.verdict == NOT_APPLICABLE
    with pytest.raises(HypothesisViolated):
        weil_pair_sum(inst, strict=True)


def test_weil_pair_sum_conjugation_flips_value():
    field = build_field(5, 2)
    inst = WeilInstance(field, field.g, 3, 6, 1, 2)
    assert weil_pair_sum(inst.conjugated()).value == pytest.approx(np.conj(weil_pair_sum(inst).value))


def test_weil_exact_mode_agrees():
    field = build_field(5, 2)
    inst = WeilInstance(field, field.g, field.pow(field.g, 7), 6, 1, 5)
    audit = weil_pair_sum(inst, exact=True)
    assert audit.exact_verdict == audit.verdict == PASS


def test_cor22_audit():
    field = build_field(7, 2)
    a, b = field.g, 1
    u, v = field.pow(field.g, 3), 1
    audit = quotient_sum_cor22(field, 8, 1, a, b, u, v)
    assert audit.hypotheses_hold
    assert audit.verdict == PASS
    with pytest.raises(DegenerateInput):
        quotient_sum_cor22(field, 8, 1, a, b, 3, 1)
    with pytest.raises(DegenerateInput):
        quotient_sum_cor22(field, 8, 1, 0, b, u, v)


def test_cor23_audit():
    field = build_field(5, 2)
    a = 2
    b = field.g
    audit = subfield_quotient_sum_cor23(field, 4, 1, a, b)
    assert audit.hypotheses_hold
    assert audit.params["n"] == 1
    assert audit.bound == pytest.approx(3 * math.sqrt(5))
    assert audit.verdict == PASS


def test_rou_audit_values():
    l1, l2, audit = rou_l1_audit(4, [0, 2])
    assert l2 == pytest.approx(8)
    assert l1 == pytest.approx(4)
    assert audit.verdict == PASS
    _, _, exact = rou_l1_audit(6, [0, 1, 3], exact=True)
    assert exact.exact_verdict == PASS
    with pytest.raises(EmptyM):
        rou_l1_audit(3, [])


def test_rou_exhaustive_small():
    frame = rou_exhaustive(6)
    assert len(frame) == sum(2 ** d - 1 for d in range(1, 7))
    assert (frame["verdict"] == PASS).all()
    assert np.allclose(frame["l2"], frame["d"] * frame["r"])


def test_seeded_batches_are_reproducible_and_pass():
    first = run_audit_batch("weil", 30, seed=11)
    second = run_audit_batch("weil", 30, seed=11)
    assert [a.params for a in first] == [a.params for a in second]
    assert all(a.verdict == PASS for a in first)
    for mode in ("cor22", "cor23"):
        audits = run_audit_batch(mode, 20, seed=3)
        assert len(audits) == 20
        assert not any(a.verdict == FAIL for a in audits)
    frame = audits_frame(first)
    assert len(frame) == 30
    assert "hyp_not_galois_conjugate" in frame.columns


def test_span_and_subspace_generator():
    field = build_field(3, 4)
    t = 3
    span = span_elements(field, [1, t])
    assert span.tolist() == list(range(9))
    assert subspace_generator(field, [1, t]).value == 3


def test_every_plane_through_one_has_a_generator():
    field = build_field(3, 4)
    small = set(field.subfield_elements(2).tolist())
    planes = set()
    for b in range(field.q):
        if b in small:
            continue
        span = span_elements(field, [1, b])
        x = subspace_generator(field, [1, b])
        assert x.value in span.tolist()
        assert field.minimal_subfield_degree(x.value) == 4
        planes.add(tuple(span.tolist()))
    # 13 lines in F_81 / F_3, minus the one giving F_9
    assert len(planes) == 12


def test_subspace_generator_preconditions():
    field = build_field(3, 4)
    with pytest.raises(PreconditionViolated):
        subspace_generator(field, [1, 2])
    with pytest.raises(PreconditionViolated):
        subspace_generator(field, [3, 9])
    sub = field.subfield_elements(2)
    with pytest.raises(PreconditionViolated):
        subspace_generator(field, [1, int(sub[sub >= 3][0])])
    with pytest.raises(PreconditionViolated):
        subspace_generator(build_field(3, 2), [1])


def test_indicator_decomposition_counts_membership():
    field = build_field(7, 2)
    D = make_coset_union(field, 4, [0, 1])
    dec = indicator_decomposition(D, field.g, 1, field.pow(field.g, 3), 1)
    assert dec.total == pytest.approx(dec.count_in_D)
    assert dec.main_term == pytest.approx(D.r * 7 / 4)
    assert len(dec.character_terms) == 3


def test_audit_field_coverage_lists_fields_above_the_cap():
    coverage = audit_field_coverage("weil", 2 ** 16)
    assert (13, 4) in coverage["sampled"]
    assert (17, 4) in coverage["skipped"]
    assert (97, 4) in coverage["skipped"]
    assert (2, 1) not in coverage["sampled"]
    assert all(p ** n <= 2 ** 16 for p, n in coverage["sampled"])
    skipped = audit_field_coverage("cor23", 2 ** 16)["skipped"]
    assert skipped[0] == (17, 4)
    assert len(skipped) == 19
    assert all(n == 4 for _, n in skipped)
    assert audit_field_coverage("rou") == {"sampled": [], "skipped": []}
