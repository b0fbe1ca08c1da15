# src/charsum/audit.py

"""
Character sums over the prime field and audits of their Weil-type bounds.

Every sum here has the shape sum_{lambda in F_p} chi^j(rational function of lambda)
with chi(0) = 0. Each term is a d-th root of unity theta^e, so a sum is carried as an
integer vector counting how often each exponent e occurs; the complex value is only
formed at the end. The same count vectors drive the exact mode.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy
from pydantic import BaseModel
from sympy.polys.domains import FF
from sympy.polys.matrices import DomainMatrix

from src.field.field_core import Element, FieldCtx, build_field
from src.field.mult_structure import CharacterRef, CosetUnion, coset_weights
from src.utils.errors import (DegenerateInput, DuplicateExponent, EmptyM, ExponentOutOfRange,
                              HypothesisViolated, IndexNotDividing, NotFound, ParamOutOfRange,
                              PreconditionViolated)
from src.utils.logger import get_logger

logger = get_logger(__name__)

AUDIT_TOL = 1e-6
ROU_TOL = 1e-9
EXACT_MAX_D = 12
DEFAULT_AUDIT_FIELD_CAP = 2 ** 16

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


class BoundAudit(BaseModel):
    kind: str
    params: Dict[str, int] = {}
    value_real: float
    value_imag: float = 0.0
    abs_value: float
    bound: float
    margin: float
    hypotheses: Dict[str, bool] = {}
    subgroup_orders: List[int] = []
    verdict: str
    exact_verdict: Optional[str] = None

    @property
    def value(self) -> complex:
        return complex(self.value_real, self.value_imag)

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())


# ---------------------------------------------------------------- exact arithmetic
def exponent_counts(exponents: np.ndarray, d: int) -> np.ndarray:
    """counts[e] = #{terms equal to theta^e}; negative exponents mark zero terms."""
    exponents = np.asarray(exponents, dtype=np.int64)
    return np.bincount(exponents[exponents >= 0] % d, minlength=d)


def counts_value(counts: np.ndarray) -> complex:
    d = len(counts)
    return complex((counts * np.exp(2j * np.pi * np.arange(d) / d)).sum())


def autocorrelation(counts: np.ndarray) -> np.ndarray:
    """A with |sum_e c_e theta^e|^2 = sum_k A_k theta^k, A_k = sum_e c_e c_{e-k}."""
    counts = np.asarray(counts, dtype=np.int64)
    return np.array([int(np.dot(counts, np.roll(counts, k))) for k in range(len(counts))], dtype=np.int64)


def cyclotomic_is_zero(coeffs: Sequence[int], d: int) -> bool:
    """sum_k coeffs[k] theta^k == 0 exactly, theta a primitive d-th root of unity."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed([int(c) for c in coeffs])), x, domain="ZZ")
    return sympy.rem(poly, sympy.Poly(sympy.cyclotomic_poly(d, x), x, domain="ZZ")).is_zero


def exact_abs_squared_le(counts: np.ndarray, bound_squared: int) -> bool:
    """|sum_e c_e theta^e|^2 <= bound_squared, decided without floating-point tolerance."""
    d = len(counts)
    A = autocorrelation(counts)
    shifted = A.copy()
    shifted[0] -= bound_squared
    if cyclotomic_is_zero(shifted, d):
        return True
    value = sympy.Add(*[int(A[k]) * sympy.cos(2 * sympy.pi * sympy.Rational(k, d)) for k in range(d)])
    return bool((value - bound_squared).evalf(50) < 0)


# ---------------------------------------------------------------- shared helpers
def _subfield_generator_trivial(ch: CharacterRef, x: int) -> Tuple[bool, int]:
    """Whether chi^j is identically 1 on F_p[x]^*, and the order of that group."""
    field = ch.field
    e = field.minimal_subfield_degree(x)
    order = field.p ** e - 1
    step = (field.q - 1) // order
    return (ch.j * step) % ch.d == 0, order


def _finish(kind: str, params: Dict[str, int], counts: np.ndarray, bound: float,
            hypotheses: Dict[str, bool], strict: bool, exact: bool, bound_squared: int,
            subgroup_orders: Sequence[int] = (), tol: float = AUDIT_TOL) -> BoundAudit:
    value = counts_value(counts)
    magnitude = abs(value)
    holds = all(hypotheses.values())
    if strict and not holds:
        raise HypothesisViolated([k for k, v in hypotheses.items() if not v])
    if not holds:
        verdict = NOT_APPLICABLE
    else:
        verdict = PASS if magnitude <= bound + tol else FAIL
    exact_verdict = None
    if exact and len(counts) <= EXACT_MAX_D:
        exact_ok = exact_abs_squared_le(counts, bound_squared)
        exact_verdict = NOT_APPLICABLE if not holds else (PASS if exact_ok else FAIL)
    return BoundAudit(
        kind=kind, params=params,
        value_real=value.real, value_imag=value.imag, abs_value=magnitude,
        bound=bound, margin=bound - magnitude,
        hypotheses=hypotheses, subgroup_orders=list(subgroup_orders),
        verdict=verdict, exact_verdict=exact_verdict,
    )


def _prime_field_lambdas(field: FieldCtx) -> np.ndarray:
    # encodings below p are exactly the constants of F_p
    return np.arange(field.p, dtype=np.int64)


# ---------------------------------------------------------------- pair sum
@dataclass(frozen=True)
class WeilInstance:
    """Two shifted characters chi^{j1}(lambda - xi1) chi^{j2}(lambda - xi2) of base order d."""
    field: FieldCtx
    xi1: int
    xi2: int
    d: int
    j1: int
    j2: int

    def __post_init__(self):
        if self.d < 1 or (self.field.q - 1) % self.d:
            raise IndexNotDividing(self.d, self.field.q - 1)

    def conjugated(self) -> "WeilInstance":
        return WeilInstance(self.field, self.xi1, self.xi2, self.d,
                            (self.d - self.j1) % self.d, (self.d - self.j2) % self.d)

    def params(self) -> Dict[str, int]:
        return {"p": self.field.p, "n": self.field.n, "d": self.d, "j1": self.j1, "j2": self.j2,
                "xi1": self.xi1, "xi2": self.xi2}


def are_galois_conjugate(field: FieldCtx, x: int, y: int) -> bool:
    return any(field.frobenius(y, r) == x for r in range(field.n))


def weil_pair_sum(inst: WeilInstance, strict: bool = False, exact: bool = False) -> BoundAudit:
    """sum_{lambda in F_p} chi1(lambda - xi1) chi2(lambda - xi2), audited against (2n-1) sqrt(p)."""
    field = inst.field
    lam = _prime_field_lambdas(field)
    ch1 = CharacterRef(field, inst.d, inst.j1)
    ch2 = CharacterRef(field, inst.d, inst.j2)
    e1 = ch1.exponent_vec(field.sub_vec(lam, inst.xi1))
    e2 = ch2.exponent_vec(field.sub_vec(lam, inst.xi2))
    exps = np.where((e1 >= 0) & (e2 >= 0), e1 + e2, -1)
    counts = exponent_counts(exps, inst.d)

    trivial1, order1 = _subfield_generator_trivial(ch1, inst.xi1)
    trivial2, order2 = _subfield_generator_trivial(ch2, inst.xi2)
    hypotheses = {
        "not_galois_conjugate": not are_galois_conjugate(field, inst.xi1, inst.xi2),
        "character_nontrivial_on_subfield": not (trivial1 and trivial2),
    }
    n, p = field.n, field.p
    return _finish("weil", inst.params(), counts, (2 * n - 1) * math.sqrt(p), hypotheses,
                   strict, exact, (2 * n - 1) ** 2 * p, (order1, order2))


# ---------------------------------------------------------------- quotient sums
def _quotient_exponents(ch: CharacterRef, num: np.ndarray, den: np.ndarray) -> np.ndarray:
    field = ch.field
    valid = (num != 0) & (den != 0)
    quot = np.zeros_like(num)
    quot[valid] = field.div_vec(num[valid], den[valid])
    return np.where(valid, ch.exponent_vec(quot), -1)


def quotient_sum_cor22(field: FieldCtx, d: int, j: int, a: int, b: int, u: int, v: int,
                       strict: bool = False, exact: bool = False) -> BoundAudit:
    """sum_{lambda in F_p} chi^j((a u - b lambda v)/(u - lambda v)), audited against (2n-1) sqrt(p)."""
    if 0 in (a, b, u, v):
        raise DegenerateInput("a, b, u, v must all be nonzero")
    ch = CharacterRef(field, d, j)
    lam = _prime_field_lambdas(field)
    den = field.sub_vec(u, field.mul_vec(v, lam))
    if np.any(den == 0):
        raise DegenerateInput("u/v lies in F_p, so u - lambda v vanishes for some lambda")
    num = field.sub_vec(field.mul(a, u), field.mul_vec(field.mul(b, v), lam))
    counts = exponent_counts(_quotient_exponents(ch, num, den), d)

    ratio = field.div(a, b)
    norm_exp = (field.q - 1) // (field.p - 1)
    hypotheses = {
        "character_nontrivial": j % d != 0,
        "chi_ab_not_one": ch.exponent(ratio) != 0,
        "ab_norm_not_one": field.pow(ratio, norm_exp) != 1,
        "uv_not_in_prime_field": field.div(u, v) >= field.p,
    }
    params = {"p": field.p, "n": field.n, "d": d, "j": j, "a": a, "b": b, "u": u, "v": v}
    n, p = field.n, field.p
    return _finish("cor22", params, counts, (2 * n - 1) * math.sqrt(p), hypotheses,
                   strict, exact, (2 * n - 1) ** 2 * p)


def subfield_quotient_sum_cor23(field: FieldCtx, d: int, j: int, a: int, b: int,
                                strict: bool = False, exact: bool = False) -> BoundAudit:
    """
    sum_{lambda in F_p} chi^j((b - lambda)/(a - lambda)) over F_{p^{2n}}, audited
    against (4n-1) sqrt(p). The term with a = lambda contributes 0.
    """
    if field.n % 2:
        raise ParamOutOfRange(f"the field must have even degree, got F_{field.p}^{field.n}")
    n = field.n // 2
    ch = CharacterRef(field, d, j)
    lam = _prime_field_lambdas(field)
    counts = exponent_counts(_quotient_exponents(ch, field.sub_vec(b, lam), field.sub_vec(a, lam)), d)

    hypotheses = {
        "character_nontrivial": j % d != 0,
        "a_in_half_subfield": a != 0 and field.frobenius(a, n) == a,
        "b_generates_field": field.minimal_subfield_degree(b) == field.n,
    }
    params = {"p": field.p, "n": n, "d": d, "j": j, "a": a, "b": b}
    p = field.p
    return _finish("cor23", params, counts, (4 * n - 1) * math.sqrt(p), hypotheses,
                   strict, exact, (4 * n - 1) ** 2 * p)


# ---------------------------------------------------------------- roots of unity
def _validate_exponents(d: int, M: Sequence[int]):
    if not M:
        raise EmptyM()
    seen = set()
    for m in M:
        if not 0 <= m < d:
            raise ExponentOutOfRange(m, d)
        if m in seen:
            raise DuplicateExponent(m)
        seen.add(m)


def rou_l1_audit(d: int, M: Sequence[int], exact: bool = False) -> Tuple[float, float, BoundAudit]:
    """
    L1 = sum_j |sum_k theta^{-j m_k}| against d sqrt(r), and L2 = sum_j |.|^2 which must
    equal d r.
    """
    M = list(M)
    _validate_exponents(d, M)
    r = len(M)
    inner = np.abs(coset_weights(d, M))
    l1 = float(inner.sum())
    l2 = float((inner ** 2).sum())
    bound = d * math.sqrt(r)
    hypotheses = {"l2_equals_dr": abs(l2 - d * r) < AUDIT_TOL}

    exact_verdict = None
    if exact and d <= EXACT_MAX_D:
        total = np.zeros(d, dtype=np.int64)
        for j in range(d):
            total += autocorrelation(exponent_counts(np.array([(-j * m) % d for m in M]), d))
        total[0] -= d * r
        exact_verdict = PASS if cyclotomic_is_zero(total, d) else FAIL

    verdict = PASS if l1 <= bound + ROU_TOL and hypotheses["l2_equals_dr"] else FAIL
    audit = BoundAudit(
        kind="rou", params={"d": d, "r": r},
        value_real=l1, abs_value=l1, bound=bound, margin=bound - l1,
        hypotheses=hypotheses, verdict=verdict, exact_verdict=exact_verdict,
    )
    return l1, l2, audit


def rou_exhaustive(d_max: int = 10) -> pd.DataFrame:
    """Every d <= d_max and every nonempty M, one row each."""
    rows = []
    for d in range(1, d_max + 1):
        for mask in range(1, 2 ** d):
            M = [m for m in range(d) if (mask >> m) & 1]
            l1, l2, audit = rou_l1_audit(d, M)
            rows.append({"d": d, "M": ",".join(map(str, M)), "r": len(M), "l1": l1, "l2": l2,
                         "bound": audit.bound, "verdict": audit.verdict})
    return pd.DataFrame(rows)


# ---------------------------------------------------------------- subspaces and indicators
def _rank_mod_p(rows: np.ndarray, p: int) -> int:
    K = FF(p)
    rows = np.asarray(rows, dtype=np.int64)
    dm = DomainMatrix([[K(int(x)) for x in row] for row in rows], rows.shape, K)
    return dm.rank()


def span_elements(field: FieldCtx, basis: Sequence[int]) -> np.ndarray:
    """Sorted encodings of the F_p-span of basis."""
    B = field.digits_vec(np.asarray(basis, dtype=np.int64))
    lambdas = np.array(list(itertools.product(range(field.p), repeat=len(basis))), dtype=np.int64)
    digits = (lambdas @ B) % field.p
    return np.unique(digits @ np.array([field.p ** i for i in range(field.n)], dtype=np.int64))


def subspace_generator(field: FieldCtx, basis: Sequence[int]) -> Element:
    """
    The first element of V = span(basis) in encoding order that lies in no proper
    subfield of F_{p^{2n}}. V must be n-dimensional, contain 1 and differ from F_{p^n}.
    """
    p = field.p
    if p == 2 or field.n % 2 or field.n < 4:
        raise PreconditionViolated(f"need p odd and degree 2n with n >= 2, got F_{p}^{field.n}")
    n = field.n // 2
    basis = [field.enc(b) for b in basis]
    if len(basis) != n:
        raise PreconditionViolated(f"expected {n} basis vectors, got {len(basis)}")
    digits = field.digits_vec(basis)
    if _rank_mod_p(digits, p) != n:
        raise PreconditionViolated("basis vectors are linearly dependent")
    if _rank_mod_p(np.vstack([digits, field.digits_vec([1])]), p) != n:
        raise PreconditionViolated("1 is not in V")
    if all(field.frobenius(b, n) == b for b in basis):
        raise PreconditionViolated(f"V equals the subfield F_{p}^{n}")

    elements = span_elements(field, basis)
    proper = [e for e in sympy.divisors(field.n) if e < field.n]
    generic = np.ones(elements.size, dtype=bool)
    for e in proper:
        generic &= field.frobenius_vec(elements, e) != elements
    hits = elements[generic]
    if hits.size == 0:
        raise NotFound("no element of V generates the field")
    return field.element(int(hits[0]))


class IndicatorDecomposition(BaseModel):
    d: int
    M: List[int]
    p: int
    n: int
    count_in_D: int
    main_term: float
    character_terms: List[float]
    total: float
    weil_bound: float
    comparison_bound: float
    within_bound: bool


def indicator_decomposition(D: CosetUnion, a: int, b: int, u: int, v: int) -> IndicatorDecomposition:
    """
    sum_lambda psi((a u - b lambda v)/(u - lambda v)) split into the j = 0 main term and the
    j >= 1 character-sum contributions. count_in_D is the direct count of quotients in D;
    within_bound compares it with r p/d + (2n-1) sqrt(p r).
    """
    field = D.field
    if 0 in (a, b, u, v):
        raise DegenerateInput("a, b, u, v must all be nonzero")
    lam = _prime_field_lambdas(field)
    den = field.sub_vec(u, field.mul_vec(v, lam))
    if np.any(den == 0):
        raise DegenerateInput("u/v lies in F_p")
    num = field.sub_vec(field.mul(a, u), field.mul_vec(field.mul(b, v), lam))
    nonzero = num != 0
    quot = np.zeros_like(num)
    quot[nonzero] = field.div_vec(num[nonzero], den[nonzero])

    weights = coset_weights(D.d, D.M)
    contributions = []
    for j in range(D.d):
        counts = exponent_counts(_quotient_exponents(CharacterRef(field, D.d, j), num, den), D.d)
        contributions.append(weights[j] * counts_value(counts) / D.d)
    p, n = field.p, field.n
    count = int(D.member_mask[quot[nonzero]].sum())
    bound = D.r * p / D.d + (2 * n - 1) * math.sqrt(p * D.r)
    return IndicatorDecomposition(
        d=D.d, M=list(D.M), p=p, n=n,
        count_in_D=count,
        main_term=float(contributions[0].real),
        character_terms=[float(abs(c)) for c in contributions[1:]],
        total=float(sum(contributions).real),
        weil_bound=(2 * n - 1) * math.sqrt(p),
        comparison_bound=bound,
        within_bound=count <= bound,
    )


# ---------------------------------------------------------------- seeded batches
def _fields_up_to(cap: int, max_p: int, n_range: Iterable[int]) -> List[Tuple[int, int]]:
    return [(p, n) for n in n_range for p in sympy.primerange(2, max_p + 1) if p ** n <= cap]


def audit_field_coverage(mode: str, cap: int = DEFAULT_AUDIT_FIELD_CAP,
                         max_p: int = 97) -> Dict[str, List[Tuple[int, int]]]:
    """Field shapes (p, n) a seeded batch samples from, and those the cap leaves out."""
    if mode == "weil":
        shapes = [(p, n) for p, n in _fields_up_to(math.inf, max_p, range(1, 5)) if p ** n > 2]
    elif mode == "cor22":
        shapes = _fields_up_to(math.inf, max_p, range(2, 5))
    elif mode == "cor23":
        shapes = [(p, 2 * n) for p, n in _fields_up_to(math.inf, max_p, range(1, 3))]
    else:
        shapes = []
    return {"sampled": [s for s in shapes if s[0] ** s[1] <= cap],
            "skipped": [s for s in shapes if s[0] ** s[1] > cap]}


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def random_weil_instances(count: int, seed: int, max_p: int = 97, max_n: int = 4,
                          cap: int = DEFAULT_AUDIT_FIELD_CAP, max_tries: int = 100) -> List[WeilInstance]:
    """Instances satisfying both pair-sum hypotheses, sampled with numpy's default_rng(seed)."""
    rng = np.random.default_rng(seed)
    shapes = [(p, n) for p, n in _fields_up_to(cap, max_p, range(1, max_n + 1)) if p ** n > 2]
    out = []
    while len(out) < count:
        p, n = _pick(rng, shapes)
        field = build_field(p, n)
        divisors = [d for d in sympy.divisors(field.q - 1) if d >= 2]
        for _ in range(max_tries):
            d = _pick(rng, divisors)
            inst = WeilInstance(field, int(rng.integers(field.q)), int(rng.integers(field.q)),
                                d, int(rng.integers(d)), int(rng.integers(d)))
            audit_flags = weil_pair_sum(inst).hypotheses
            if all(audit_flags.values()):
                out.append(inst)
                break
    return out


def random_cor22_instances(count: int, seed: int, max_p: int = 97, max_n: int = 4,
                           cap: int = DEFAULT_AUDIT_FIELD_CAP, max_tries: int = 100) -> List[Dict[str, int]]:
    rng = np.random.default_rng(seed)
    shapes = [(p, n) for p, n in _fields_up_to(cap, max_p, range(2, max_n + 1))]
    out = []
    while len(out) < count:
        p, n = _pick(rng, shapes)
        field = build_field(p, n)
        divisors = [d for d in sympy.divisors(field.q - 1) if d >= 2]
        norm_exp = (field.q - 1) // (p - 1)
        for _ in range(max_tries):
            d = _pick(rng, divisors)
            j = int(rng.integers(1, d))
            a, b, u, v = (int(x) for x in rng.integers(1, field.q, size=4))
            ratio = field.div(a, b)
            if CharacterRef(field, d, j).exponent(ratio) == 0 or field.pow(ratio, norm_exp) == 1:
                continue
            if field.div(u, v) < p:
                continue
            out.append({"p": p, "n": n, "d": d, "j": j, "a": a, "b": b, "u": u, "v": v})
            break
    return out


def random_cor23_instances(count: int, seed: int, max_p: int = 97, max_n: int = 2,
                           cap: int = DEFAULT_AUDIT_FIELD_CAP, max_tries: int = 100) -> List[Dict[str, int]]:
    rng = np.random.default_rng(seed)
    shapes = [(p, 2 * n) for p, n in _fields_up_to(cap, max_p, range(1, max_n + 1)) if p ** (2 * n) <= cap]
    out = []
    while len(out) < count:
        p, big_n = _pick(rng, shapes)
        field = build_field(p, big_n)
        half = field.subfield_elements(big_n // 2)[1:]
        divisors = [d for d in sympy.divisors(field.q - 1) if d >= 2]
        for _ in range(max_tries):
            d = _pick(rng, divisors)
            j = int(rng.integers(1, d))
            a = int(_pick(rng, half))
            b = int(rng.integers(field.q))
            if field.minimal_subfield_degree(b) != big_n:
                continue
            out.append({"p": p, "n": big_n // 2, "d": d, "j": j, "a": a, "b": b})
            break
    return out


def run_audit_batch(mode: str, count: int, seed: int, cap: int = DEFAULT_AUDIT_FIELD_CAP,
                    exact: bool = False, rou_max_d: int = 10) -> List[BoundAudit]:
    """Seeded batch of audits for one mode: weil, cor22, cor23 or rou."""
    if mode == "weil":
        audits = [weil_pair_sum(inst, exact=exact) for inst in random_weil_instances(count, seed, cap=cap)]
    elif mode == "cor22":
        audits = []
        for row in random_cor22_instances(count, seed, cap=cap):
            field = build_field(row["p"], row["n"])
            audits.append(quotient_sum_cor22(field, row["d"], row["j"], row["a"], row["b"], row["u"], row["v"],
                                             exact=exact))
    elif mode == "cor23":
        audits = []
        for row in random_cor23_instances(count, seed, cap=cap):
            field = build_field(row["p"], 2 * row["n"])
            audits.append(subfield_quotient_sum_cor23(field, row["d"], row["j"], row["a"], row["b"], exact=exact))
    elif mode == "rou":
        audits = []
        for d in range(1, rou_max_d + 1):
            for mask in range(1, 2 ** d):
                audits.append(rou_l1_audit(d, [m for m in range(d) if (mask >> m) & 1], exact=exact)[2])
    else:
        raise ValueError(f"unknown audit mode {mode!r}")
    failed = sum(a.verdict == FAIL for a in audits)
    logger.info(f"Audit batch {mode}: {len(audits)} audits, {failed} failed (seed={seed})")
    skipped = audit_field_coverage(mode, cap)["skipped"]
    if skipped:
        logger.info(f"Audit batch {mode}: {len(skipped)} fields above the cap {cap} were not sampled")
    return audits


def audits_frame(audits: Sequence[BoundAudit]) -> pd.DataFrame:
    """One row per audit: inputs, value, bound, margin, hypothesis flags and verdicts."""
    rows = []
    for a in audits:
        row = {"kind": a.kind, **a.params,
               "value_real": a.value_real, "value_imag": a.value_imag, "abs_value": a.abs_value,
               "bound": a.bound, "margin": a.margin, "verdict": a.verdict, "exact_verdict": a.exact_verdict}
        row.update({f"hyp_{k}": v for k, v in a.hypotheses.items()})
        rows.append(row)
    return pd.DataFrame(rows)
