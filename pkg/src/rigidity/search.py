# src/rigidity/search.py

"""
Exhaustive desk-scale searches around the rigidity of functions whose directions
lie in a union of multiplicative cosets.

The heavy search, enumerate_additive_in_D, only walks additive maps
f(x) = sum_i c_i x^{p^i}: for those every difference quotient equals f(u)/u, so
D_f is contained in D exactly when c_0 + sum_{i>=1} c_i x^{p^i - 1} lies in D for
every nonzero x. For a fixed tail (c_1, ..., c_{n-1}) all q choices of c_0 are
tested at once as a numpy vector and narrowed one distinct tail value at a time.
"""

import itertools
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.directions.directions import (LinearizedMap, directions_of_additive, directions_of_function,
                                       triple_quotient_size)
from src.field.field_core import DEFAULT_FIELD_CAP, FieldCtx, build_field, split_prime_power
from src.field.mult_structure import CosetUnion, make_coset_union
from src.utils.errors import ParamOutOfRange, SearchSpaceTooLarge, ZeroInD
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_SEARCH_CAP = 2 ** 28
DEFAULT_BRUTEFORCE_MAX_Q = 9


# ---------------------------------------------------------------- hypothesis bounds
def _check_bound_params(n: int, d: int, r: int):
    if n < 2 or d < 2:
        raise ParamOutOfRange(f"need n, d >= 2, got n={n}, d={d}")
    if not 1 <= r <= d - 1:
        raise ParamOutOfRange(f"need 1 <= r <= d-1, got r={r}, d={d}")


def p_bound_threshold(n: int, d: int, r: int, factor: int = 2) -> Fraction:
    """(k n - 1)^2 r d^2 / (d - r)^2 with k = factor (2 for maps, 4 for cliques)."""
    _check_bound_params(n, d, r)
    return Fraction((factor * n - 1) ** 2 * r * d * d, (d - r) ** 2)


def check_p_bound(p: int, n: int, d: int, r: int) -> bool:
    """p (d-r)^2 >= (2n-1)^2 r d^2, exact integer comparison."""
    _check_bound_params(n, d, r)
    return p * (d - r) ** 2 >= (2 * n - 1) ** 2 * r * d * d


def check_corollary_bound(p: int, n: int, d: int) -> bool:
    """p >= 2 (2n-1)^2 d, the single-parameter form for at most d/2 cosets."""
    _check_bound_params(n, d, 1)
    return p >= 2 * (2 * n - 1) ** 2 * d


def check_lbp(p: int, n: int, d: int, r: int) -> bool:
    """p (d-r)^2 >= (4n-1)^2 r d^2, the bound used for cliques over F_{q^2}."""
    _check_bound_params(n, d, r)
    return p * (d - r) ** 2 >= (4 * n - 1) ** 2 * r * d * d


def check_corollary_lbp(p: int, n: int, d: int) -> bool:
    _check_bound_params(n, d, 1)
    return p >= 2 * (4 * n - 1) ** 2 * d


def _p_bound_flag(p: int, n: int, d: int, r: int) -> bool:
    try:
        return check_p_bound(p, n, d, r)
    except ParamOutOfRange:
        return False


# ---------------------------------------------------------------- additive search
def _tail_powers(field: FieldCtx) -> List[np.ndarray]:
    """x^{p^i - 1} over nonzero x, for i = 1..n-1."""
    xs = field.nonzero()
    return [field.pow_vec(xs, field.p ** i - 1) for i in range(1, field.n)]


def _survivors_for_lead(field: FieldCtx, member: np.ndarray, powers: List[np.ndarray],
                        lead: Optional[int]) -> List[Tuple[int, ...]]:
    """
    All (c_0, ..., c_{n-1}) with c_{n-1} = lead passing the quotient test.
    lead is None when n = 1 (no tail at all).
    """
    q = field.q
    c0_all = field.elements()
    out = []
    if lead is None:
        tails = [()]
    else:
        tails = (rest + (lead,) for rest in itertools.product(range(q), repeat=field.n - 2))
    for tail in tails:
        t = np.zeros(q - 1, dtype=np.int64)
        for c, pw in zip(tail, powers):
            if c:
                t = field.add_vec(t, field.mul_vec(c, pw))
        alive = c0_all
        # x in increasing order; repeated tail values add nothing
        for value in pd.unique(t):
            alive = alive[member[field.add_vec(alive, int(value))]]
            if alive.size == 0:
                break
        for c0 in alive.tolist():
            out.append((int(c0),) + tuple(int(c) for c in tail))
    return out


def _scan_leads(D: CosetUnion, leads: Sequence[int]) -> List[Tuple[int, ...]]:
    powers = _tail_powers(D.field)
    out = []
    for lead in leads:
        out.extend(_survivors_for_lead(D.field, D.member_mask, powers, lead))
    return out


def _search_worker(p: int, n: int, d: int, M: Tuple[int, ...], leads: Sequence[int]) -> List[Tuple[int, ...]]:
    field = build_field(p, n, max(p ** n, DEFAULT_FIELD_CAP))
    return _scan_leads(CosetUnion(field, d, M), leads)


def _encoding_key(field: FieldCtx):
    q = field.q
    return lambda coeffs: sum(c * q ** i for i, c in enumerate(coeffs))


def enumerate_additive_in_D(D: CosetUnion, search_cap: int = DEFAULT_SEARCH_CAP,
                            jobs: int = 1) -> List[LinearizedMap]:
    """
    Every nonzero linearized map f with {f(x)/x : x != 0} inside D, ordered by the
    coefficient encoding sum_i c_i q^i. The candidate space is split by the leading
    coefficient c_{n-1}; with jobs > 1 the parts run in worker processes.
    """
    field = D.field
    size = field.q ** field.n
    if size > search_cap:
        raise SearchSpaceTooLarge(size, search_cap)
    if D.member_mask[0]:
        raise ZeroInD()

    start = time.time()
    if field.n == 1:
        found = _survivors_for_lead(field, D.member_mask, [], None)
    elif jobs <= 1:
        found = _scan_leads(D, range(field.q))
    else:
        parts = [list(range(k, field.q, jobs)) for k in range(jobs)]
        found = []
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(_search_worker, field.p, field.n, D.d, D.M, part): k
                       for k, part in enumerate(parts) if part}
            for fut in as_completed(futures):
                found.extend(fut.result())
    found.sort(key=_encoding_key(field))
    logger.info(f"Additive search over F_{field.q} with d={D.d}, M={list(D.M)}: "
                f"{len(found)} survivors out of {size} maps in {time.time() - start:.2f}s")
    return [LinearizedMap(field, coeffs) for coeffs in found]


def enumerate_additive_in_D_naive(D: CosetUnion) -> List[LinearizedMap]:
    """Reference filter: full-table directions of every linearized candidate."""
    field = D.field
    out = []
    for coeffs in itertools.product(range(field.q), repeat=field.n):
        L = LinearizedMap(field, coeffs)
        if not any(L.coeffs):
            continue
        if directions_of_function(field, L.table()).issubset(D):
            out.append(L)
    out.sort(key=lambda L: L.encoding)
    return out


# ---------------------------------------------------------------- main verification
class SurvivorEntry(BaseModel):
    coeffs: List[int]
    encoding: int
    direction_count: int
    frobenius_witness: Optional[List[int]] = None
    exceptional: bool = False


class RigidityReport(BaseModel):
    p: int
    n: int
    q: int
    d: int
    M: List[int]
    r: int
    p_bound: bool
    p_bound_threshold: Optional[float] = None
    corollary_bound: Optional[bool] = None
    d_size: int
    d_size_ok: bool
    triple_quotient_size: int
    triple_quotient_ok: bool
    search_space: int
    survivor_count: int = 0
    frobenius_count: int = 0
    exceptional_count: int = 0
    survivors: List[SurvivorEntry] = []
    violations: List[str] = []
    elapsed_seconds: float = 0.0


def classify_survivor(L: LinearizedMap) -> SurvivorEntry:
    witness = L.frobenius_witness()
    return SurvivorEntry(
        coeffs=list(L.coeffs),
        encoding=L.encoding,
        direction_count=len(directions_of_additive(L)),
        frobenius_witness=list(witness) if witness else None,
        exceptional=witness is None,
    )


def verify_thm_main(p: int, n: int, d: int, M: Iterable[int], jobs: int = 1,
                    field_cap: int = DEFAULT_FIELD_CAP, search_cap: int = DEFAULT_SEARCH_CAP) -> RigidityReport:
    """
    Enumerate the additive maps with directions in D = union of g^m H (m in M) and
    classify them. An exceptional survivor with |D_f| <= (q+1)/2 while the p-bound
    holds is a THEOREM VIOLATION.
    """
    start = time.time()
    field = build_field(p, n, field_cap)
    D = make_coset_union(field, d, M)
    q = field.q
    r = D.r

    p_bound = _p_bound_flag(p, n, d, r)
    threshold = None
    corollary = None
    if n >= 2 and 1 <= r <= d - 1:
        threshold = float(p_bound_threshold(n, d, r))
        if 2 * r <= d:
            corollary = check_corollary_bound(p, n, d)
    tq = triple_quotient_size(D)

    survivors = [classify_survivor(L) for L in enumerate_additive_in_D(D, search_cap, jobs)]
    violations = []
    for s in survivors:
        if s.exceptional and p_bound and 2 * s.direction_count <= q + 1:
            violations.append(f"THEOREM VIOLATION: exceptional additive map {s.coeffs} "
                              f"with {s.direction_count} directions inside D")
    exceptional = sum(s.exceptional for s in survivors)
    report = RigidityReport(
        p=p, n=n, q=q, d=d, M=list(D.M), r=r,
        p_bound=p_bound, p_bound_threshold=threshold, corollary_bound=corollary,
        d_size=len(D), d_size_ok=2 * len(D) <= q + 1,
        triple_quotient_size=tq, triple_quotient_ok=2 * tq <= q + 1,
        search_space=q ** n,
        survivor_count=len(survivors),
        frobenius_count=len(survivors) - exceptional,
        exceptional_count=exceptional,
        survivors=survivors,
        violations=violations,
        elapsed_seconds=time.time() - start,
    )
    logger.info(f"Rigidity check (p={p}, n={n}, d={d}, M={list(D.M)}): {report.survivor_count} survivors, "
                f"{exceptional} exceptional, {len(violations)} violations, p-bound {'met' if p_bound else 'not met'}")
    return report


# ---------------------------------------------------------------- directions brute force
class DirectionsBruteforceReport(BaseModel):
    q: int
    functions_total: int
    small_direction_count: int
    additive_count: int
    violations: int
    examples: List[List[int]] = []
    elapsed_seconds: float = 0.0


def run_directions_bruteforce(q: int, max_q: int = DEFAULT_BRUTEFORCE_MAX_Q) -> DirectionsBruteforceReport:
    """
    Every f with f(0) = 0, assigned f(1), f(2), ... depth first. A branch is cut as soon
    as its partial graph already determines more than (q+1)/2 directions; directions
    only accumulate, so every cut branch would have failed at its leaves too.
    """
    if q > max_q:
        raise SearchSpaceTooLarge(q ** (q - 1), max_q ** (max_q - 1))
    try:
        p, n = split_prime_power(q)
    except ValueError as exc:
        raise ParamOutOfRange(str(exc)) from exc
    field = build_field(p, n)
    start = time.time()

    limit = (q + 1) // 2
    sub = [[field.sub(a, b) for b in range(q)] for a in range(q)]
    mul = [[field.mul(a, b) for b in range(q)] for a in range(q)]
    add = [[field.add(a, b) for b in range(q)] for a in range(q)]
    inv_diff = [[field.inv(sub[x][y]) if x != y else 0 for y in range(q)] for x in range(q)]

    f = [0] * q
    stats = {"small": 0, "additive": 0, "violations": 0}
    examples: List[List[int]] = []

    def leaf():
        stats["small"] += 1
        ok = all(f[add[x][y]] == add[f[x]][f[y]] for x in range(q) for y in range(x, q))
        if ok:
            stats["additive"] += 1
        else:
            stats["violations"] += 1
            if len(examples) < 10:
                examples.append(list(f))

    def extend(x: int, mask: int, count: int):
        if x == q:
            leaf()
            return
        row = inv_diff[x]
        for y in range(q):
            new_mask, new_count = mask, count
            sy = sub[y]
            for w in range(x):
                s = mul[sy[f[w]]][row[w]]
                if not (new_mask >> s) & 1:
                    new_mask |= 1 << s
                    new_count += 1
                    if new_count > limit:
                        break
            if new_count > limit:
                continue
            f[x] = y
            extend(x + 1, new_mask, new_count)
        f[x] = 0

    extend(1, 0, 0)
    report = DirectionsBruteforceReport(
        q=q,
        functions_total=q ** (q - 1),
        small_direction_count=stats["small"],
        additive_count=stats["additive"],
        violations=stats["violations"],
        examples=examples,
        elapsed_seconds=time.time() - start,
    )
    logger.info(f"Directions brute force over F_{q}: {report.small_direction_count} functions with at most "
                f"{limit} directions, {report.violations} non-additive ({report.elapsed_seconds:.2f}s)")
    return report


def verify_thm_directions_bruteforce(q: int, max_q: int = DEFAULT_BRUTEFORCE_MAX_Q) -> int:
    """Number of f with f(0) = 0, |D_f| <= (q+1)/2 and f not additive."""
    return run_directions_bruteforce(q, max_q).violations


# ---------------------------------------------------------------- exceptional examples
@dataclass(frozen=True)
class ExceptionalExample:
    """A non-Frobenius additive f normalized by f(1) = 1, with D the coset closure of D_f."""
    D: CosetUnion
    f: LinearizedMap
    direction_count: int
    frobenius_orbit: int

    def to_dict(self):
        return {
            "d": self.D.d,
            "M": list(self.D.M),
            "coeffs": list(self.f.coeffs),
            "direction_count": self.direction_count,
            "frobenius_orbit": self.frobenius_orbit,
        }


def frobenius_orbit_key(L: LinearizedMap) -> int:
    """Smallest encoding among the Frobenius conjugates of L."""
    return min(L.conjugate(k).encoding for k in range(L.field.n))


def find_exceptional_examples(p: int, n: int, d_range: Iterable[int], r_max: int,
                              field_cap: int = DEFAULT_FIELD_CAP,
                              search_cap: int = DEFAULT_SEARCH_CAP) -> List[ExceptionalExample]:
    """
    All injective additive maps that are not of the form a x^{p^j}, determine at most
    (q+1)/2 directions and have those directions in at most r_max cosets of the
    index-d subgroup, one per scaling class.
    Sorted by (d, coefficient encoding).
    """
    field = build_field(p, n, field_cap)
    q = field.q
    size = q ** max(n - 1, 0)
    if size > search_cap:
        raise SearchSpaceTooLarge(size, search_cap)
    ds = sorted({d for d in d_range if d >= 1 and (q - 1) % d == 0})
    skipped = sorted(set(d_range) - set(ds))
    if skipped:
        logger.warning(f"Skipping indices {skipped}: they do not divide q-1 = {q - 1}")
    if n == 1 or not ds:
        return []

    xs = field.nonzero()
    powers = _tail_powers(field)
    found: List[ExceptionalExample] = []
    for tail in itertools.product(range(q), repeat=n - 1):
        if not any(tail):
            continue  # identity
        # f(1) = 1 fixes one representative per scaling class
        c0 = 1
        for c in tail:
            c0 = field.sub(c0, c)
        coeffs = (c0,) + tuple(tail)
        if sum(1 for c in coeffs if c) == 1:
            continue  # x^{p^j}
        t = np.full(q - 1, c0, dtype=np.int64)
        for c, pw in zip(tail, powers):
            if c:
                t = field.add_vec(t, field.mul_vec(c, pw))
        if np.any(t == 0):
            continue  # nontrivial kernel, 0 would be a direction
        direction_count = int(np.unique(t).size)
        if 2 * direction_count > q + 1:
            continue
        logs = field.log_table[t]
        L = None
        for d in ds:
            classes = np.unique(logs % d)
            if classes.size <= r_max:
                if L is None:
                    L = LinearizedMap(field, coeffs)
                    orbit = frobenius_orbit_key(L)
                D = CosetUnion(field, d, tuple(int(m) for m in classes))
                found.append(ExceptionalExample(D, L, direction_count, orbit))
    found.sort(key=lambda e: (e.D.d, e.f.encoding))
    logger.info(f"Exceptional search over F_{q} for d in {ds}, r <= {r_max}: {len(found)} examples")
    return found


class BoundMarginScan(BaseModel):
    n: int
    d: int
    r: int
    threshold: float
    primes_scanned: List[int] = []
    primes_with_exceptions: List[int] = []
    largest_exception_prime: Optional[int] = None
    exceptions_above_threshold: List[int] = []
    example_counts: Dict[str, int] = {}


def scan_bound_margin(n: int, d: int, r: int, primes: Iterable[int],
                      field_cap: int = DEFAULT_FIELD_CAP) -> BoundMarginScan:
    """
    Exceptional search over several primes. The largest prime with exceptions is the
    empirical margin under the threshold; any exception at or above the threshold
    would contradict the rigidity bound and is listed separately.
    """
    threshold = p_bound_threshold(n, d, r)
    scan = BoundMarginScan(n=n, d=d, r=r, threshold=float(threshold))
    for p in sorted(set(primes)):
        if (p ** n - 1) % d:
            logger.info(f"Skipping p={p}: {d} does not divide {p}^{n}-1")
            continue
        examples = find_exceptional_examples(p, n, [d], r, field_cap=field_cap)
        scan.primes_scanned.append(p)
        scan.example_counts[str(p)] = len(examples)
        if examples:
            scan.primes_with_exceptions.append(p)
            if check_p_bound(p, n, d, r):
                scan.exceptions_above_threshold.append(p)
    if scan.primes_with_exceptions:
        scan.largest_exception_prime = max(scan.primes_with_exceptions)
    return scan
