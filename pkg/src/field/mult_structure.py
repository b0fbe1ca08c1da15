# src/field/mult_structure.py

"""
Multiplicative structure of F_q^*: index-d subgroups, unions of their cosets,
multiplicative characters pinned by chi(g) = exp(2*pi*i/d), and the character-sum
expansion psi of a coset union's indicator.
"""

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Dict, Iterable, Tuple, Union

import numpy as np
import pandas as pd

from src.field.field_core import Element, FieldCtx
from src.utils.errors import (DuplicateExponent, EmptyM, ExponentOutOfRange, IndexNotDividing,
                              LogOfZero, ParamOutOfRange)

PSI_TOL = 1e-9


@dataclass(frozen=True)
class CosetUnion:
    """D = union over m in M of g^m H, H the subgroup of index d in F_q^*."""
    field: FieldCtx
    d: int
    M: Tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.M)

    @property
    def coset_size(self) -> int:
        return (self.field.q - 1) // self.d

    def __len__(self):
        return self.r * self.coset_size

    @cached_property
    def _mset(self) -> frozenset:
        return frozenset(self.M)

    @cached_property
    def member_mask(self) -> np.ndarray:
        """Boolean mask over all encodings; mask[0] is False."""
        mask = np.zeros(self.field.q, dtype=bool)
        residues = np.zeros(self.d, dtype=bool)
        residues[list(self.M)] = True
        mask[1:] = residues[self.field.log_table[1:] % self.d]
        mask.flags.writeable = False
        return mask

    def __contains__(self, x) -> bool:
        value = self.field.enc(x)
        return value != 0 and (self.field.log(value) % self.d) in self._mset

    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.member_mask).astype(np.int64)

    def is_subset(self, other: "CosetUnion") -> bool:
        return bool(np.all(other.member_mask[self.elements()]))

    def to_dict(self) -> Dict:
        return {"d": self.d, "M": list(self.M)}


def make_coset_union(field: FieldCtx, d: int, M: Iterable[int]) -> CosetUnion:
    if d < 1 or (field.q - 1) % d:
        raise IndexNotDividing(d, field.q - 1)
    exponents = list(M)
    if not exponents:
        raise EmptyM()
    seen = set()
    for m in exponents:
        if not 0 <= m < d:
            raise ExponentOutOfRange(m, d)
        if m in seen:
            raise DuplicateExponent(m)
        seen.add(m)
    return CosetUnion(field, d, tuple(sorted(exponents)))


def coset_union_from_elements(field: FieldCtx, d: int, elements: Iterable[Union[Element, int]]) -> CosetUnion:
    """The smallest union of index-d cosets containing the given nonzero elements."""
    values = np.array([field.enc(x) for x in elements], dtype=np.int64)
    if d < 1 or (field.q - 1) % d:
        raise IndexNotDividing(d, field.q - 1)
    if values.size == 0:
        raise EmptyM()
    residues = np.unique(field.log_vec(values) % d)
    return CosetUnion(field, d, tuple(int(m) for m in residues))


def coset_of(D: CosetUnion, x: Union[Element, int]) -> int:
    value = D.field.enc(x)
    if value == 0:
        raise LogOfZero()
    return D.field.log(value) % D.d


def power_residue_subgroup(field: FieldCtx, k: int) -> CosetUnion:
    """{x^k : x in F_q^*} as the index-gcd(k, q-1) subgroup."""
    if k < 1:
        raise ParamOutOfRange(f"power k must be >= 1, got {k}")
    return CosetUnion(field, gcd(k, field.q - 1), (0,))


def scale_coset_union(D: CosetUnion, c: Union[Element, int]) -> CosetUnion:
    """D / c."""
    value = D.field.enc(c)
    if value == 0:
        raise LogOfZero()
    shift = D.field.log(value) % D.d
    return CosetUnion(D.field, D.d, tuple(sorted((m - shift) % D.d for m in D.M)))


@dataclass(frozen=True)
class CharacterRef:
    """chi^j for the order-d character with chi(g) = exp(2*pi*i/d)."""
    field: FieldCtx
    d: int
    j: int

    def __post_init__(self):
        if self.d < 1 or (self.field.q - 1) % self.d:
            raise IndexNotDividing(self.d, self.field.q - 1)

    def exponent(self, x: Union[Element, int]) -> int:
        """The exact value chi^j(x) = theta^e; returns e in [0, d)."""
        value = self.field.enc(x)
        if value == 0:
            raise LogOfZero("chi(0) has no exponent")
        return (self.j * self.field.log(value)) % self.d

    def exponent_vec(self, xs) -> np.ndarray:
        """Exponents for an array of encodings; zeros map to -1."""
        xs = np.asarray(xs, dtype=np.int64)
        e = (self.j * self.field.log_table[xs]) % self.d
        return np.where(xs == 0, -1, e)

    def __call__(self, x: Union[Element, int]) -> complex:
        value = self.field.enc(x)
        if value == 0:
            return 0j
        return complex(np.exp(2j * np.pi * self.exponent(value) / self.d))

    def values(self, xs) -> np.ndarray:
        e = self.exponent_vec(xs)
        return np.where(e < 0, 0, np.exp(2j * np.pi * e / self.d))

    def is_trivial_on(self, h: Union[Element, int]) -> bool:
        return self.exponent(h) == 0


def coset_weights(d: int, M: Iterable[int]) -> np.ndarray:
    """w_j = sum_k theta^{-j m_k} for j in [0, d)."""
    j = np.arange(d)[:, None]
    m = np.asarray(list(M), dtype=np.int64)[None, :]
    return np.exp(-2j * np.pi * j * m / d).sum(axis=1)


def psi_by_class(D: CosetUnion) -> np.ndarray:
    """psi evaluated on each class g^c H, c in [0, d)."""
    d = D.d
    w = coset_weights(d, D.M)
    jc = np.outer(np.arange(d), np.arange(d))
    return (w[:, None] * np.exp(2j * np.pi * jc / d)).sum(axis=0) / d


def psi_indicator(D: CosetUnion, x: Union[Element, int]) -> complex:
    """(1/d) sum_j (sum_k theta^{-j m_k}) chi^j(x); equals [x in D] up to rounding."""
    value = D.field.enc(x)
    if value == 0:
        raise LogOfZero()
    c = D.field.log(value) % D.d
    w = coset_weights(D.d, D.M)
    j = np.arange(D.d)
    return complex((w * np.exp(2j * np.pi * j * c / D.d)).sum() / D.d)


def psi_audit(D: CosetUnion, tol: float = PSI_TOL) -> pd.DataFrame:
    """One row per nonzero x: encoding, psi real/imag parts, membership and agreement."""
    xs = D.field.nonzero()
    classes = D.field.log_table[xs] % D.d
    psi = psi_by_class(D)[classes]
    member = D.member_mask[xs]
    return pd.DataFrame({
        "x": xs,
        "psi_real": psi.real,
        "psi_imag": psi.imag,
        "member": member,
        "agrees": np.abs(psi - member.astype(float)) < tol,
    })
