# src/directions/directions.py

"""
Directions determined by point sets and functions in AG(2, q), linearized maps,
and detection of the rigid form f(x) = a x^{p^j} + b.

Functions over F_q are passed around as value tables: numpy arrays of length q
whose entry at encoding x is the encoding of f(x).
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.field.field_core import Element, FieldCtx
from src.field.mult_structure import CosetUnion
from src.utils.errors import DuplicatePoint, TooFewPoints, ZeroInD

ElementLike = Union[Element, int]


@dataclass(frozen=True)
class PointSet:
    field: FieldCtx
    points: Tuple[Tuple[int, int], ...]

    @classmethod
    def of(cls, field: FieldCtx, points: Iterable[Tuple[ElementLike, ElementLike]]) -> "PointSet":
        normalized = []
        seen = set()
        for x, y in points:
            pt = (field.enc(x), field.enc(y))
            if pt in seen:
                raise DuplicatePoint(pt)
            seen.add(pt)
            normalized.append(pt)
        return cls(field, tuple(normalized))

    @classmethod
    def graph(cls, field: FieldCtx, table) -> "PointSet":
        return cls(field, tuple((x, int(y)) for x, y in enumerate(np.asarray(table))))

    def __len__(self):
        return len(self.points)


class DirectionSet:
    """A subset of F_q plus the vertical direction, stored as a bitset over encodings."""

    def __init__(self, field: FieldCtx, bits: np.ndarray, has_infinity: bool = False):
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (field.q,):
            raise ValueError(f"expected a bitset of length {field.q}")
        bits.flags.writeable = False
        self.field = field
        self.bits = bits
        self.has_infinity = bool(has_infinity)

    @classmethod
    def from_slopes(cls, field: FieldCtx, slopes: Iterable[ElementLike], has_infinity: bool = False) -> "DirectionSet":
        bits = np.zeros(field.q, dtype=bool)
        idx = [field.enc(s) for s in slopes]
        if idx:
            bits[idx] = True
        return cls(field, bits, has_infinity)

    def __len__(self):
        return int(self.bits.sum()) + int(self.has_infinity)

    def __contains__(self, s) -> bool:
        if s is None or s == "inf":
            return self.has_infinity
        return bool(self.bits[self.field.enc(s)])

    def __eq__(self, other):
        return (isinstance(other, DirectionSet) and self.field == other.field
                and self.has_infinity == other.has_infinity and np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.field, self.has_infinity, self.bits.tobytes()))

    def __repr__(self):
        tail = ", inf" if self.has_infinity else ""
        return f"DirectionSet({self.slopes()}{tail})"

    def slopes(self) -> List[int]:
        return [int(s) for s in np.flatnonzero(self.bits)]

    def scaled(self, c: ElementLike) -> "DirectionSet":
        """c * D (the vertical direction is fixed)."""
        value = self.field.enc(c)
        slopes = self.field.mul_vec(np.flatnonzero(self.bits), value)
        return DirectionSet.from_slopes(self.field, slopes.tolist(), self.has_infinity)

    def issubset(self, other: Union["DirectionSet", CosetUnion]) -> bool:
        if isinstance(other, CosetUnion):
            return not self.has_infinity and bool(np.all(other.member_mask[self.bits]))
        return (other.has_infinity or not self.has_infinity) and bool(np.all(other.bits[self.bits]))

    def to_dict(self) -> Dict:
        return {"slopes": self.slopes(), "infinity": self.has_infinity}


def directions_of_point_set(U: PointSet) -> DirectionSet:
    """All slopes (y_j - y_i)/(x_j - x_i) over unordered pairs; equal x gives infinity."""
    if len(U) < 2:
        raise TooFewPoints(len(U))
    field = U.field
    pts = np.array(U.points, dtype=np.int64)
    xs, ys = pts[:, 0], pts[:, 1]
    bits = np.zeros(field.q, dtype=bool)
    vertical = False
    for i in range(len(pts) - 1):
        dx = field.sub_vec(xs[i + 1:], xs[i])
        dy = field.sub_vec(ys[i + 1:], ys[i])
        same = dx == 0
        if np.any(same):
            vertical = True
        keep = ~same
        if np.any(keep):
            bits[field.div_vec(dy[keep], dx[keep])] = True
    return DirectionSet(field, bits, vertical)


def directions_of_function(field: FieldCtx, table) -> DirectionSet:
    """Directions of the graph of f; never contains infinity."""
    f = np.asarray(table, dtype=np.int64)
    if f.shape != (field.q,):
        raise ValueError(f"value table must have length {field.q}")
    xs = field.elements()
    bits = np.zeros(field.q, dtype=bool)
    for h in range(1, field.q):
        shifted = field.add_vec(xs, h)
        dy = field.sub_vec(f[shifted], f)
        bits[field.mul_vec(dy, field.inv(h))] = True
    return DirectionSet(field, bits, False)


def is_additive(field: FieldCtx, table) -> bool:
    """f(x + y) = f(x) + f(y) for all x, y; stops at the first failing row."""
    f = np.asarray(table, dtype=np.int64)
    xs = field.elements()
    for x in range(field.q):
        lhs = f[field.add_vec(xs, x)]
        rhs = field.add_vec(f, f[x])
        if not np.array_equal(lhs, rhs):
            return False
    return True


@dataclass(frozen=True)
class LinearizedMap:
    """f(x) = sum_i c_i x^{p^i}."""
    field: FieldCtx
    coeffs: Tuple[int, ...]

    @classmethod
    def of(cls, field: FieldCtx, coeffs: Sequence[ElementLike]) -> "LinearizedMap":
        values = [field.enc(c) for c in coeffs]
        if len(values) > field.n:
            raise ValueError(f"a linearized map over F_{field.q} has at most {field.n} coefficients")
        return cls(field, tuple(values + [0] * (field.n - len(values))))

    def __call__(self, x: ElementLike) -> int:
        value = self.field.enc(x)
        total = 0
        for i, c in enumerate(self.coeffs):
            if c:
                total = self.field.add(total, self.field.mul(c, self.field.frobenius(value, i)))
        return total

    def table(self) -> np.ndarray:
        field = self.field
        xs = field.elements()
        out = np.zeros(field.q, dtype=np.int64)
        for i, c in enumerate(self.coeffs):
            if c:
                out = field.add_vec(out, field.mul_vec(c, field.frobenius_vec(xs, i)))
        return out

    def quotients(self) -> np.ndarray:
        """f(x)/x over x = 1, ..., q-1."""
        xs = self.field.nonzero()
        return self.field.div_vec(self.table()[1:], xs)

    @property
    def encoding(self) -> int:
        """Order key: sum_i c_i q^i."""
        return sum(c * self.field.q ** i for i, c in enumerate(self.coeffs))

    def frobenius_witness(self) -> Optional[Tuple[int, int, int]]:
        """(a, j, 0) when exactly one coefficient is nonzero; linearized forms are unique."""
        nonzero = [(i, c) for i, c in enumerate(self.coeffs) if c]
        if len(nonzero) != 1:
            return None
        j, a = nonzero[0]
        return (a, j, 0)

    def scaled(self, c: ElementLike) -> "LinearizedMap":
        value = self.field.enc(c)
        return LinearizedMap(self.field, tuple(self.field.mul(value, ci) for ci in self.coeffs))

    def conjugate(self, k: int = 1) -> "LinearizedMap":
        """Coefficients raised to p^k: the map conjugated by the Frobenius automorphism."""
        return LinearizedMap(self.field, tuple(self.field.frobenius(ci, k) for ci in self.coeffs))

    def to_dict(self) -> Dict:
        return {"coeffs": list(self.coeffs)}


def linearized_eval(L: LinearizedMap, x: ElementLike) -> int:
    return L(x)


def directions_of_additive(L: LinearizedMap) -> DirectionSet:
    """For additive f every difference quotient reduces to f(u)/u."""
    return DirectionSet.from_slopes(L.field, np.unique(L.quotients()).tolist())


def is_frobenius_linear(field: FieldCtx, table) -> Optional[Tuple[int, int, int]]:
    """
    The witness (a, j, b) with f(x) = a x^{p^j} + b, smallest j first, or None.
    Constant maps give (0, 0, b).
    """
    f = np.asarray(table, dtype=np.int64)
    b = int(f[0])
    a = field.sub(int(f[1]), b)
    if a == 0:
        return (0, 0, b) if np.all(f == b) else None
    xs = field.elements()
    g = field.g
    target_g = field.sub(int(f[g]), b)
    for j in range(field.n):
        if field.mul(a, field.frobenius(g, j)) != target_g:
            continue
        candidate = field.add_vec(field.mul_vec(a, field.frobenius_vec(xs, j)), b)
        if np.array_equal(candidate, f):
            return (a, j, b)
    return None


def triple_quotient_size(D: Union[CosetUnion, Iterable[ElementLike]], field: Optional[FieldCtx] = None) -> int:
    """|D D^{-1} D^{-1}|."""
    if isinstance(D, CosetUnion):
        d = D.d
        residues = {(a - b - c) % d for a in D.M for b in D.M for c in D.M}
        return len(residues) * D.coset_size
    if field is None:
        raise ValueError("an explicit set needs its field")
    values = np.array(sorted({field.enc(x) for x in D}), dtype=np.int64)
    if values.size == 0:
        raise ValueError("D must be nonempty")
    if np.any(values == 0):
        raise ZeroInD()
    q1 = field.q - 1
    logs = field.log_table[values]
    quotients = np.unique((logs[:, None] - logs[None, :]) % q1)
    mask = np.zeros(q1, dtype=bool)
    for lg in logs:
        mask[(quotients - lg) % q1] = True
    return int(mask.sum())


def triple_quotient_hypothesis(D: Union[CosetUnion, Iterable[ElementLike]], field: Optional[FieldCtx] = None) -> bool:
    """|D D^{-1} D^{-1}| <= (q+1)/2."""
    ctx = D.field if isinstance(D, CosetUnion) else field
    return 2 * triple_quotient_size(D, field) <= ctx.q + 1
