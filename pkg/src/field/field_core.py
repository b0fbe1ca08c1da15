# src/field/field_core.py

"""
Explicit finite fields F_{p^n} in polynomial representation.

Elements are handled as canonical integer encodings e(x) = sum c_i p^i of their
coefficient vectors (c_0, ..., c_{n-1}). A FieldCtx is fully materialized: it
carries the exp/log tables of its primitive root and a Zech table, so scalar
multiplication, inversion, powers and addition are all O(1) table reads.
Vectorized variants (`*_vec`) work on numpy arrays of encodings.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from src.utils.errors import DegreeZero, DivisionByZero, FieldTooLarge, LogOfZero, NonPrime
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_FIELD_CAP = 2 ** 22

_T = sympy.Symbol("t")


def _poly_mulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> List[int]:
    """Product of two digit vectors modulo the monic modulus (low-to-high coefficients)."""
    n = len(modulus) - 1
    prod = [0] * (2 * n - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(2 * n - 2, n - 1, -1):
        c = prod[k]
        if c:
            for i in range(n):
                prod[k - n + i] = (prod[k - n + i] - c * modulus[i]) % p
            prod[k] = 0
    return prod[:n]


def _poly_powmod(a: Sequence[int], e: int, modulus: Sequence[int], p: int) -> List[int]:
    n = len(modulus) - 1
    result = [1] + [0] * (n - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, modulus, p)
        base = _poly_mulmod(base, base, modulus, p)
        e >>= 1
    return result


def _is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """coeffs are low-to-high, monic."""
    n = len(coeffs) - 1
    if n == 1:
        return True
    if n <= 3:
        # a polynomial of degree <= 3 is irreducible iff it has no root
        return all(sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p for x in range(p))
    poly = sympy.Poly(list(reversed(coeffs)), _T, modulus=p)
    return bool(poly.is_irreducible)


def minimal_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """
    The monic irreducible polynomial of degree n over F_p that comes first in the
    encoding order of its coefficient vector (c_0, ..., c_{n-1}).
    Returned low-to-high including the leading 1.
    """
    for k in range(p ** n):
        coeffs = [(k // p ** i) % p for i in range(n)] + [1]
        if _is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError(f"no irreducible polynomial of degree {n} over F_{p}")  # unreachable


class FieldCtx:
    """
    A fully materialized finite field F_{p^n}.

    Immutable after construction: the numpy tables are flagged read-only and the
    Python list mirrors are never mutated, so a FieldCtx can be shared freely.
    """

    def __init__(self, p: int, n: int, modulus: Tuple[int, ...], g: int,
                 exp_table: np.ndarray, log_table: np.ndarray, zech_table: np.ndarray):
        self.p = p
        self.n = n
        self.q = p ** n
        self.modulus = modulus
        self.g = g
        self.exp_table = exp_table
        self.log_table = log_table
        self.zech_table = zech_table
        for table in (exp_table, log_table, zech_table):
            table.flags.writeable = False
        self._powers = np.array([p ** i for i in range(n)], dtype=np.int64)
        self._exp = exp_table.tolist()
        self._log = log_table.tolist()
        self._zech = zech_table.tolist()
        self._half = (self.q - 1) // 2 if p != 2 else 0

    # ------------------------------------------------------------------ identity
    def key(self) -> Tuple[int, int, Tuple[int, ...], int]:
        return (self.p, self.n, self.modulus, self.g)

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"FieldCtx(p={self.p}, n={self.n}, modulus={self.modulus}, g={self.g})"

    def __reduce__(self):
        return (build_field, (self.p, self.n, max(self.q, DEFAULT_FIELD_CAP)))

    def to_dict(self) -> Dict:
        return {"p": self.p, "n": self.n, "q": self.q, "modulus": list(self.modulus), "g": self.g}

    # ------------------------------------------------------------------ encodings
    def enc(self, x: Union["Element", int]) -> int:
        value = x.value if isinstance(x, Element) else int(x)
        if not 0 <= value < self.q:
            raise ValueError(f"encoding {value} is outside [0, {self.q})")
        return value

    def element(self, value: Union["Element", int]) -> "Element":
        return Element(self, self.enc(value))

    def from_coeffs(self, coeffs: Sequence[int]) -> "Element":
        if len(coeffs) > self.n:
            raise ValueError(f"expected at most {self.n} coefficients, got {len(coeffs)}")
        return Element(self, sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs)))

    def coeffs(self, x: Union["Element", int]) -> Tuple[int, ...]:
        value = self.enc(x)
        return tuple((value // self.p ** i) % self.p for i in range(self.n))

    def digits_vec(self, a) -> np.ndarray:
        """Coefficient matrix (len(a), n) of an array of encodings."""
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def nonzero(self) -> np.ndarray:
        return np.arange(1, self.q, dtype=np.int64)

    @property
    def one(self) -> "Element":
        return Element(self, 1)

    @property
    def zero(self) -> "Element":
        return Element(self, 0)

    @property
    def generator(self) -> "Element":
        return Element(self, self.g)

    # ------------------------------------------------------------------ scalar arithmetic
    def add(self, x: int, y: int) -> int:
        if x == 0:
            return y
        if y == 0:
            return x
        q1 = self.q - 1
        lx = self._log[x]
        z = self._zech[(self._log[y] - lx) % q1]
        if z < 0:
            return 0
        return self._exp[(lx + z) % q1]

    def neg(self, x: int) -> int:
        if x == 0 or self.p == 2:
            return x
        return self._exp[(self._log[x] + self._half) % (self.q - 1)]

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        return self._exp[(self._log[x] + self._log[y]) % (self.q - 1)]

    def inv(self, x: int) -> int:
        if x == 0:
            raise DivisionByZero("inverse of zero")
        return self._exp[(-self._log[x]) % (self.q - 1)]

    def div(self, x: int, y: int) -> int:
        if y == 0:
            raise DivisionByZero("division by zero")
        if x == 0:
            return 0
        return self._exp[(self._log[x] - self._log[y]) % (self.q - 1)]

    def pow(self, x: int, k: int) -> int:
        if x == 0:
            if k > 0:
                return 0
            if k == 0:
                return 1
            raise DivisionByZero("negative power of zero")
        return self._exp[(self._log[x] * k) % (self.q - 1)]

    def log(self, x: int) -> int:
        if x == 0:
            raise LogOfZero()
        return self._log[x]

    def exp(self, e: int) -> int:
        return self._exp[e % (self.q - 1)]

    def frobenius(self, x: int, j: int = 1) -> int:
        if x == 0:
            return 0
        return self._exp[(self._log[x] * pow(self.p, j % self.n, self.q - 1)) % (self.q - 1)]

    # ------------------------------------------------------------------ vector arithmetic
    def add_vec(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for w in self._powers:
            out += (((a // w) + (b // w)) % self.p) * w
        return out

    def sub_vec(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for w in self._powers:
            out += (((a // w) - (b // w)) % self.p) * w
        return out

    def neg_vec(self, a) -> np.ndarray:
        return self.sub_vec(0, a)

    def mul_vec(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        e = (self.log_table[a] + self.log_table[b]) % (self.q - 1)
        return np.where((a == 0) | (b == 0), 0, self.exp_table[e])

    def inv_vec(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("inverse of zero")
        return self.exp_table[(-self.log_table[a]) % (self.q - 1)]

    def div_vec(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if np.any(b == 0):
            raise DivisionByZero("division by zero")
        e = (self.log_table[a] - self.log_table[b]) % (self.q - 1)
        return np.where(a == 0, 0, self.exp_table[e])

    def pow_vec(self, a, k: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if k < 0 and np.any(a == 0):
            raise DivisionByZero("negative power of zero")
        e = (self.log_table[a] * (k % (self.q - 1))) % (self.q - 1)
        zero_value = 1 if k == 0 else 0
        return np.where(a == 0, zero_value, self.exp_table[e])

    def frobenius_vec(self, a, j: int = 1) -> np.ndarray:
        return self.pow_vec(a, self.p ** (j % self.n))

    def log_vec(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise LogOfZero()
        return self.log_table[a]

    # ------------------------------------------------------------------ subfields
    def subfield_elements(self, e: int) -> np.ndarray:
        """Sorted encodings of the subfield F_{p^e} (e must divide n)."""
        if self.n % e:
            raise ValueError(f"{e} does not divide the extension degree {self.n}")
        step = (self.q - 1) // (self.p ** e - 1)
        return np.sort(np.concatenate(([0], self.exp_table[::step])))

    def minimal_subfield_degree(self, x: int) -> int:
        """Degree over F_p of F_p[x]."""
        return min(subfield_profile(self, x))


@dataclass(frozen=True)
class Element:
    """A field element: the owning FieldCtx plus its canonical encoding."""
    field: FieldCtx
    value: int

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return self.field.coeffs(self.value)

    def _other(self, y) -> int:
        return self.field.enc(y)

    def __add__(self, y):
        return Element(self.field, self.field.add(self.value, self._other(y)))

    __radd__ = __add__

    def __sub__(self, y):
        return Element(self.field, self.field.sub(self.value, self._other(y)))

    def __rsub__(self, y):
        return Element(self.field, self.field.sub(self._other(y), self.value))

    def __mul__(self, y):
        return Element(self.field, self.field.mul(self.value, self._other(y)))

    __rmul__ = __mul__

    def __truediv__(self, y):
        return Element(self.field, self.field.div(self.value, self._other(y)))

    def __neg__(self):
        return Element(self.field, self.field.neg(self.value))

    def __pow__(self, k: int):
        return Element(self.field, self.field.pow(self.value, k))

    def inverse(self) -> "Element":
        return Element(self.field, self.field.inv(self.value))

    def frobenius(self, j: int = 1) -> "Element":
        return Element(self.field, self.field.frobenius(self.value, j))

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "t" if i == 1 else f"t^{i}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(reversed(terms)) if terms else "0"


def _mul_matrix(h: Sequence[int], modulus: Sequence[int], p: int) -> np.ndarray:
    """Row i holds the digits of h * t^i, so that digits(x*h) = digits(x) @ M mod p."""
    n = len(modulus) - 1
    rows = []
    cur = list(h)
    t = [0, 1] + [0] * (n - 2) if n > 1 else [0]
    for _ in range(n):
        rows.append(list(cur))
        cur = _poly_mulmod(cur, t, modulus, p) if n > 1 else [0]
    return np.array(rows, dtype=np.int64)


def _find_primitive_root(p: int, n: int, modulus: Sequence[int]) -> List[int]:
    q = p ** n
    exponents = [(q - 1) // ell for ell in sympy.primefactors(q - 1)]
    one = [1] + [0] * (n - 1)
    for k in range(1, q):
        digits = [(k // p ** i) % p for i in range(n)]
        if all(_poly_powmod(digits, e, modulus, p) != one for e in exponents):
            return digits
    raise AssertionError("no primitive root found")  # unreachable


@lru_cache(maxsize=128)
def build_field(p: int, n: int, cap: int = DEFAULT_FIELD_CAP) -> FieldCtx:
    """
    Deterministically build F_{p^n}: minimal irreducible modulus in encoding
    order, minimal-encoding primitive root, full exp/log/Zech tables.
    """
    if not sympy.isprime(p):
        raise NonPrime(p)
    if n < 1:
        raise DegreeZero(n)
    q = p ** n
    if q > cap:
        raise FieldTooLarge(q, cap)

    modulus = minimal_irreducible(p, n)
    g_digits = _find_primitive_root(p, n, modulus)
    powers = np.array([p ** i for i in range(n)], dtype=np.int64)
    q1 = q - 1

    # exp table in blocks: a sequential prefix g^0..g^{B-1}, then whole blocks
    # multiplied by g^B as a linear map over F_p
    block = max(1, min(q1, isqrt(q1)))
    prefix = np.empty((block, n), dtype=np.int64)
    cur = [1] + [0] * (n - 1)
    for e in range(block):
        prefix[e] = cur
        cur = _poly_mulmod(cur, g_digits, modulus, p)
    step = _mul_matrix(cur, modulus, p)
    chunks = [prefix]
    produced = block
    current = prefix
    while produced < q1:
        current = (current @ step) % p
        chunks.append(current)
        produced += block
    exp_table = (np.concatenate(chunks)[:q1] @ powers).astype(np.int64)

    log_table = np.full(q, -1, dtype=np.int64)
    log_table[exp_table] = np.arange(q1, dtype=np.int64)
    if np.any(log_table[1:] < 0):
        raise AssertionError("exp table is not a bijection onto the nonzero elements")

    # zech[k] = log(1 + g^k), -1 when 1 + g^k = 0
    d0 = exp_table % p
    one_plus = np.where(d0 == p - 1, exp_table - (p - 1), exp_table + 1)
    zech_table = log_table[one_plus]

    g = int(sum(c * p ** i for i, c in enumerate(g_digits)))
    logger.info(f"Built F_{p}^{n} (q={q}): modulus={list(modulus)}, g={g}")
    return FieldCtx(p, n, modulus, g, exp_table, log_table, zech_table)



_BINARY_OPS = {
    "add": FieldCtx.add,
    "sub": FieldCtx.sub,
    "mul": FieldCtx.mul,
    "div": FieldCtx.div,
}


def field_arith(x: Element, y: Optional[Element], op: str, k: Optional[int] = None) -> Element:
    """Dispatch one of add, sub, mul, div, neg, inv, pow on field elements."""
    ctx = x.field
    if op in _BINARY_OPS:
        return Element(ctx, _BINARY_OPS[op](ctx, x.value, ctx.enc(y)))
    if op == "neg":
        return -x
    if op == "inv":
        return x.inverse()
    if op == "pow":
        if k is None:
            raise ValueError("pow requires an exponent k")
        return x ** k
    raise ValueError(f"unknown field operation {op!r}")


def frobenius(x: Element, j: int) -> Element:
    return x.frobenius(j)


def discrete_log(x: Union[Element, int], field: Optional[FieldCtx] = None) -> int:
    ctx = x.field if isinstance(x, Element) else field
    if ctx is None:
        raise ValueError("an integer encoding needs its field")
    return ctx.log(ctx.enc(x))


def subfield_profile(field: FieldCtx, x: Union[Element, int]) -> List[int]:
    """Divisors e of n with x in F_{p^e}, i.e. x^{p^e} = x."""
    value = field.enc(x)
    return [e for e in sympy.divisors(field.n) if field.frobenius(value, e) == value]


def iter_elements(field: FieldCtx) -> Iterable[Element]:
    for value in range(field.q):
        yield Element(field, value)


def split_prime_power(q: int) -> Tuple[int, int]:
    """(p, n) with q = p^n."""
    factors = sympy.factorint(q) if q >= 2 else {}
    if len(factors) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, n), = factors.items()
    return int(p), int(n)


def embed_subfield(small: FieldCtx, big: FieldCtx) -> np.ndarray:
    """
    emb[x] = image in `big` of the `small` element with encoding x, for a field
    embedding F_{p^m} -> F_{p^n} (m | n) sending t to the smallest root of small's modulus.
    """
    if small.p != big.p or big.n % small.n:
        raise ValueError(f"F_{small.q} is not a subfield of F_{big.q}")
    candidates = big.subfield_elements(small.n)
    root = None
    for z in candidates.tolist():
        acc = 0
        for c in reversed(small.modulus):
            acc = big.add(big.mul(acc, z), c)
        if acc == 0:
            root = z
            break
    if root is None:
        raise AssertionError("modulus has no root in the subfield")  # unreachable
    powers = np.array([big.pow(root, i) for i in range(small.n)], dtype=np.int64)
    emb = np.zeros(small.q, dtype=np.int64)
    digits = small.digits_vec(small.elements())
    for i in range(small.n):
        emb = big.add_vec(emb, big.mul_vec(digits[:, i], powers[i]))
    return emb
