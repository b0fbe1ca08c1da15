# src/rigidity/example.py

"""
The small exceptional configuration over F_25: f(x) = x + u x^5 with u^2 = 2 is
additive, not of the form a x^{p^j} + b, and its six directions fit in three cosets
of F_5^* although the field is far below the rigidity bound.
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel

from src.directions.directions import (LinearizedMap, directions_of_additive, directions_of_function,
                                       is_additive, is_frobenius_linear, triple_quotient_size)
from src.field.field_core import FieldCtx, build_field
from src.field.mult_structure import coset_union_from_elements, power_residue_subgroup
from src.rigidity.search import check_p_bound
from src.utils.logger import get_logger

logger = get_logger(__name__)

# (a, b) meaning a + b u
FOURTH_POWERS = [(1, 0), (-1, 0), (2, 2), (2, -2), (3, 2), (3, -2)]
EXAMPLE_DIRECTIONS = [(0, 2), (0, 3), (1, 1), (1, -1), (2, 2), (2, -2)]
COSET_REPRESENTATIVES = [(0, 1), (1, 1), (1, -1)]


class F25ExampleReport(BaseModel):
    field: dict
    u: int
    fourth_powers: List[int]
    fourth_powers_expected: List[int]
    fourth_powers_match: bool
    directions: List[int]
    directions_expected: List[int]
    directions_match: bool
    directions_labels: List[str]
    d: int
    M: List[int]
    directions_in_D: bool
    frobenius_witness: Optional[List[int]] = None
    additive: bool
    triple_quotient_size: int
    p_bound: bool
    violations: List[str] = []


def sqrt_of_two(field: FieldCtx) -> int:
    """The smallest encoding u with u^2 = 2."""
    for x in range(field.q):
        if field.mul(x, x) == 2 % field.p:
            return x
    raise ValueError(f"2 is not a square in F_{field.q}")


def from_u_basis(field: FieldCtx, u: int, pairs: List[Tuple[int, int]]) -> List[int]:
    return sorted(field.add(a % field.p, field.mul(b % field.p, u)) for a, b in pairs)


def in_u_basis(field: FieldCtx, u: int, x: int) -> str:
    """Write x = a + b u; u has a nonzero t-coefficient so the split is unique."""
    c0, c1 = field.coeffs(x)
    u0, u1 = field.coeffs(u)
    b = (c1 * pow(u1, -1, field.p)) % field.p
    a = (c0 - b * u0) % field.p
    if b == 0:
        return str(a)
    tail = "u" if b == 1 else f"{b}u"
    return tail if a == 0 else f"{a}+{tail}"


def reproduce_f25_example() -> F25ExampleReport:
    field = build_field(5, 2)
    u = sqrt_of_two(field)
    f = LinearizedMap.of(field, [1, u])
    table = f.table()

    fourth = sorted(power_residue_subgroup(field, 4).elements().tolist())
    dirs = directions_of_additive(f)
    if dirs != directions_of_function(field, table):
        raise AssertionError("additive directions disagree with the full table")
    expected_dirs = from_u_basis(field, u, EXAMPLE_DIRECTIONS)

    reps = from_u_basis(field, u, COSET_REPRESENTATIVES)
    D = coset_union_from_elements(field, 6, reps)
    witness = is_frobenius_linear(field, table)

    report = F25ExampleReport(
        field=field.to_dict(),
        u=u,
        fourth_powers=fourth,
        fourth_powers_expected=from_u_basis(field, u, FOURTH_POWERS),
        fourth_powers_match=fourth == from_u_basis(field, u, FOURTH_POWERS),
        directions=dirs.slopes(),
        directions_expected=expected_dirs,
        directions_match=dirs.slopes() == expected_dirs,
        directions_labels=[in_u_basis(field, u, s) for s in dirs.slopes()],
        d=D.d,
        M=list(D.M),
        directions_in_D=dirs.issubset(D),
        frobenius_witness=list(witness) if witness else None,
        additive=is_additive(field, table),
        triple_quotient_size=triple_quotient_size(D),
        p_bound=check_p_bound(5, 2, D.d, D.r),
    )
    for name in ("fourth_powers_match", "directions_match", "directions_in_D", "additive"):
        if not getattr(report, name):
            report.violations.append(f"F_25 example check failed: {name}")
    if report.frobenius_witness is not None:
        report.violations.append("F_25 example check failed: f is Frobenius-linear")
    logger.info(f"F_25 example: u={u}, directions {report.directions_labels}, D exponents {report.M} (d=6)")
    return report
