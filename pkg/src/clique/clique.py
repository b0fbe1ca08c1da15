# src/clique/clique.py

"""
Cayley graphs on F_{q^2} whose connection set S is a union of cosets of the index-d
subgroup H with d | q+1, their size-q cliques through {0, 1}, and the reduction of a
clique to the graph of a function F_q -> F_q.

Vertices are element encodings. The clique search runs on the common neighbourhood
of 0 and 1 with Python ints as adjacency bitsets over that neighbourhood.
"""

import itertools
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.directions.directions import DirectionSet, directions_of_function, is_additive
from src.field.field_core import DEFAULT_FIELD_CAP, FieldCtx, build_field, embed_subfield
from src.field.mult_structure import CosetUnion, make_coset_union
from src.rigidity.search import check_corollary_lbp, check_lbp
from src.utils.errors import (IndexNotDividingQPlus1, IoFailure, NotAGraph, ParamOutOfRange,
                              SearchSpaceTooLarge, VInS)
from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_CLIQUE_MAX_Q = 17


@dataclass(frozen=True)
class CliqueInstance:
    p: int
    n: int
    d: int
    big: FieldCtx
    S: CosetUnion

    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def r(self) -> int:
        return self.S.r

    @property
    def fq_star_in_S(self) -> bool:
        # F_q^* lies in H because d | q+1
        return 0 in self.S.M

    @property
    def r_le_half(self) -> bool:
        return 2 * self.r <= self.d

    @cached_property
    def small(self) -> FieldCtx:
        return build_field(self.p, self.n)

    @cached_property
    def embedding(self) -> np.ndarray:
        return embed_subfield(self.small, self.big)

    def subfield(self) -> List[int]:
        return self.big.subfield_elements(self.n).tolist()

    def adjacent(self, x: int, y: int) -> bool:
        return x != y and bool(self.S.member_mask[self.big.sub(x, y)])

    def to_dict(self):
        return {"p": self.p, "n": self.n, "q": self.q, "d": self.d, "M": list(self.S.M),
                "big_field": self.big.to_dict()}


def make_instance(p: int, n: int, d: int, M: Iterable[int], field_cap: int = DEFAULT_FIELD_CAP) -> CliqueInstance:
    q = p ** n
    if d < 1 or (q + 1) % d:
        raise IndexNotDividingQPlus1(d, q)
    big = build_field(p, 2 * n, field_cap)
    S = make_coset_union(big, d, M)
    inst = CliqueInstance(p, n, d, big, S)
    if not inst.r_le_half:
        logger.info(f"S uses {inst.r} of {d} cosets, more than half")
    return inst


# ---------------------------------------------------------------- clique search
def _popcount(x: int) -> int:
    return bin(x).count("1")


def _color_bound(P: int, nbr: Sequence[int]) -> int:
    """Number of colours a greedy colouring of the candidate set P needs."""
    colors = 0
    uncolored = P
    while uncolored:
        colors += 1
        available = uncolored
        while available:
            low = available & -available
            v = low.bit_length() - 1
            uncolored &= ~low
            available &= ~low & ~nbr[v]
    return colors


def _expand(nbr: Sequence[int], target: int, chosen: List[int], P: int, out: List[List[int]]):
    size = len(chosen)
    if size == target:
        out.append(list(chosen))
        return
    if size + _popcount(P) < target or size + _color_bound(P, nbr) < target:
        return
    while P:
        low = P & -P
        v = low.bit_length() - 1
        P &= ~low
        chosen.append(v)
        _expand(nbr, target, chosen, P & nbr[v], out)
        chosen.pop()
        if size + _popcount(P) < target:
            break


def _clique_branch(nbr: Sequence[int], target: int, v: int, P: int) -> List[List[int]]:
    out: List[List[int]] = []
    _expand(nbr, target, [v], P, out)
    return out


def common_neighbourhood(inst: CliqueInstance) -> np.ndarray:
    """Vertices other than 0 and 1 adjacent to both, in encoding order."""
    big = inst.big
    member = inst.S.member_mask
    xs = np.arange(2, big.q, dtype=np.int64)
    keep = member[xs] & member[big.sub_vec(xs, 1)]
    return xs[keep]


def _adjacency_bits(inst: CliqueInstance, vertices: np.ndarray) -> List[int]:
    member = inst.S.member_mask
    nbr = []
    for x in vertices.tolist():
        adj = member[inst.big.sub_vec(vertices, x)]
        nbr.append(sum(1 << int(i) for i in np.flatnonzero(adj)))
    return nbr


def cliques_of_size_q_through_0_1(inst: CliqueInstance, max_q: int = DEFAULT_CLIQUE_MAX_Q,
                                  jobs: int = 1) -> List[List[int]]:
    """
    Every A with |A| = q, {0, 1} in A and A - A inside S plus 0, as sorted encoding lists
    in lexicographic order. Empty when 1 is not in S.
    """
    q = inst.q
    if q > max_q:
        raise SearchSpaceTooLarge(q * q, max_q * max_q)
    if not inst.fq_star_in_S:
        return []
    vertices = common_neighbourhood(inst)
    nbr = _adjacency_bits(inst, vertices)
    target = q - 2
    start = time.time()

    if target == 0:
        found = [[]]
    elif jobs <= 1:
        found = []
        _expand(nbr, target, [], (1 << len(nbr)) - 1, found)
    else:
        full = (1 << len(nbr)) - 1
        found = []
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {}
            for v in range(len(nbr)):
                higher = full & ~((1 << (v + 1)) - 1)
                futures[executor.submit(_clique_branch, nbr, target, v, higher & nbr[v])] = v
            for fut in as_completed(futures):
                found.extend(fut.result())

    cliques = sorted(sorted([0, 1] + [int(vertices[i]) for i in c]) for c in found)
    logger.info(f"Clique search on F_{q}^2 (d={inst.d}, M={list(inst.S.M)}): {len(vertices)} candidate vertices, "
                f"{len(cliques)} cliques of size {q} in {time.time() - start:.2f}s")
    return cliques


def cliques_naive(inst: CliqueInstance) -> List[List[int]]:
    """Reference: every (q-2)-subset of the common neighbourhood, checked pair by pair."""
    if not inst.fq_star_in_S:
        return []
    vertices = common_neighbourhood(inst).tolist()
    out = []
    for combo in itertools.combinations(vertices, inst.q - 2):
        if all(inst.adjacent(x, y) for x, y in itertools.combinations(combo, 2)):
            out.append(sorted([0, 1] + list(combo)))
    return sorted(out)


# ---------------------------------------------------------------- clique -> function graph
def default_v(inst: CliqueInstance) -> int:
    """Smallest encoding outside S and nonzero."""
    outside = np.flatnonzero(~inst.S.member_mask[1:]) + 1
    if outside.size == 0:
        raise VInS("S covers every nonzero element, no v is available")
    return int(outside[0])


@dataclass
class FunctionGraph:
    """f with pi(A) = {(x, f(x))} under pi(a + b v) = (a, b), plus the checks on it."""
    v: int
    table: np.ndarray
    directions: DirectionSet
    inclusion_ok: bool
    direction_bound_ok: bool
    additive: bool
    f_one_zero: bool
    failed: List[str] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


def clique_to_function_graph(inst: CliqueInstance, A: Sequence[int], v: Optional[int] = None) -> FunctionGraph:
    big, small = inst.big, inst.small
    q = inst.q
    if v is None:
        v = default_v(inst)
    v = big.enc(v)
    if v == 0 or inst.S.member_mask[v]:
        raise VInS(f"v={v} must be nonzero and outside S")
    emb = inst.embedding
    back = {int(z): x for x, z in enumerate(emb.tolist())}

    # z = a + b v with a, b in F_q: b = (z - z^q)/(v - v^q)
    zs = np.asarray(sorted(big.enc(z) for z in A), dtype=np.int64)
    den = big.sub(v, big.frobenius(v, inst.n))
    if den == 0:
        raise VInS(f"v={v} lies in F_{q}, so 1 and v are not a basis")
    b =big.div_vec(big.sub_vec(zs, big.frobenius_vec(zs, inst.n)), den)
    a = big.sub_vec(zs, big.mul_vec(b, v))

    table = np.full(q, -1, dtype=np.int64)
    for ai, bi in zip(a.tolist(), b.tolist()):
        x, y = back[ai], back[bi]
        if table[x] >= 0:
            raise NotAGraph(f"two points of A share the coordinate x={x}")
        table[x] = y
    if np.any(table < 0):
        raise NotAGraph(f"A has {len(zs)} elements, expected a graph over all {q} points")

    D = directions_of_function(small, table)
    slopes = emb[np.array(D.slopes(), dtype=np.int64)]
    images = big.add_vec(1, big.mul_vec(slopes, v))
    inclusion_ok = bool(np.all(inst.S.member_mask[images]))
    bound_ok = 2 * len(D) <= q + 1
    additive = is_additive(small, table)
    f_one_zero = int(table[1]) == 0

    failed = [name for name, ok in (("direction_inclusion", inclusion_ok), ("direction_bound", bound_ok),
                                    ("additive", additive), ("f_one_zero", f_one_zero)) if not ok]
    return FunctionGraph(v, table, D, inclusion_ok, bound_ok, additive, f_one_zero, failed)


def export_edge_list(inst: CliqueInstance, path: str) -> int:
    """Write the Cayley graph as a source,target CSV (each edge once); returns the edge count."""
    big = inst.big
    member = inst.S.member_mask
    frames = []
    for x in range(big.q - 1):
        ys = np.arange(x + 1, big.q, dtype=np.int64)
        ys = ys[member[big.sub_vec(ys, x)]]
        if ys.size:
            frames.append(pd.DataFrame({"source": x, "target": ys}))
    edges = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["source", "target"])
    try:
        edges.to_csv(path, index=False)
    except OSError as exc:
        raise IoFailure(f"could not write edge list to {path}: {exc}") from exc
    logger.info(f"Edge list with {len(edges)} edges written to {path}")
    return len(edges)


# ---------------------------------------------------------------- verification
class PipelineCheck(BaseModel):
    clique: List[int]
    table: List[int]
    directions: List[int]
    failed: List[str] = []


class CliqueReport(BaseModel):
    p: int
    n: int
    q: int
    d: int
    M: List[int]
    r: int
    mode: str
    fq_star_in_S: bool
    r_le_half: bool
    lbp: bool
    corollary_lbp: Optional[bool] = None
    theorem_applies: bool
    v: Optional[int] = None
    candidate_vertices: int = 0
    clique_count: int = 0
    subfield_found: bool = False
    cliques: List[List[int]] = []
    exceptions: List[List[int]] = []
    pipeline: List[PipelineCheck] = []
    violations: List[str] = []
    elapsed_seconds: float = 0.0


def _flag(check, *args) -> bool:
    try:
        return check(*args)
    except ParamOutOfRange:
        return False


def verify_thm_main2(inst: CliqueInstance, mode: str = "verify", max_q: int = DEFAULT_CLIQUE_MAX_Q,
                     jobs: int = 1) -> CliqueReport:
    """
    Enumerate the cliques and push each through the function-graph reduction.

    The subfield F_q is the only clique whenever S = H (a single coset, d >= 2), or
    when the clique-side p-bound holds with r <= d/2 and F_q^* inside S. In verify mode
    any other clique under those hypotheses is a THEOREM VIOLATION; in catalog mode it
    is recorded as data. Failed reduction checks with r <= d/2 are violations in both modes.
    """
    if mode not in ("verify", "catalog"):
        raise ParamOutOfRange(f"mode must be verify or catalog, got {mode!r}")
    start = time.time()
    q = inst.q
    lbp = _flag(check_lbp, inst.p, inst.n, inst.d, inst.r) if inst.r_le_half else False
    corollary = _flag(check_corollary_lbp, inst.p, inst.n, inst.d) if inst.n >= 2 else None
    subgroup_case = inst.S.M == (0,) and inst.d >= 2
    applies = subgroup_case or (lbp and inst.r_le_half and inst.fq_star_in_S)

    cliques = cliques_of_size_q_through_0_1(inst, max_q=max_q, jobs=jobs)
    subfield = sorted(inst.subfield())
    exceptions = [A for A in cliques if A != subfield]
    violations = []
    if inst.fq_star_in_S and subfield not in cliques:
        violations.append("the subfield F_q is missing from the clique list")
    if mode == "verify" and applies:
        for A in exceptions:
            violations.append(f"THEOREM VIOLATION: clique {A} differs from F_q")

    pipeline = []
    v = None
    if cliques and inst.r < inst.d:
        v = default_v(inst)
        for A in cliques:
            try:
                fg = clique_to_function_graph(inst, A, v)
                check = PipelineCheck(clique=A, table=fg.table.tolist(), directions=fg.directions.slopes(),
                                      failed=fg.failed)
            except NotAGraph as exc:
                check = PipelineCheck(clique=A, table=[], directions=[], failed=[f"not_a_graph: {exc}"])
            pipeline.append(check)
            if check.failed and inst.r_le_half:
                violations.append(f"reduction check failed for clique {A}: {', '.join(check.failed)}")

    report = CliqueReport(
        p=inst.p, n=inst.n, q=q, d=inst.d, M=list(inst.S.M), r=inst.r, mode=mode,
        fq_star_in_S=inst.fq_star_in_S, r_le_half=inst.r_le_half,
        lbp=lbp, corollary_lbp=corollary, theorem_applies=applies, v=v,
        candidate_vertices=int(common_neighbourhood(inst).size) if inst.fq_star_in_S else 0,
        clique_count=len(cliques), subfield_found=subfield in cliques,
        cliques=cliques, exceptions=exceptions, pipeline=pipeline, violations=violations,
        elapsed_seconds=time.time() - start,
    )
    logger.info(f"Clique report (q={q}, d={inst.d}, M={list(inst.S.M)}, mode={mode}): {len(cliques)} cliques, "
                f"{len(exceptions)} exceptions, {len(violations)} violations")
    return report
