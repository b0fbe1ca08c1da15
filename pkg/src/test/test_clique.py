# src/test/test_clique.py

import itertools
import os
import sys

import pandas as pd
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.clique.clique import (clique_to_function_graph, cliques_naive, cliques_of_size_q_through_0_1,
                               common_neighbourhood, default_v, export_edge_list, make_instance,
                               verify_thm_main2)
from src.utils.errors import IndexNotDividingQPlus1, NotAGraph, SearchSpaceTooLarge, VInS


def _small_instances(max_q):
    for p, n in [(2, 1), (3, 1), (2, 2), (5, 1)]:
        q = p ** n
        if q > max_q:
            continue
        for d in range(1, q + 2):
            if (q + 1) % d:
                continue
            for size in range(1, d + 1):
                for rest in itertools.combinations(range(1, d), size - 1):
                    yield p, n, d, (0,) + rest


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 3), (3, 1, 4), (2, 2, 5), (5, 1, 6)])
def test_subgroup_case_has_only_the_subfield(p, n, d):
    inst = make_instance(p, n, d, [0])
    cliques = cliques_of_size_q_through_0_1(inst)
    assert cliques == [sorted(inst.subfield())]


def test_branch_and_bound_matches_naive_enumeration():
    for p, n, d, M in _small_instances(5):
        inst = make_instance(p, n, d, M)
        assert cliques_of_size_q_through_0_1(inst) == cliques_naive(inst), (p, n, d, M)


def test_workers_match_serial_search():
    inst = make_instance(7, 1, 2, [0])
    assert cliques_of_size_q_through_0_1(inst, jobs=2) == cliques_of_size_q_through_0_1(inst)


def test_whole_group_gives_every_subset():
    inst = make_instance(3, 1, 2, [0, 1])
    cliques = cliques_of_size_q_through_0_1(inst)
    assert len(cliques) == 7
    assert all(c[:2] == [0, 1] for c in cliques)


def test_common_neighbourhood_of_paley_nine():
    inst = make_instance(3, 1, 2, [0])
    verts = common_neighbourhood(inst)
    for x in verts.tolist():
        assert inst.adjacent(x, 0) and inst.adjacent(x, 1)
    assert 2 in verts.tolist()


def test_no_cliques_when_one_is_not_adjacent():
    inst = make_instance(5, 1, 3, [1])
    assert not inst.fq_star_in_S
    assert cliques_of_size_q_through_0_1(inst) == []


def test_instance_errors():
    with pytest.raises(IndexNotDividingQPlus1):
        make_instance(3, 1, 3, [0])
    with pytest.raises(SearchSpaceTooLarge):
        cliques_of_size_q_through_0_1(make_instance(5, 1, 2, [0]), max_q=3)


def test_subfield_maps_to_zero_function():
    inst = make_instance(5, 1, 3, [0])
    fg = clique_to_function_graph(inst, inst.subfield())
    assert fg.ok
    assert fg.table.tolist() == [0] * 5
    assert fg.directions.slopes() == [0]


def test_function_graph_errors():
    inst = make_instance(3, 1, 2, [0])
    with pytest.raises(VInS):
        clique_to_function_graph(inst, inst.subfield(), v=1)
    with pytest.raises(NotAGraph):
        clique_to_function_graph(inst, [0, 1])
    v = default_v(inst)
    assert v not in inst.S.elements().tolist()
    assert v != 0


def test_verify_mode_report():
    report = verify_thm_main2(make_instance(3, 1, 2, [0]))
    assert report.theorem_applies
    assert report.subfield_found
    assert report.clique_count == 1
    assert report.violations == []
    assert all(not check.failed for check in report.pipeline)


def test_catalog_mode_keeps_exceptions_as_data():
    report = verify_thm_main2(make_instance(3, 1, 4, [0, 1]), mode="catalog")
    assert report.r_le_half
    assert report.subfield_found
    assert report.violations == []
    assert all(not check.failed for check in report.pipeline)


def test_export_edge_list(tmp_path):
    inst = make_instance(3, 1, 2, [0])
    path = tmp_path / "paley9.csv"
    assert export_edge_list(inst, str(path)) == 18
    edges = pd.read_csv(path)
    assert list(edges.columns) == ["source", "target"]
    assert (edges["source"] < edges["target"]).all()
