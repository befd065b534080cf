import random

import pytest

from metageo.errors import CapExceededError, InvalidInstanceError
from metageo.lattice_tsp import manhattan
from metageo.steiner import (
    GroupSteinerInstance,
    LatticeEdge,
    SteinerInstance,
    connects,
    dreyfus_wagner,
    edge_between,
    group_steiner_exact,
    group_steiner_via_representatives,
    induced_edge_count,
    instance_from_json,
    instance_to_json,
    mst_terminals_approx,
    mst_weight,
    random_groups,
    random_terminals,
    representative_reduction,
    rsmt_exact,
    staircase_edges,
    tree_from_json,
    tree_to_json,
)

from oracles import min_connecting_edges, min_steiner_edges

SQUARE = ((5, 0), (6, 0), (5, 1), (6, 1))


def test_lattice_edge_helpers():
    e = edge_between((1, 2), (1, 1))
    assert e == LatticeEdge((1, 1), 2)
    assert e.head == (1, 2)
    with pytest.raises(ValueError):
        edge_between((0, 0), (1, 1))
    assert len(staircase_edges((0, 0), (2, -3))) == 5


def test_dreyfus_wagner_small_graph():
    # path 0-1-2 with a heavy shortcut 0-2
    adj = [[(1, 1), (2, 5)], [(0, 1), (2, 1)], [(1, 1), (0, 5)]]
    cost, edges = dreyfus_wagner(3, adj, [0, 2])
    assert cost == 2
    assert sorted(tuple(sorted(e)) for e in edges) == [(0, 1), (1, 2)]


@pytest.mark.parametrize("terminals, expected", [
    (((0, 0), (1, 1)), 2),
    (((0, 0), (2, 0), (0, 2)), 4),
    (((0, 0), (2, 0), (1, 2)), 4),
])
def test_rsmt_examples(terminals, expected):
    assert min_steiner_edges(terminals) == expected
    tree = rsmt_exact(SteinerInstance(terminals))
    assert tree.total_length == expected
    assert connects(tree.edges, [[t] for t in terminals])


def test_steiner_gain_witness():
    inst = SteinerInstance(((0, 0), (2, 0), (1, 2)))
    assert mst_weight(inst) == 5
    assert mst_terminals_approx(inst).total_length == 5
    assert rsmt_exact(inst).total_length == 4


def test_single_terminal():
    inst = SteinerInstance(((3, 3),))
    assert rsmt_exact(inst).total_length == 0
    assert mst_terminals_approx(inst).edges == ()


def test_rsmt_two_terminals_is_manhattan():
    rng = random.Random(0)
    for _ in range(50):
        a = tuple(rng.randint(-5, 5) for _ in range(3))
        b = tuple(rng.randint(-5, 5) for _ in range(3))
        if a != b:
            assert rsmt_exact(SteinerInstance((a, b))).total_length == manhattan(a, b)


def test_rsmt_matches_exhaustive_box_search():
    """Hanan-grid restriction checked against the full bounding-box lattice in 2-D."""
    rng = random.Random(12)
    for _ in range(40):
        inst = random_terminals(rng, rng.randint(2, 4), span=3)
        assert rsmt_exact(inst).total_length == min_steiner_edges(inst.terminals, limit=10)


def test_rsmt_matches_group_solver_on_singletons():
    # the group solver searches every lattice point in the box, not just the Hanan grid
    rng = random.Random(13)
    for dim in (2, 3):
        for _ in range(30):
            inst = random_terminals(rng, rng.randint(2, 6), dim=dim, span=4)
            groups = GroupSteinerInstance(tuple((t,) for t in inst.terminals))
            assert rsmt_exact(inst).total_length == group_steiner_exact(groups).total_length


def test_mst_ratio_200_instances():
    rng = random.Random(21)
    for _ in range(200):
        inst = random_terminals(rng, rng.randint(1, 8))
        opt = rsmt_exact(inst).total_length
        approx = mst_terminals_approx(inst)
        assert opt <= approx.total_length <= mst_weight(inst) <= 2 * opt
        assert connects(approx.edges, [[t] for t in inst.terminals])


def test_rsmt_cap():
    inst = random_terminals(random.Random(0), 5)
    with pytest.raises(CapExceededError):
        rsmt_exact(inst, cap=4)


def test_group_examples():
    assert group_steiner_exact(GroupSteinerInstance((((0, 0), (0, 1)),))).total_length == 0
    assert group_steiner_exact(GroupSteinerInstance((((0, 0),), ((1, 0),)))).total_length == 1
    inst = GroupSteinerInstance((((0, 0),), SQUARE))
    assert min_connecting_edges(inst.groups) == 5
    assert group_steiner_exact(inst).total_length == 5


def test_group_exact_matches_exhaustive_search():
    rng = random.Random(31)
    checked = 0
    while checked < 40:
        inst = random_groups(rng, rng.randint(2, 3), span=3, max_group_size=3)
        expected = min_connecting_edges(inst.groups, margin=1, limit=5)
        if expected is None:
            continue
        assert group_steiner_exact(inst).total_length == expected
        checked += 1


def test_margin_does_not_change_optimum():
    rng = random.Random(32)
    for _ in range(30):
        inst = random_groups(rng, rng.randint(2, 4), span=5)
        base = group_steiner_exact(inst, box_margin=0).total_length
        assert group_steiner_exact(inst, box_margin=2).total_length == base


def test_group_instance_validation():
    with pytest.raises(InvalidInstanceError):
        GroupSteinerInstance((((0, 0), (2, 0)),))
    with pytest.raises(InvalidInstanceError):
        GroupSteinerInstance((((0, 0),), ((0, 0), (1, 0))))
    with pytest.raises(InvalidInstanceError):
        GroupSteinerInstance(((),))


def test_group_caps():
    inst = GroupSteinerInstance((((0, 0),), ((40, 40),)))
    with pytest.raises(CapExceededError):
        group_steiner_exact(inst, max_vertices=100)
    inst = GroupSteinerInstance(tuple(((2 * i, 0),) for i in range(5)))
    with pytest.raises(CapExceededError):
        group_steiner_exact(inst, max_groups=4)


def test_representatives():
    assert representative_reduction(GroupSteinerInstance((((2, 1), (1, 1)),))).terminals == ((1, 1),)
    singles = GroupSteinerInstance((((0, 0),), ((3, 1),)))
    assert representative_reduction(singles).terminals == ((0, 0), (3, 1))
    inst = GroupSteinerInstance((((0, 0),), SQUARE))
    assert representative_reduction(inst) == representative_reduction(inst)


def test_via_representatives_examples():
    assert group_steiner_via_representatives(GroupSteinerInstance((SQUARE,))).total_length == 0
    inst = GroupSteinerInstance((((0, 0),), SQUARE))
    assert representative_reduction(inst).terminals == ((0, 0), (5, 0))
    assert group_steiner_via_representatives(inst, "exact").total_length == 5


def test_representative_bound_200_instances():
    rng = random.Random(41)
    for _ in range(200):
        inst = random_groups(rng, rng.randint(2, 5))
        exact = group_steiner_exact(inst).total_length
        sizes = sum(induced_edge_count(g) for g in inst.groups)
        spans = sum(len(g) - 1 for g in inst.groups)
        for inner in ("exact", "mst"):
            q1 = group_steiner_via_representatives(inst, inner).total_length
            assert exact <= q1
        q1 = group_steiner_via_representatives(inst, "exact").total_length
        assert q1 <= exact + spans <= exact + sizes


def test_json_round_trips():
    inst = SteinerInstance(((0, 0), (2, 0), (1, 2)))
    assert instance_from_json(instance_to_json(inst)) == inst
    groups = GroupSteinerInstance((((0, 0),), SQUARE))
    assert instance_from_json(instance_to_json(groups)) == groups
    tree = rsmt_exact(inst)
    assert tree_from_json(tree_to_json(tree)) == tree
    assert tree_to_json(tree)["edges"][0] == {"base": [0, 0], "axis": 1}
    with pytest.raises(InvalidInstanceError):
        instance_from_json({"points": []})
