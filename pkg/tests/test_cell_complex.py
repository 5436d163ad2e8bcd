from __future__ import annotations

import pytest

from braidscape.cell_complex import (
    Cell,
    CellClass,
    Gradient,
    boundary,
    cell_census,
    classify_cell,
    count_cells,
    critical_cells,
    enumerate_cells,
    gradient_partner,
    is_blocked,
    is_order_disrespecting,
    morse_cycle,
    parse_cell,
    reduced_complex_dim,
)
from braidscape.errors import (
    CellCapExceededError,
    CellMembershipError,
    ConfigurationParseError,
    InsufficientSubdivisionError,
)
from braidscape.settings import BraidscapeLimits
from braidscape.tree import order_vertices, subdivide_for


def test_enumerate_path_pairs_of_vertices(make_path):
    order = order_vertices(make_path(2))

    cells = list(enumerate_cells(order, 2, {0}))

    # adjacent vertices are disjoint closed cells
    assert cells == [Cell.of([0, 1]), Cell.of([0, 2]), Cell.of([1, 2])]


def test_enumerate_single_point_gives_every_vertex(h_tree):
    order = order_vertices(h_tree)

    cells = list(enumerate_cells(order, 1, {0}))

    assert [c.vertices for c in cells] == [(v,) for v in range(order.size)]


def test_enumerate_y_has_no_two_cells_for_two_points(y_tree):
    order = order_vertices(y_tree)

    assert list(enumerate_cells(order, 2, {2})) == []
    assert count_cells(order, 2, 1) == 6
    assert len(list(enumerate_cells(order, 2, {0, 1}))) == 12


def test_enumerate_respects_cell_cap(y_tree):
    order = order_vertices(subdivide_for(y_tree, 3))

    with pytest.raises(CellCapExceededError, match="cap is 5"):
        next(enumerate_cells(order, 3, {0}, limits=BraidscapeLimits(max_cells=5)))


def test_enumerate_rejects_zero_points(y_tree):
    with pytest.raises(ValueError, match="n must be at least 1"):
        list(enumerate_cells(order_vertices(y_tree), 0, {0}))


def test_blocked_vertices(y_tree):
    order = order_vertices(y_tree)
    hub = Cell.of([0, 1])
    far = Cell.of([0, 3])

    assert is_blocked(order, hub, 0)
    assert is_blocked(order, hub, 1)
    assert not is_blocked(order, far, 3)


def test_blocked_requires_membership(y_tree):
    order = order_vertices(y_tree)

    with pytest.raises(CellMembershipError):
        is_blocked(order, Cell.of([0, 1]), 2)


def test_order_disrespecting_edges(y_tree):
    order = order_vertices(y_tree)

    assert is_order_disrespecting(order, Cell.of([2], [3]), 3)
    assert not is_order_disrespecting(order, Cell.of([3], [2]), 2)
    assert not is_order_disrespecting(order, Cell.of([], [3]), 3)

    with pytest.raises(CellMembershipError):
        is_order_disrespecting(order, Cell.of([2], [3]), 1)


def test_classify_cells_on_y(y_tree):
    order = order_vertices(y_tree)

    assert classify_cell(order, Cell.of([2], [3])) is CellClass.CRITICAL
    assert classify_cell(order, Cell.of([0, 1])) is CellClass.CRITICAL
    assert classify_cell(order, Cell.of([2], [1])) is CellClass.COLLAPSIBLE
    assert classify_cell(order, Cell.of([0, 2])) is CellClass.REDUNDANT


def test_census_partitions_cells(y_tree):
    order = order_vertices(y_tree)

    census = cell_census(order, 2, [0, 1])

    assert census[0] == {CellClass.CRITICAL: 1, CellClass.REDUNDANT: 5}
    assert census[1] == {CellClass.CRITICAL: 1, CellClass.COLLAPSIBLE: 5}


def test_census_pairs_redundant_with_collapsible(h_tree):
    order = order_vertices(subdivide_for(h_tree, 3))

    census = cell_census(order, 3, [0, 1, 2])

    for d in (0, 1):
        assert census[d][CellClass.REDUNDANT] == census[d + 1][CellClass.COLLAPSIBLE]
    assert census[0][CellClass.COLLAPSIBLE] == 0


def test_critical_cells_on_y_and_h(y_tree, h_tree):
    y_order = order_vertices(y_tree)
    h_order = order_vertices(h_tree)

    assert critical_cells(y_order, 2, 1) == [Cell.of([2], [3])]
    assert critical_cells(h_order, 2, 1) == [Cell.of([2], [3]), Cell.of([4], [5])]
    assert critical_cells(h_order, 2, 2) == []
    assert critical_cells(y_order, 2, 0) == [Cell.of([0, 1])]


@pytest.mark.parametrize(("tree_name", "n"), [("y", 3), ("h", 2), ("h", 3), ("star", 3)])
def test_critical_cells_match_classification(y_tree, h_tree, make_star, tree_name, n):
    tree = {"y": y_tree, "h": h_tree, "star": make_star(4)}[tree_name]
    order = order_vertices(subdivide_for(tree, n))

    for k in range(n + 1):
        built = set(critical_cells(order, n, k))
        classified = {
            cell
            for cell in enumerate_cells(order, n, {k})
            if classify_cell(order, cell) is CellClass.CRITICAL
        }
        assert built == classified


def test_critical_cells_need_subdivision(y_tree):
    with pytest.raises(InsufficientSubdivisionError):
        critical_cells(order_vertices(y_tree), 4, 1)


def test_reduced_complex_dim(y_tree, h_tree, make_path):
    assert reduced_complex_dim(order_vertices(y_tree), 2) == 1
    assert reduced_complex_dim(order_vertices(subdivide_for(make_path(1), 3)), 3) == 0
    assert reduced_complex_dim(order_vertices(subdivide_for(h_tree, 4)), 4) == 2


def test_parse_cell_members(y_tree):
    order = order_vertices(y_tree)

    cell = parse_cell(order, ["v:x1", "e:x2-c"])

    assert cell == Cell.of([2], [3])
    assert cell.members(order) == ["v:x1", "e:c-x2"]


@pytest.mark.parametrize("members", [["v:c", "e:c-x2"], ["v:nowhere"], ["x:c"]])
def test_parse_cell_rejects_bad_members(y_tree, members):
    with pytest.raises(ConfigurationParseError):
        parse_cell(order_vertices(y_tree), members)


def _chain_boundary(order, chain):
    total = {}
    for cell, coefficient in chain.items():
        for face, sign in boundary(order, cell):
            total[face] = total.get(face, 0) + coefficient * sign
    return {face: value for face, value in total.items() if value}


def test_boundary_squares_to_zero(h_tree):
    order = order_vertices(subdivide_for(h_tree, 4))

    for cell in enumerate_cells(order, 4, {2}):
        assert _chain_boundary(order, _chain_boundary(order, {cell: 1})) == {}


def test_gradient_partner_pairs_redundant_with_collapsible(y_tree):
    order = order_vertices(subdivide_for(y_tree, 3))

    for cell in enumerate_cells(order, 3, {0, 1}):
        partner = gradient_partner(order, cell)
        if classify_cell(order, cell) is CellClass.REDUNDANT:
            assert partner.dim == cell.dim + 1
            assert classify_cell(order, partner) is CellClass.COLLAPSIBLE
            assert (cell, Gradient(order)(cell)[1]) in boundary(order, partner)
        else:
            assert partner is None


@pytest.mark.parametrize(("name", "n", "k"), [("y", 3, 1), ("h", 2, 1), ("h", 4, 2), ("star", 3, 1)])
def test_morse_cycles_are_cycles(y_tree, h_tree, make_star, name, n, k):
    tree = {"y": y_tree, "h": h_tree, "star": make_star(4)}[name]
    order = order_vertices(subdivide_for(tree, n))
    gradient = Gradient(order)

    for cell in critical_cells(order, n, k):
        cycle = morse_cycle(order, cell, gradient=gradient)

        assert cycle[cell] == 1
        assert _chain_boundary(order, cycle) == {}
        for other in cycle:
            if other != cell:
                assert classify_cell(order, other) is CellClass.COLLAPSIBLE


def test_morse_cycle_errors(h_tree):
    order = order_vertices(subdivide_for(h_tree, 4))
    cell = critical_cells(order, 4, 2)[0]

    with pytest.raises(CellMembershipError):
        morse_cycle(order, Cell.of([1]))
    with pytest.raises(CellCapExceededError):
        morse_cycle(order, cell, limits=BraidscapeLimits(max_cells=1))
