from __future__ import annotations

import json
import logging
from fractions import Fraction

import pytest

from braidscape.errors import ConfigurationParseError, TreeValidationError
from braidscape.tree import (
    Point,
    direction,
    dump_tree,
    geodesic,
    is_sufficiently_subdivided,
    load_tree,
    order_vertices,
    parse_point,
    parse_tree,
    point_distance,
    stats,
    subdivide_for,
)


def _tree_text(rotation: dict[str, list[str]], base: str) -> str:
    return json.dumps({"vertices": list(rotation), "base": base, "rotation": rotation})


def test_parse_single_edge_tree():
    tree = parse_tree(_tree_text({"b": ["a"], "a": ["b"]}, "b"))

    assert len(tree.vertices) == 2
    assert tree.edges == (("a", "b"),)


def test_parse_y_tree_from_file(trees_dir):
    tree = load_tree(trees_dir / "y.json")

    assert tree.degree("c") == 3
    assert tree.base == "b"


def test_parse_rejects_base_of_degree_three():
    text = _tree_text({"c": ["b", "x", "y"], "b": ["c"], "x": ["c"], "y": ["c"]}, "c")

    with pytest.raises(TreeValidationError, match="degree 1"):
        parse_tree(text)


def test_parse_rejects_cycle():
    rotation = {"b": ["a"], "a": ["b", "c", "d"], "c": ["a", "d"], "d": ["c", "a"]}

    with pytest.raises(TreeValidationError, match="Cycle"):
        parse_tree(_tree_text(rotation, "b"))


def test_parse_rejects_asymmetric_rotation():
    with pytest.raises(TreeValidationError, match="Inconsistent rotation"):
        parse_tree(_tree_text({"b": ["a"], "a": ["b", "c"], "c": []}, "b"))


def test_parse_rejects_malformed_json():
    with pytest.raises(TreeValidationError, match="Malformed tree file"):
        parse_tree('{"vertices": ["b"]}')


def test_dump_tree_is_parseable(y_tree):
    assert parse_tree(dump_tree(y_tree)) == y_tree


def test_subdivide_keeps_sufficient_tree(y_tree):
    assert subdivide_for(y_tree, 2) is y_tree


def test_subdivide_y_for_four_points(y_tree):
    subdivided = subdivide_for(y_tree, 4)

    assert len(subdivided.vertices) == 10
    assert is_sufficiently_subdivided(subdivided, 4)
    assert not is_sufficiently_subdivided(y_tree, 4)


def test_subdivide_single_edge_for_three_points(make_path):
    subdivided = subdivide_for(make_path(1), 3)

    assert len(subdivided.vertices) == 3
    assert subdivided.degree("b") == 1


def test_order_vertices_on_path(make_path):
    order = order_vertices(make_path(2))

    assert order.ids == ("b", "p1", "p2")
    assert order.parent == (-1, 0, 1)


def test_order_vertices_on_subdivided_y(y_tree):
    order = order_vertices(subdivide_for(y_tree, 3))

    assert order.size == 7
    assert order.ids[0] == "b"
    assert order.ids[2] == "c"
    assert order.ids[4] == "x1"
    assert order.ids[6] == "x2"
    assert order.parent == (-1, 0, 1, 2, 3, 2, 5)
    assert order.essential == (2,)


def test_direction_at_y_center(y_tree):
    order = order_vertices(y_tree)

    assert direction(order, "c", ("c", "b")) == 0
    assert direction(order, "c", ("c", "x1")) == 1
    assert direction(order, "c", ("x2", "c")) == 2
    assert direction(order, "x1", ("c", "x1")) == 0


def test_direction_undefined_at_base(y_tree):
    order = order_vertices(y_tree)

    with pytest.raises(ValueError):
        direction(order, "b", ("b", "c"))


def test_geodesic_between_leaves_passes_center(y_tree):
    order = order_vertices(y_tree)
    x1, x2 = Point.at(order.number["x1"]), Point.at(order.number["x2"])

    assert geodesic(order, x1, x2) == (x1, Point.at(order.number["c"]), x2)
    assert geodesic(order, x1, x1) == ()
    assert point_distance(order, x1, x2) == 2


def test_geodesic_between_adjacent_vertices(y_tree):
    order = order_vertices(y_tree)

    assert geodesic(order, Point.at(0), Point.at(1)) == (Point.at(0), Point.at(1))


def test_geodesic_from_edge_point(y_tree):
    order = order_vertices(y_tree)
    start = Point.inside(1, Fraction(1, 4))

    waypoints = geodesic(order, start, Point.at(2))

    assert waypoints == (start, Point.at(1), Point.at(2))
    assert point_distance(order, start, Point.at(2)) == Fraction(7, 4)


def test_parse_point_measures_from_first_endpoint(y_tree):
    order = order_vertices(y_tree)

    assert parse_point(order, "v:x1") == Point.at(2)
    assert parse_point(order, "e:b-c@1/4") == Point.inside(1, Fraction(1, 4))
    assert parse_point(order, "e:c-b@1/4") == Point.inside(1, Fraction(3, 4))


@pytest.mark.parametrize("literal", ["v:nope", "e:b-x1@1/2", "e:b-c@3/2", "e:b-c@1/0", "b"])
def test_parse_point_rejects_bad_literals(y_tree, literal):
    order = order_vertices(y_tree)

    with pytest.raises(ConfigurationParseError):
        parse_point(order, literal)


def test_stats_path_reports_disconnected_ordered_space(make_path, caplog):
    with caplog.at_level(logging.WARNING, logger="braidscape.tree"):
        result = stats(make_path(2), 3)

    assert result.m == 0
    assert result.is_interval
    assert not result.ordered_connected
    assert result.unordered_connected
    assert "disconnected" in caplog.text


def test_stats_y_and_h_trees(y_tree, h_tree):
    y_stats = stats(y_tree, 2)
    h_stats = stats(h_tree, 2)

    assert (y_stats.m, y_stats.r, y_stats.s) == (1, 0, 1)
    assert y_stats.ordered_connected
    assert (h_stats.m, h_stats.r, h_stats.s) == (2, 0, 2)
    assert h_stats.to_document().essential == ["s1", "s2"]


def test_stats_counts_high_degree_vertices(make_star):
    result = stats(make_star(5), 2)

    assert (result.m, result.r, result.s) == (1, 1, 0)
