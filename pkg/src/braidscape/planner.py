"""Motion planning for points on a sufficiently subdivided tree.

Unordered queries travel through the hub configuration (points on the first
`n` vertices): the start is pushed to the hub one point at a time, in
increasing order of the vertex number of each point's carrier, and the
target's hub path is played backwards. Ordered queries add a relabelling at
the hub built from adjacent swaps around the first essential vertex.

All times are exact rationals. Between two consecutive keyframes at most one
point moves, linearly along a single closed edge.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigurationParseError, PlannerError
from .models import KeyframeDocument, PathDocument
from .tree import Point, VertexOrder, geodesic, is_sufficiently_subdivided, parse_point, point_distance

LOGGER = logging.getLogger(__name__)

LIPSCHITZ_BOUND = 2


@dataclass(frozen=True, slots=True)
class Configuration:
    """Points of the tree with pairwise disjoint closed carriers.

    For ordered configurations the point at index `i` carries label `i + 1`.
    """

    points: tuple[Point, ...]
    ordered: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def n(self) -> int:
        return len(self.points)

    def is_valid(self, order: VertexOrder) -> bool:
        return _first_overlap(order, self.points) is None

    def canonical(self, order: VertexOrder) -> Configuration:
        """Points sorted by the vertex number of their carrier's lower end."""
        return Configuration(tuple(sorted(self.points, key=lambda p: p.sort_key(order))), self.ordered)

    def label(self, order: VertexOrder) -> str:
        return ",".join(p.label(order) for p in self.points)


def _first_overlap(order: VertexOrder, points: Sequence[Point]) -> tuple[int, int] | None:
    seen: dict[int, int] = {}
    for index, point in enumerate(points):
        for v in point.carrier(order):
            if v in seen:
                return seen[v], index
            seen[v] = index
    return None


def check_configuration(order: VertexOrder, x: Configuration) -> None:
    clash = _first_overlap(order, x.points)
    if clash is not None:
        a, b = clash
        raise PlannerError(
            f"Points {x.points[a].label(order)} and {x.points[b].label(order)} overlap."
        )


def parse_configuration(order: VertexOrder, text: str, *, ordered: bool = False) -> Configuration:
    """Parse a comma-separated list of point literals."""
    pieces = [piece for piece in text.split(",") if piece.strip()]
    if not pieces:
        raise ConfigurationParseError("A configuration needs at least one point.")
    config = Configuration(tuple(parse_point(order, piece) for piece in pieces), ordered)
    if not config.is_valid(order):
        raise ConfigurationParseError(f"Points of {text!r} must have disjoint closed carriers.")
    return config


def random_configuration(
    order: VertexOrder,
    n: int,
    rng: random.Random,
    *,
    ordered: bool = False,
) -> Configuration:
    """A random valid configuration, with edge parameters in eighths."""
    if n < 1:
        raise ValueError("n must be at least 1.")
    if n > order.size:
        raise PlannerError(f"A tree with {order.size} vertices holds at most {order.size} points.")
    free = set(range(order.size))
    points: list[Point] = []
    for placed in range(n):
        remaining = n - placed
        edges = [e for e in range(1, order.size) if e in free and order.parent[e] in free]
        if edges and len(free) - 2 >= remaining - 1 and rng.random() < 0.4:
            edge = rng.choice(edges)
            points.append(Point.inside(edge, Fraction(rng.randint(1, 7), 8)))
            free.difference_update((edge, order.parent[edge]))
        else:
            vertex = rng.choice(sorted(free))
            points.append(Point.at(vertex))
            free.discard(vertex)
    return Configuration(tuple(points), ordered)


def stratum(order: VertexOrder, x: Configuration) -> tuple[frozenset[int], int]:
    """Edges whose interiors carry a point, and how many there are."""
    edges = frozenset(p.edge for p in x.points if p.edge is not None)
    return edges, len(edges)


# -- paths ------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Keyframe:
    time: Fraction
    points: tuple[Point, ...]

    def to_document(self, order: VertexOrder) -> KeyframeDocument:
        return KeyframeDocument(
            time=f"{self.time.numerator}/{self.time.denominator}",
            points=[p.label(order) for p in self.points],
        )


@dataclass(frozen=True, slots=True)
class PlannedPath:
    """Keyframes over the time interval [0, 1]; `l` is the stratum index of the query."""

    keyframes: tuple[Keyframe, ...]
    ordered: bool = False
    l: int | None = None
    order: VertexOrder | None = field(default=None, repr=False, compare=False)

    @property
    def start(self) -> tuple[Point, ...]:
        return self.keyframes[0].points

    @property
    def end(self) -> tuple[Point, ...]:
        return self.keyframes[-1].points

    def at(self, time: Fraction | int | str) -> tuple[Point, ...]:
        """Positions of all points at `time`."""
        time = Fraction(time)
        if not 0 <= time <= 1:
            raise ValueError("Paths are parametrized over [0, 1].")
        frames = self.keyframes
        for before, after in zip(frames, frames[1:]):
            if before.time <= time <= after.time:
                if time == before.time or after.time == before.time:
                    return before.points
                if self.order is None:
                    raise PlannerError("Evaluating between keyframes needs the tree.")
                s = (time - before.time) / (after.time - before.time)
                return tuple(
                    _interpolate(self.order, p, q, s) for p, q in zip(before.points, after.points)
                )
        return frames[-1].points

    def reverse(self) -> PlannedPath:
        return PlannedPath(
            keyframes=tuple(Keyframe(1 - k.time, k.points) for k in reversed(self.keyframes)),
            ordered=self.ordered,
            l=self.l,
            order=self.order,
        )

    def to_document(self) -> PathDocument:
        if self.order is None:
            raise PlannerError("Serializing a path needs the tree.")
        return PathDocument(
            ordered=self.ordered,
            l=self.l if self.l is not None else 0,
            keyframes=[k.to_document(self.order) for k in self.keyframes],
        )


def _edge_coordinate(order: VertexOrder, point: Point, edge: int) -> Fraction:
    if point.edge is not None:
        return point.t
    return Fraction(0) if point.vertex == order.parent[edge] else Fraction(1)


def _common_edge(order: VertexOrder, p: Point, q: Point) -> int | None:
    if p.edge is not None and q.edge is not None:
        return p.edge if p.edge == q.edge else None
    if p.edge is not None:
        return p.edge if q.vertex in p.carrier(order) else None
    if q.edge is not None:
        return q.edge if p.vertex in q.carrier(order) else None
    if order.parent[p.vertex] == q.vertex:
        return p.vertex
    if order.parent[q.vertex] == p.vertex:
        return q.vertex
    return None


def _interpolate(order: VertexOrder, p: Point, q: Point, s: Fraction) -> Point:
    if p == q:
        return p
    edge = _common_edge(order, p, q)
    if edge is None:
        raise PlannerError(f"{p.label(order)} and {q.label(order)} do not share an edge.")
    a = _edge_coordinate(order, p, edge)
    b = _edge_coordinate(order, q, edge)
    t = a + s * (b - a)
    if t == 0:
        return Point.at(order.parent[edge])
    if t == 1:
        return Point.at(edge)
    return Point.inside(edge, t)


def _retime(frames: Sequence[Keyframe], start: Fraction, end: Fraction) -> list[Keyframe]:
    span = end - start
    return [Keyframe(start + k.time * span, k.points) for k in frames]


def _concat(parts: Sequence[PlannedPath], *, ordered: bool, l: int | None, order: VertexOrder) -> PlannedPath:
    width = Fraction(1, len(parts))
    frames: list[Keyframe] = []
    for index, part in enumerate(parts):
        piece = _retime(part.keyframes, index * width, (index + 1) * width)
        frames.extend(piece if index == 0 else piece[1:])
    return PlannedPath(keyframes=tuple(frames), ordered=ordered, l=l, order=order)


def _require_planner_tree(order: VertexOrder, n: int) -> None:
    if not is_sufficiently_subdivided(order.tree, n):
        raise PlannerError(f"The tree is not sufficiently subdivided for n={n}.")


# -- canonical paths ----------------------------------------------------------------


def canonical_path(order: VertexOrder, x: Configuration) -> PlannedPath:
    """Path from `x` to the hub: the i-th point (by carrier order) walks its
    geodesic to vertex `i - 1` at constant speed during [(i-1)/n, i/n].

    Points keep their index in `x`, so labels travel with them.
    """
    n = x.n
    _require_planner_tree(order, n)
    check_configuration(order, x)
    ranking = sorted(range(n), key=lambda i: x.points[i].sort_key(order))
    current = list(x.points)
    frames = [Keyframe(Fraction(0), tuple(current))]
    for stage, token in enumerate(ranking):
        begin, finish = Fraction(stage, n), Fraction(stage + 1, n)
        target = Point.at(stage)
        waypoints = [current[token]] if current[token] == target else list(
            geodesic(order, current[token], target)
        )
        lengths = [point_distance(order, a, b) for a, b in zip(waypoints, waypoints[1:])]
        total = sum(lengths, Fraction(0))
        travelled = Fraction(0)
        for point, length in zip(waypoints[1:], lengths):
            travelled += length
            current[token] = point
            time = begin + (finish - begin) * travelled / total
            frames.append(Keyframe(time, tuple(current)))
        if not lengths:
            frames.append(Keyframe(finish, tuple(current)))
    return PlannedPath(keyframes=tuple(frames), ordered=x.ordered, l=None, order=order)


def hub_arrangement(order: VertexOrder, x: Configuration) -> tuple[int, ...]:
    """Index of the point that `canonical_path` parks on each hub vertex."""
    return tuple(sorted(range(x.n), key=lambda i: x.points[i].sort_key(order)))


def plan_unordered(order: VertexOrder, x: Configuration, y: Configuration) -> PlannedPath:
    """Path from `x` to `y` through the hub; points are indexed in carrier order."""
    if x.n != y.n:
        raise PlannerError("Both configurations need the same number of points.")
    xs, ys = x.canonical(order), y.canonical(order)
    l = stratum(order, xs)[1] + stratum(order, ys)[1]
    path = _concat(
        [canonical_path(order, xs), canonical_path(order, ys).reverse()],
        ordered=False,
        l=l,
        order=order,
    )
    LOGGER.debug("Planned unordered path with %d keyframes (l=%d).", len(path.keyframes), l)
    return path


# -- ordered planning ----------------------------------------------------------------


class _Mover:
    """Moves tokens vertex by vertex and records a frame per edge step."""

    def __init__(self, order: VertexOrder, points: Sequence[Point]) -> None:
        self.order = order
        self.points = list(points)
        self.frames: list[tuple[Point, ...]] = [tuple(self.points)]

    def walk(self, token: int, target: int) -> None:
        start = self.points[token].vertex
        for v in self.order.path_between(start, target)[1:]:
            self.points[token] = Point.at(v)
            self.frames.append(tuple(self.points))

    def path(self, *, l: int | None = None) -> PlannedPath:
        steps = max(len(self.frames) - 1, 1)
        keyframes = [Keyframe(Fraction(i, steps), points) for i, points in enumerate(self.frames)]
        if len(keyframes) == 1:
            keyframes.append(Keyframe(Fraction(1), self.frames[0]))
        return PlannedPath(keyframes=tuple(keyframes), ordered=True, l=l, order=self.order)


def _swap_slots(mover: _Mover, slots: list[int], i: int, n: int) -> None:
    """Exchange the tokens on hub vertices `i` and `i + 1`, parking the tokens
    behind them on the second branch of the first essential vertex."""
    order = mover.order
    w = order.essential[0]
    first, second = order.children[w][0], order.children[w][1]
    branch = [second]
    while len(branch) < n - 1:
        branch.append(order.children[branch[-1]][0])
    parked = list(range(n - 1, i + 1, -1))
    for slot in parked:
        mover.walk(slots[slot], branch[slot - i - 1])
    a, b = slots[i], slots[i + 1]
    mover.walk(b, first)
    mover.walk(a, second)
    mover.walk(b, i)
    mover.walk(a, i + 1)
    for slot in reversed(parked):
        mover.walk(slots[slot], slot)
    slots[i], slots[i + 1] = b, a


def _rearrange(order: VertexOrder, start: Sequence[int], goal: Sequence[int]) -> PlannedPath:
    """Tokens on hub vertex `j` go from token `start[j]` to token `goal[j]`."""
    n = len(start)
    if sorted(start) != sorted(goal):
        raise PlannerError("Arrangements must hold the same tokens.")
    points = [Point.at(0)] * n
    for vertex, token in enumerate(start):
        points[token] = Point.at(vertex)
    mover = _Mover(order, points)
    slots = list(start)
    rank = {token: j for j, token in enumerate(goal)}
    for _ in range(n):
        for i in range(n - 1):
            if rank[slots[i]] > rank[slots[i + 1]]:
                _swap_slots(mover, slots, i, n)
    return mover.path()


def _require_essential(order: VertexOrder) -> None:
    if not order.essential:
        raise PlannerError(
            "Labelled points cannot be permuted on an interval: the tree has no essential vertex."
        )


def permutation_path(order: VertexOrder, n: int, permutation: Sequence[int]) -> PlannedPath:
    """Ordered path from label `j + 1` on hub vertex `j` to label
    `permutation[j] + 1` on hub vertex `j`."""
    if sorted(permutation) != list(range(n)):
        raise ValueError("permutation must rearrange 0..n-1.")
    _require_essential(order)
    _require_planner_tree(order, n)
    return _rearrange(order, list(range(n)), list(permutation))


def plan_ordered(order: VertexOrder, x: Configuration, y: Configuration) -> PlannedPath:
    """Labelled path from `x` to `y`: to the hub, relabel, then back out to `y`."""
    if x.n != y.n:
        raise PlannerError("Both configurations need the same number of points.")
    _require_essential(order)
    there = canonical_path(order, x)
    back = canonical_path(order, y)
    swap = _rearrange(order, hub_arrangement(order, x), hub_arrangement(order, y))
    l = stratum(order, x)[1] + stratum(order, y)[1]
    path = _concat(
        [there, swap, back.reverse()],
        ordered=True,
        l=l,
        order=order,
    )
    LOGGER.debug("Planned ordered path with %d keyframes (l=%d).", len(path.keyframes), l)
    return path


# -- validation ------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PathCheck:
    ok: bool
    index: int | None = None
    failure: str | None = None


def validate_path(order: VertexOrder, path: PlannedPath) -> PathCheck:
    """Check every keyframe and every motion between keyframes for disjoint carriers."""
    frames = path.keyframes
    if not frames:
        return PathCheck(False, None, "Path has no keyframes.")
    for index, frame in enumerate(frames):
        clash = _first_overlap(order, frame.points)
        if clash is not None:
            return PathCheck(False, index, f"Points {clash[0]} and {clash[1]} overlap at time {frame.time}.")
        if index == 0:
            continue
        before = frames[index - 1]
        if frame.time < before.time:
            return PathCheck(False, index, "Keyframe times decrease.")
        if len(frame.points) != len(before.points):
            return PathCheck(False, index, "The number of points changes.")
        moving = [i for i, (p, q) in enumerate(zip(before.points, frame.points)) if p != q]
        if not moving:
            continue
        if len(moving) > 1:
            return PathCheck(False, index, f"Points {moving} move at the same time.")
        token = moving[0]
        edge = _common_edge(order, before.points[token], frame.points[token])
        if edge is None:
            return PathCheck(False, index, f"Point {token} jumps between edges.")
        if frame.time == before.time:
            return PathCheck(False, index, f"Point {token} moves in zero time.")
        swept = frozenset((order.parent[edge], edge))
        for other, point in enumerate(frame.points):
            if other != token and point.carrier(order) & swept:
                return PathCheck(False, index, f"Point {token} sweeps over point {other}.")
    return PathCheck(True)


def path_distance(order: VertexOrder, x: Sequence[Point], y: Sequence[Point]) -> Fraction:
    """Sum of tree distances between corresponding points."""
    if len(x) != len(y):
        raise ValueError("Configurations differ in size.")
    return sum((point_distance(order, p, q) for p, q in zip(x, y)), Fraction(0))


def continuity_ratio(
    order: VertexOrder,
    first: PlannedPath,
    second: PlannedPath,
    inputs_distance: Fraction,
) -> Fraction:
    """Largest distance between two planned paths at their keyframe times,
    relative to the distance between their inputs."""
    times = sorted({k.time for k in first.keyframes} | {k.time for k in second.keyframes})
    worst = max(path_distance(order, first.at(t), second.at(t)) for t in times)
    if inputs_distance <= 0:
        raise ValueError("Inputs must differ.")
    return worst / inputs_distance



def nudge_within_stratum(
    order: VertexOrder,
    x: Configuration,
    step: Fraction = Fraction(1, 16),
) -> Configuration:
    """Shift every edge point by `step` along its edge, keeping the stratum.

    Points move towards `tau` unless that would reach it, in which case they
    move towards `iota`.
    """
    if not 0 < step < Fraction(1, 2):
        raise ValueError("step must lie strictly between 0 and 1/2.")
    points = []
    for p in x.points:
        if p.edge is None:
            points.append(p)
        else:
            t = p.t + step if p.t + step < 1 else p.t - step
            points.append(Point.inside(p.edge, t))
    return Configuration(tuple(points), x.ordered)


def continuity_holds(
    order: VertexOrder,
    first: PlannedPath,
    second: PlannedPath,
    inputs_distance: Fraction,
) -> bool:
    """True iff two plans from the same stratum stay within `LIPSCHITZ_BOUND` of each other."""
    ratio = continuity_ratio(order, first, second, inputs_distance)
    if ratio > LIPSCHITZ_BOUND:
        LOGGER.warning("Plans drift apart: ratio %s exceeds %d.", ratio, LIPSCHITZ_BOUND)
        return False
    return True
