"""Planar trees, sufficient subdivision, vertex numbering, directions and geodesics.

Vertex ids are strings in files and documents. Everything downstream of
`order_vertices` works with vertex numbers: `0` is the base vertex and every
other vertex `v` owns exactly one edge `e_v` (its edge toward the base), so an
edge is identified by the number of its larger endpoint `tau`.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType

import networkx as nx
from pydantic import ValidationError

from .errors import ConfigurationParseError, TreeValidationError
from .models import StatsDocument, TreeDocument

LOGGER = logging.getLogger(__name__)

_FORBIDDEN_ID_CHARS = (",", "@")


@dataclass(frozen=True, slots=True, eq=False)
class Tree:
    """A finite tree with a clockwise rotation system and a degree-1 base vertex.

    Args:
        vertices: Vertex ids.
        rotation: Per vertex, the clockwise cyclic sequence of neighbor ids.
        base: The basepoint, which must have degree exactly 1.

    Raises:
        TreeValidationError: If the data does not describe such a tree.
    """

    vertices: tuple[str, ...]
    rotation: Mapping[str, tuple[str, ...]]
    base: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self,
            "rotation",
            MappingProxyType({v: tuple(ns) for v, ns in self.rotation.items()}),
        )
        _validate_tree(self)

    def degree(self, vertex: str) -> int:
        return len(self.rotation[vertex])

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        pairs = {tuple(sorted((u, v))) for u, ns in self.rotation.items() for v in ns}
        return tuple(sorted(pairs))

    def to_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.edges)
        return graph

    def to_document(self) -> TreeDocument:
        return TreeDocument(
            vertices=list(self.vertices),
            base=self.base,
            rotation={v: list(self.rotation[v]) for v in self.vertices},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (
            self.base == other.base
            and set(self.vertices) == set(other.vertices)
            and dict(self.rotation) == dict(other.rotation)
        )

    def __hash__(self) -> int:
        return hash((self.base, frozenset(self.vertices)))


def _validate_tree(tree: Tree) -> None:
    vertex_set = set(tree.vertices)
    if len(vertex_set) != len(tree.vertices):
        raise TreeValidationError("Vertex ids must be unique.")
    for vertex in tree.vertices:
        if not vertex or vertex != vertex.strip():
            raise TreeValidationError(f"Vertex id {vertex!r} must be non-empty and unpadded.")
        if any(ch in vertex for ch in _FORBIDDEN_ID_CHARS):
            raise TreeValidationError(f"Vertex id {vertex!r} must not contain ',' or '@'.")
    if tree.base not in vertex_set:
        raise TreeValidationError(f"Base vertex {tree.base!r} is not a vertex.")
    if set(tree.rotation) != vertex_set:
        missing = sorted(vertex_set - set(tree.rotation))
        extra = sorted(set(tree.rotation) - vertex_set)
        raise TreeValidationError(
            f"Rotation keys must match the vertex set (missing={missing}, unknown={extra})."
        )

    for vertex, neighbors in tree.rotation.items():
        if len(set(neighbors)) != len(neighbors):
            raise TreeValidationError(f"Rotation at {vertex!r} lists a neighbor twice.")
        for neighbor in neighbors:
            if neighbor == vertex:
                raise TreeValidationError(f"Loop at {vertex!r} is not allowed in a tree.")
            if neighbor not in vertex_set:
                raise TreeValidationError(f"Rotation at {vertex!r} names unknown vertex {neighbor!r}.")
            if vertex not in tree.rotation[neighbor]:
                raise TreeValidationError(
                    f"Inconsistent rotation: {vertex!r} lists {neighbor!r} but not conversely."
                )

    graph = tree.to_graph()
    if not nx.is_connected(graph):
        raise TreeValidationError("Disconnected input: a tree must be connected.")
    if not nx.is_tree(graph):
        raise TreeValidationError("Cycle detected: the input graph is not acyclic.")
    if tree.degree(tree.base) != 1:
        raise TreeValidationError(
            f"Base vertex {tree.base!r} must have degree 1, found {tree.degree(tree.base)}."
        )


def parse_tree(text: str) -> Tree:
    """Parse a JSON tree file (`vertices`, `base`, `rotation`) into a `Tree`."""
    try:
        document = TreeDocument.model_validate_json(text)
    except ValidationError as exc:
        raise TreeValidationError(f"Malformed tree file: {exc}") from exc
    return tree_from_document(document)


def tree_from_document(document: TreeDocument) -> Tree:
    return Tree(vertices=tuple(document.vertices), rotation=document.rotation, base=document.base)


def load_tree(path: str | Path) -> Tree:
    return parse_tree(Path(path).read_text(encoding="utf-8"))


def dump_tree(tree: Tree) -> str:
    return json.dumps(tree.to_document().model_dump(), indent=2, sort_keys=True) + "\n"


def build_tree(adjacency: Mapping[str, Iterable[str]], base: str) -> Tree:
    """Build a tree from clockwise neighbor lists, vertices in insertion order."""
    return Tree(vertices=tuple(adjacency), rotation={v: tuple(ns) for v, ns in adjacency.items()}, base=base)


# -- chains and subdivision -------------------------------------------------


def _chains(tree: Tree) -> list[list[str]]:
    """Maximal paths whose interior vertices have degree 2, oriented away from the base."""
    chains: list[list[str]] = []
    parent: dict[str, str | None] = {tree.base: None}
    stack = [tree.base]
    while stack:
        top = stack.pop()
        if tree.degree(top) == 2 and top != tree.base:
            continue
        for neighbor in tree.rotation[top]:
            if neighbor == parent[top]:
                continue
            chain = [top, neighbor]
            parent[neighbor] = top
            while tree.degree(chain[-1]) == 2:
                current = chain[-1]
                nxt = next(w for w in tree.rotation[current] if w != chain[-2])
                parent[nxt] = current
                chain.append(nxt)
            chains.append(chain)
            stack.append(chain[-1])
    return chains


def is_sufficiently_subdivided(tree: Tree, n: int) -> bool:
    if n < 1:
        raise ValueError("n must be at least 1.")
    if len(tree.vertices) < n:
        return False
    return all(len(chain) - 1 >= n - 1 for chain in _chains(tree))


def subdivide_for(tree: Tree, n: int) -> Tree:
    """Return the minimal even subdivision of `tree` that is sufficient for `n` points.

    Every chain between vertices of degree other than 2 is brought up to at
    least `n - 1` edges. Extra vertices are spread over the chain's original
    edges as evenly as possible (earlier edges take the remainder) and get
    fresh ids of the form `<u>~<w>~<i>`. A tree that already satisfies the
    conditions is returned as is.
    """
    if n < 1:
        raise ValueError("n must be at least 1.")
    if is_sufficiently_subdivided(tree, n):
        return tree

    vertices = list(tree.vertices)
    taken = set(vertices)
    rotation = {v: list(ns) for v, ns in tree.rotation.items()}
    added = 0

    for chain in _chains(tree):
        length = len(chain) - 1
        missing = (n - 1) - length
        if missing <= 0:
            continue
        per_edge, remainder = divmod(missing, length)
        for index, (u, w) in enumerate(zip(chain, chain[1:])):
            extra = per_edge + (1 if index < remainder else 0)
            if extra == 0:
                continue
            fresh = [_fresh_id(f"{u}~{w}~{i}", taken) for i in range(1, extra + 1)]
            vertices.extend(fresh)
            path = [u, *fresh, w]
            rotation[u][rotation[u].index(w)] = fresh[0]
            rotation[w][rotation[w].index(u)] = fresh[-1]
            for previous, current, following in zip(path, path[1:], path[2:]):
                rotation[current] = [previous, following]
            added += extra

    result = Tree(vertices=tuple(vertices), rotation=rotation, base=tree.base)
    LOGGER.debug("Subdivided tree for n=%d: added %d vertices (%d total).", n, added, len(vertices))
    return result


def _fresh_id(candidate: str, taken: set[str]) -> str:
    while candidate in taken:
        candidate += "'"
    taken.add(candidate)
    return candidate


# -- vertex numbering ---------------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class VertexOrder:
    """Depth-first numbering of a tree from its base.

    Attributes:
        tree: The numbered tree.
        ids: Vertex id per number.
        number: Number per vertex id.
        parent: Parent number per vertex (`-1` for the base). The edge `e_v`
            joins `parent[v]` and `v`, so `iota(e_v) = parent[v]` and
            `tau(e_v) = v`.
        children: Children per vertex in increasing direction order.
        depth: Distance from the base.
    """

    tree: Tree
    ids: tuple[str, ...]
    number: Mapping[str, int]
    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.ids)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if v == 0 else 1)

    def iota(self, edge: int) -> int:
        return self.parent[edge]

    def tau(self, edge: int) -> int:
        return edge

    def edge_between(self, a: int, b: int) -> int:
        if self.parent[b] == a:
            return b
        if self.parent[a] == b:
            return a
        raise TreeValidationError(f"Vertices {self.ids[a]!r} and {self.ids[b]!r} are not adjacent.")

    def child_direction(self, child: int) -> int:
        """Direction of the edge `e_child` as seen from the parent vertex."""
        parent = self.parent[child]
        if parent <= 0:
            raise ValueError("Directions are undefined at the base vertex.")
        return self.children[parent].index(child) + 1

    def child_in_direction(self, v: int, direction: int) -> int:
        if v == 0:
            raise ValueError("Directions are undefined at the base vertex.")
        if not 1 <= direction < self.degree(v):
            raise ValueError(f"Vertex {self.ids[v]!r} has no direction {direction}.")
        return self.children[v][direction - 1]

    @property
    def essential(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.size) if self.degree(v) >= 3)

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(range(1, self.size))

    def edge_label(self, edge: int) -> str:
        return f"{self.ids[self.parent[edge]]}-{self.ids[edge]}"

    def parse_edge(self, text: str) -> int:
        """Resolve `<id1>-<id2>` (ids may themselves contain '-') to an edge."""
        left, right = self.split_edge(text)
        return self.edge_between(left, right)

    def split_edge(self, text: str) -> tuple[int, int]:
        """Resolve `<id1>-<id2>` to the two endpoint numbers in the written order."""
        for cut in range(len(text)):
            if text[cut] != "-":
                continue
            left, right = text[:cut], text[cut + 1 :]
            if left in self.number and right in self.number:
                a, b = self.number[left], self.number[right]
                if self.parent[a] == b or self.parent[b] == a:
                    return a, b
        raise TreeValidationError(f"{text!r} does not name an edge of the tree.")

    def path_between(self, a: int, b: int) -> list[int]:
        """Vertex sequence of the unique reduced path from `a` to `b`."""
        up: list[int] = []
        down: list[int] = []
        while self.depth[a] > self.depth[b]:
            up.append(a)
            a = self.parent[a]
        while self.depth[b] > self.depth[a]:
            down.append(b)
            b = self.parent[b]
        while a != b:
            up.append(a)
            down.append(b)
            a = self.parent[a]
            b = self.parent[b]
        return [*up, a, *reversed(down)]

    def distance(self, a: int, b: int) -> int:
        return len(self.path_between(a, b)) - 1

    def closure(self, edges: Iterable[int]) -> frozenset[int]:
        return frozenset(x for e in edges for x in (self.parent[e], e))

    def cloud_roots(self, edges: tuple[int, ...]) -> tuple[int, ...]:
        """Per vertex, the minimum vertex of its component of the tree minus the
        closed edges; `-1` for endpoints of those edges."""
        key = ("roots", edges)
        cached = self._cache.get(key)
        if cached is None:
            removed = self.closure(edges)
            roots = [-1] * self.size
            for v in range(self.size):
                if v in removed:
                    continue
                p = self.parent[v]
                roots[v] = v if p < 0 or p in removed else roots[p]
            cached = tuple(roots)
            self._cache[key] = cached
        return cached

    def cloud_members(self, edges: tuple[int, ...]) -> dict[int, tuple[int, ...]]:
        key = ("members", edges)
        cached = self._cache.get(key)
        if cached is None:
            grouped: dict[int, list[int]] = {}
            for v, root in enumerate(self.cloud_roots(edges)):
                if root >= 0:
                    grouped.setdefault(root, []).append(v)
            cached = {root: tuple(vs) for root, vs in grouped.items()}
            self._cache[key] = cached
        return cached

    def subtree(self, v: int) -> range:
        """Numbers of the subtree below `v`; preorder makes it a contiguous range."""
        key = ("subtree_end",)
        ends = self._cache.get(key)
        if ends is None:
            ends = [0] * self.size
            for vertex in reversed(range(self.size)):
                ends[vertex] = max([vertex + 1, *(ends[c] for c in self.children[vertex])])
            self._cache[key] = ends
        return range(v, ends[v])


def order_vertices(tree: Tree) -> VertexOrder:
    """Number vertices depth-first from the base.

    At each vertex the children are explored in increasing direction order,
    where direction 0 points toward the base and the remaining directions
    follow clockwise in the rotation system.
    """
    ids: list[str] = []
    parents: list[int] = []
    depth: list[int] = []
    children: list[list[int]] = []
    stack: list[tuple[str, str | None, int]] = [(tree.base, None, -1)]
    while stack:
        vertex, parent_id, parent_number = stack.pop()
        current = len(ids)
        ids.append(vertex)
        parents.append(parent_number)
        depth.append(0 if parent_number < 0 else depth[parent_number] + 1)
        children.append([])
        if parent_number >= 0:
            children[parent_number].append(current)
        rot = tree.rotation[vertex]
        if parent_id is None:
            ordered = list(rot)
        else:
            start = rot.index(parent_id)
            ordered = [rot[(start + j) % len(rot)] for j in range(1, len(rot))]
        for neighbor in reversed(ordered):
            stack.append((neighbor, vertex, current))

    return VertexOrder(
        tree=tree,
        ids=tuple(ids),
        number=MappingProxyType({v: i for i, v in enumerate(ids)}),
        parent=tuple(parents),
        children=tuple(tuple(c) for c in children),
        depth=tuple(depth),
    )


def direction(order: VertexOrder, v: str, edge: tuple[str, str]) -> int:
    """Direction index of `edge` at vertex `v` (0 is toward the base)."""
    vn = order.number[v]
    if vn == 0:
        raise ValueError("Directions are undefined at the base vertex.")
    if v not in edge:
        raise ValueError(f"Edge {edge!r} is not incident to {v!r}.")
    other = order.number[edge[1] if edge[0] == v else edge[0]]
    if order.parent[vn] == other:
        return 0
    if order.parent[other] != vn:
        raise ValueError(f"Edge {edge!r} is not an edge of the tree.")
    return order.child_direction(other)


# -- points and geodesics -----------------------------------------------------


@dataclass(frozen=True, slots=True)
class Point:
    """A point of the tree: a vertex, or an edge plus a parameter in (0, 1) from iota."""

    vertex: int | None = None
    edge: int | None = None
    t: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if (self.vertex is None) == (self.edge is None):
            raise ValueError("A point is either a vertex or an edge point.")
        if self.edge is not None and not 0 < self.t < 1:
            raise ValueError("Edge point parameter must lie strictly between 0 and 1.")
        object.__setattr__(self, "t", Fraction(self.t))

    @classmethod
    def at(cls, vertex: int) -> Point:
        return cls(vertex=vertex)

    @classmethod
    def inside(cls, edge: int, t: Fraction | int | str) -> Point:
        return cls(edge=edge, t=Fraction(t))

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def carrier(self, order: VertexOrder) -> frozenset[int]:
        if self.vertex is not None:
            return frozenset((self.vertex,))
        return frozenset((order.parent[self.edge], self.edge))

    def sort_key(self, order: VertexOrder) -> int:
        """The planner's ordering function: the vertex number, or iota of the edge."""
        return self.vertex if self.vertex is not None else order.parent[self.edge]

    def label(self, order: VertexOrder) -> str:
        if self.vertex is not None:
            return f"v:{order.ids[self.vertex]}"
        return f"e:{order.edge_label(self.edge)}@{self.t.numerator}/{self.t.denominator}"

    def _exits(self, order: VertexOrder) -> list[tuple[int, Fraction]]:
        if self.vertex is not None:
            return [(self.vertex, Fraction(0))]
        return [(order.parent[self.edge], self.t), (self.edge, 1 - self.t)]


def geodesic(order: VertexOrder, a: Point, b: Point) -> tuple[Point, ...]:
    """Waypoints of the unique reduced path from `a` to `b`.

    The result starts at `a`, lists every vertex crossed, and ends at `b`;
    consecutive waypoints lie on a common closed edge. `a == b` gives `()`.
    """
    if a == b:
        return ()
    if a.edge is not None and a.edge == b.edge:
        return (a, b)
    best: tuple[Fraction, list[int]] | None = None
    for x, x_off in a._exits(order):
        for y, y_off in b._exits(order):
            path = order.path_between(x, y)
            length = x_off + y_off + len(path) - 1
            if best is None or length < best[0]:
                best = (length, path)
    assert best is not None
    waypoints: list[Point] = [] if a.is_vertex else [a]
    waypoints.extend(Point.at(v) for v in best[1])
    if not b.is_vertex:
        waypoints.append(b)
    return tuple(waypoints)


def segment_length(order: VertexOrder, a: Point, b: Point) -> Fraction:
    """Length of a segment between two points on a common closed edge."""
    if a.is_vertex and b.is_vertex:
        return Fraction(0) if a.vertex == b.vertex else Fraction(1)
    if not a.is_vertex and not b.is_vertex:
        return abs(a.t - b.t)
    edge_point, vertex_point = (a, b) if b.is_vertex else (b, a)
    if vertex_point.vertex == order.parent[edge_point.edge]:
        return edge_point.t
    return 1 - edge_point.t


def point_distance(order: VertexOrder, a: Point, b: Point) -> Fraction:
    waypoints = geodesic(order, a, b)
    return sum(
        (segment_length(order, p, q) for p, q in zip(waypoints, waypoints[1:])),
        Fraction(0),
    )


def parse_point(order: VertexOrder, text: str) -> Point:
    """Parse `v:<id>` or `e:<id1>-<id2>@<num>/<den>`."""
    text = text.strip()
    try:
        if text.startswith("v:"):
            return Point.at(order.number[text[2:]])
        if text.startswith("e:") and "@" in text:
            edge_text, _, param = text[2:].rpartition("@")
            first, second = order.split_edge(edge_text)
            edge = order.edge_between(first, second)
            t = Fraction(param)
            # measured from the first listed endpoint
            return Point.inside(edge, t if first == order.parent[edge] else 1 - t)
    except (KeyError, ValueError, ZeroDivisionError, TreeValidationError) as exc:
        raise ConfigurationParseError(f"Malformed point literal {text!r}: {exc}") from exc
    raise ConfigurationParseError(f"Malformed point literal {text!r}.")


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TreeStats:
    """Essential-vertex counts plus path-connectivity of the configuration spaces."""

    m: int
    r: int
    s: int
    essential: tuple[str, ...]
    n: int
    unordered_connected: bool
    ordered_connected: bool

    @property
    def is_interval(self) -> bool:
        return self.m == 0

    def to_document(self) -> StatsDocument:
        return StatsDocument(
            m=self.m,
            r=self.r,
            s=self.s,
            essential=list(self.essential),
            n=self.n,
            unordered_connected=self.unordered_connected,
            ordered_connected=self.ordered_connected,
        )


def stats(tree: Tree, n: int = 1) -> TreeStats:
    if n < 1:
        raise ValueError("n must be at least 1.")
    order = order_vertices(tree)
    essential = order.essential
    r = sum(1 for v in essential if order.degree(v) > 3)
    s = len(essential) - r
    m = len(essential)
    # a tree with an edge is an interval exactly when it has no essential vertex
    ordered_connected = n == 1 or m > 0
    if not ordered_connected:
        LOGGER.warning(
            "Ordered configuration space of %d points on an interval is disconnected.", n
        )
    return TreeStats(
        m=m,
        r=r,
        s=s,
        essential=tuple(order.ids[v] for v in essential),
        n=n,
        unordered_connected=True,
        ordered_connected=ordered_connected,
    )
