"""Cells of the unordered discrete configuration space and their Morse classification."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product
from math import comb

from .errors import (
    CellCapExceededError,
    CellMembershipError,
    ConfigurationParseError,
    InsufficientSubdivisionError,
    TreeValidationError,
)
from .models import CellDocument
from .settings import BraidscapeLimits, resolve_limits
from .tree import VertexOrder, is_sufficiently_subdivided

LOGGER = logging.getLogger(__name__)


class CellClass(str, Enum):
    CRITICAL = "critical"
    COLLAPSIBLE = "collapsible"
    REDUNDANT = "redundant"


@dataclass(frozen=True, slots=True, order=True)
class Cell:
    """A set of pairwise-disjoint closed vertices and edges.

    Edges are stored by their `tau` number (see `VertexOrder`). Cells order
    canonically by edges first, then vertices.
    """

    edges: tuple[int, ...]
    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))

    @classmethod
    def of(cls, vertices: Iterable[int] = (), edges: Iterable[int] = ()) -> Cell:
        return cls(edges=tuple(edges), vertices=tuple(vertices))

    @property
    def n(self) -> int:
        return len(self.vertices) + len(self.edges)

    @property
    def dim(self) -> int:
        return len(self.edges)

    def occupied(self, order: VertexOrder) -> frozenset[int]:
        return order.closure(self.edges) | frozenset(self.vertices)

    def is_valid(self, order: VertexOrder) -> bool:
        pieces = [v for v in self.vertices]
        for e in self.edges:
            pieces.extend((order.parent[e], e))
        return len(pieces) == len(set(pieces)) and all(0 < e < order.size for e in self.edges)

    def replace_edge(self, edge: int, vertex: int) -> Cell:
        """Face obtained by collapsing `edge` onto one of its endpoints."""
        return Cell(
            edges=tuple(e for e in self.edges if e != edge),
            vertices=(*self.vertices, vertex),
        )

    def members(self, order: VertexOrder) -> list[str]:
        return [f"v:{order.ids[v]}" for v in self.vertices] + [
            f"e:{order.edge_label(e)}" for e in self.edges
        ]

    def label(self, order: VertexOrder) -> str:
        return "{" + ", ".join(self.members(order)) + "}"

    def to_document(self, order: VertexOrder, classification: CellClass | None = None) -> CellDocument:
        return CellDocument(
            members=self.members(order),
            n=self.n,
            dim=self.dim,
            classification=classification.value if classification is not None else None,
        )


def parse_cell(order: VertexOrder, members: Sequence[str]) -> Cell:
    """Parse serialized members (`v:<id>`, `e:<id1>-<id2>`) into a validated cell."""
    vertices: list[int] = []
    edges: list[int] = []
    for member in members:
        member = member.strip()
        try:
            if member.startswith("v:"):
                vertices.append(order.number[member[2:]])
            elif member.startswith("e:"):
                edges.append(order.parse_edge(member[2:]))
            else:
                raise ConfigurationParseError(f"Unknown cell member {member!r}.")
        except (KeyError, TreeValidationError) as exc:
            raise ConfigurationParseError(f"Unknown cell member {member!r}.") from exc
    cell = Cell.of(vertices, edges)
    if not cell.is_valid(order):
        raise ConfigurationParseError("Cell members must have pairwise disjoint closures.")
    return cell


# -- predicates ---------------------------------------------------------------


def is_blocked(order: VertexOrder, cell: Cell, v: int) -> bool:
    """True iff `v` is the base or trading `v` for `e_v` breaks disjointness."""
    if v not in cell.vertices:
        raise CellMembershipError(f"Vertex {order.ids[v]!r} is not a member of the cell.")
    if v == 0:
        return True
    others = order.closure(cell.edges) | frozenset(x for x in cell.vertices if x != v)
    return order.parent[v] in others


def _witness(order: VertexOrder, cell: Cell, edge: int) -> int | None:
    iota = order.parent[edge]
    for v in cell.vertices:
        if order.parent[v] == iota and iota < v < edge:
            return v
    return None


def is_order_disrespecting(order: VertexOrder, cell: Cell, edge: int) -> bool:
    """True iff a member vertex `v` has `iota(e_v) = iota(e)` and `iota(e) < v < tau(e)`."""
    if edge not in cell.edges:
        raise CellMembershipError(f"Edge {order.edge_label(edge)!r} is not a member of the cell.")
    return _witness(order, cell, edge) is not None


def classify_cell(order: VertexOrder, cell: Cell) -> CellClass:
    blocked = {v: is_blocked(order, cell, v) for v in cell.vertices}
    respecting = [e for e in cell.edges if _witness(order, cell, e) is None]
    if all(blocked.values()) and not respecting:
        return CellClass.CRITICAL
    unblocked = [v for v, flag in blocked.items() if not flag]
    for e in respecting:
        if all(v > e for v in unblocked):
            return CellClass.COLLAPSIBLE
    return CellClass.REDUNDANT


# -- enumeration --------------------------------------------------------------


def _disjoint_edge_sets(order: VertexOrder, k: int) -> Iterator[tuple[int, ...]]:
    edges = order.edges

    def extend(start: int, chosen: list[int], used: set[int]) -> Iterator[tuple[int, ...]]:
        if len(chosen) == k:
            yield tuple(chosen)
            return
        for index in range(start, len(edges)):
            e = edges[index]
            ends = (order.parent[e], e)
            if ends[0] in used or ends[1] in used:
                continue
            chosen.append(e)
            used.update(ends)
            yield from extend(index + 1, chosen, used)
            chosen.pop()
            used.difference_update(ends)

    yield from extend(0, [], set())


def count_cells(order: VertexOrder, n: int, dim: int) -> int:
    if dim < 0 or dim > n:
        return 0
    return sum(
        comb(order.size - 2 * dim, n - dim)
        for _ in _disjoint_edge_sets(order, dim)
    )


def enumerate_cells(
    order: VertexOrder,
    n: int,
    dims: Iterable[int],
    *,
    limits: BraidscapeLimits | None = None,
) -> Iterator[Cell]:
    """Yield every cell of the requested dimensions exactly once, canonically ordered.

    Raises:
        CellCapExceededError: If the total would exceed `limits.max_cells`.
            The check runs before the first cell is produced.
    """
    if n < 1:
        raise ValueError("n must be at least 1.")
    cap = resolve_limits(limits).max_cells
    wanted = sorted(set(dims))
    total = sum(count_cells(order, n, d) for d in wanted)
    if total > cap:
        raise CellCapExceededError(
            f"Enumerating dimensions {wanted} for n={n} needs {total} cells; cap is {cap}."
        )
    LOGGER.debug("Enumerating %d cells for n=%d, dims=%s.", total, n, wanted)
    for d in wanted:
        if d > n:
            continue
        for edges in _disjoint_edge_sets(order, d):
            used = order.closure(edges)
            free = [v for v in range(order.size) if v not in used]
            for vertices in combinations(free, n - d):
                yield Cell(edges=edges, vertices=vertices)


def cell_census(
    order: VertexOrder,
    n: int,
    dims: Iterable[int],
    *,
    limits: BraidscapeLimits | None = None,
) -> dict[int, Counter[CellClass]]:
    census: dict[int, Counter[CellClass]] = {d: Counter() for d in dims}
    for cell in enumerate_cells(order, n, census, limits=limits):
        census[cell.dim][classify_cell(order, cell)] += 1
    return census


# -- critical cells -----------------------------------------------------------


def require_sufficient(order: VertexOrder, n: int) -> None:
    if not is_sufficiently_subdivided(order.tree, n):
        raise InsufficientSubdivisionError(
            f"The tree is not sufficiently subdivided for n={n}; call subdivide_for first."
        )


def _value_assignments(
    capacities: Sequence[int],
    total: int,
    groups: Sequence[Sequence[int]],
) -> Iterator[tuple[int, ...]]:
    """Vectors of cloud values under capacities, summing to `total`, with every
    group containing a nonzero entry."""
    size = len(capacities)
    suffix = [0] * (size + 1)
    for index in reversed(range(size)):
        suffix[index] = suffix[index + 1] + capacities[index]

    values = [0] * size

    def fill(index: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if index == size:
            if remaining == 0 and all(any(values[i] for i in group) for group in groups):
                yield tuple(values)
            return
        low = max(0, remaining - suffix[index + 1])
        for value in range(low, min(capacities[index], remaining) + 1):
            values[index] = value
            yield from fill(index + 1, remaining - value)
        values[index] = 0

    yield from fill(0, total)


def _stacked_cell(order: VertexOrder, edges: tuple[int, ...], values: dict[int, int]) -> Cell:
    members = order.cloud_members(edges)
    vertices = [v for root, value in values.items() for v in members[root][:value]]
    return Cell(edges=edges, vertices=tuple(vertices))


def witness_roots(order: VertexOrder, edges: tuple[int, ...], edge: int) -> list[int]:
    """Cloud roots that can hold a witness vertex for `edge` (children of iota in
    a nonzero direction below the edge's own)."""
    roots = order.cloud_roots(edges)
    iota = order.parent[edge]
    return [c for c in order.children[iota] if c < edge and roots[c] == c]


def _iter_critical(order: VertexOrder, n: int, k: int) -> Iterator[Cell]:
    if k == 0:
        if n <= order.size:
            yield Cell(edges=(), vertices=tuple(range(n)))
        return
    essential = order.essential
    for centers in combinations(essential, k):
        options = [order.children[v][1:] for v in centers]
        for edges in product(*options):
            edges = tuple(sorted(edges))
            ends = [x for e in edges for x in (order.parent[e], e)]
            if len(ends) != len(set(ends)):
                continue
            members = order.cloud_members(edges)
            roots = sorted(members)
            index_of = {root: i for i, root in enumerate(roots)}
            groups = [
                [index_of[c] for c in witness_roots(order, edges, e)] for e in edges
            ]
            if any(not group for group in groups):
                continue
            capacities = [len(members[root]) for root in roots]
            for values in _value_assignments(capacities, n - k, groups):
                cell = _stacked_cell(order, edges, dict(zip(roots, values)))
                if classify_cell(order, cell) is CellClass.CRITICAL:
                    yield cell


def critical_cells(
    order: VertexOrder,
    n: int,
    k: int,
    *,
    limits: BraidscapeLimits | None = None,
) -> list[Cell]:
    """All critical `k`-cells, built directly rather than by classifying every cell.

    A critical cell takes one edge in a direction of at least 2 at each of `k`
    essential vertices, a vertex in a smaller nonzero direction at each of
    them, and stacks its remaining vertices from the roots of the clouds.
    """
    if k < 0:
        raise ValueError("k must be non-negative.")
    require_sufficient(order, n)
    if k > min(n // 2, len(order.essential)):
        return []
    cap = resolve_limits(limits).max_cells
    cells: list[Cell] = []
    for cell in _iter_critical(order, n, k):
        cells.append(cell)
        if len(cells) > cap:
            raise CellCapExceededError(f"More than {cap} critical {k}-cells for n={n}.")
    cells.sort()
    return cells


def reduced_complex_dim(order: VertexOrder, n: int) -> int:
    """Largest dimension carrying a critical cell (never above min(n // 2, m))."""
    require_sufficient(order, n)
    for k in range(min(n // 2, len(order.essential)), 0, -1):
        if next(_iter_critical(order, n, k), None) is not None:
            return k
    return 0


# -- gradient flow --------------------------------------------------------------


def boundary(order: VertexOrder, cell: Cell) -> list[tuple[Cell, int]]:
    """Signed faces: for edges `e_1 < ... < e_d`,
    `sum_i (-1)^(i-1) (c[e_i -> tau] - c[e_i -> iota])`."""
    faces: list[tuple[Cell, int]] = []
    for i, e in enumerate(cell.edges):
        sign = -1 if i % 2 else 1
        faces.append((cell.replace_edge(e, e), sign))
        faces.append((cell.replace_edge(e, order.parent[e]), -sign))
    return faces


def gradient_partner(order: VertexOrder, cell: Cell) -> Cell | None:
    """The collapsible cell matched with a redundant cell: its smallest
    unblocked vertex `v` traded for the edge `e_v`. `None` otherwise."""
    if classify_cell(order, cell) is not CellClass.REDUNDANT:
        return None
    v = min(x for x in cell.vertices if not is_blocked(order, cell, x))
    return Cell(edges=(*cell.edges, v), vertices=tuple(x for x in cell.vertices if x != v))


class Gradient:
    """Memoized discrete gradient: each redundant cell with its partner and the
    incidence of the redundant cell in the partner's boundary."""

    def __init__(self, order: VertexOrder) -> None:
        self.order = order
        self._memo: dict[Cell, tuple[Cell, int] | None] = {}

    def __call__(self, cell: Cell) -> tuple[Cell, int] | None:
        if cell not in self._memo:
            partner = gradient_partner(self.order, cell)
            if partner is None:
                self._memo[cell] = None
            else:
                (v,) = set(cell.vertices) - set(partner.vertices)
                self._memo[cell] = (partner, -1 if partner.edges.index(v) % 2 else 1)
        return self._memo[cell]


def morse_cycle(
    order: VertexOrder,
    cell: Cell,
    *,
    limits: BraidscapeLimits | None = None,
    gradient: Gradient | None = None,
) -> dict[Cell, int]:
    """The critical cell plus the collapsible cells that cancel every redundant
    face of its boundary; the stable image of the cell under the gradient flow.

    On a tree the Morse boundary vanishes, so the result is a cycle and the
    cycles of the critical `k`-cells form a basis of the rational `k`-th
    homology.

    Raises:
        CellMembershipError: If `cell` is not critical.
        CellCapExceededError: If the chain outgrows `limits.max_cells`.
    """
    if classify_cell(order, cell) is not CellClass.CRITICAL:
        raise CellMembershipError(f"Cell {cell.label(order)} is not critical.")
    cap = resolve_limits(limits).max_cells
    gradient = gradient if gradient is not None else Gradient(order)
    chain: dict[Cell, int] = {}
    faces: dict[Cell, int] = {}
    pending: list[Cell] = []

    def add(target: Cell, amount: int) -> None:
        chain[target] = chain.get(target, 0) + amount
        for face, sign in boundary(order, target):
            faces[face] = faces.get(face, 0) + amount * sign
            if gradient(face) is not None:
                pending.append(face)

    add(cell, 1)
    while pending:
        face = pending.pop()
        coefficient = faces.get(face, 0)
        if not coefficient:
            continue
        partner, incidence = gradient(face)
        add(partner, -coefficient * incidence)
        if len(chain) > cap:
            raise CellCapExceededError(
                f"Gradient flow of {cell.label(order)} reaches {len(chain)} cells; cap is {cap}."
            )
    return {c: value for c, value in chain.items() if value}
