"""Equivalence classes of cells as cloud diagrams, their partial order and 1-cell factors."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .cell_complex import Cell, CellClass, classify_cell, witness_roots
from .errors import DiagramMismatchError, TreeValidationError
from .models import CloudDocument, DiagramDocument
from .tree import VertexOrder

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, order=True)
class CloudDiagram:
    """Edge set plus a vertex count for every component of the tree minus those
    closed edges. Components are keyed by their minimum vertex."""

    edges: tuple[int, ...]
    clouds: tuple[tuple[int, int], ...]

    @property
    def degree(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.edges) + sum(value for _, value in self.clouds)

    def value(self, root: int) -> int:
        for anchor, value in self.clouds:
            if anchor == root:
                return value
        raise KeyError(root)

    def label(self, order: VertexOrder) -> str:
        edges = ",".join(order.edge_label(e) for e in self.edges)
        clouds = ",".join(f"{order.ids[r]}:{v}" for r, v in self.clouds if v)
        return f"[{edges}|{clouds}]"

    def to_document(self, order: VertexOrder) -> DiagramDocument:
        return DiagramDocument(
            edges=[order.edge_label(e) for e in self.edges],
            clouds=[CloudDocument(anchor_vertex=order.ids[r], value=v) for r, v in self.clouds],
        )


def make_diagram(order: VertexOrder, edges: Iterable[int], values: dict[int, int]) -> CloudDiagram:
    edges = tuple(sorted(edges))
    members = order.cloud_members(edges)
    unknown = set(values) - set(members)
    if unknown:
        raise DiagramMismatchError(f"Vertices {sorted(unknown)} are not cloud anchors.")
    return CloudDiagram(edges=edges, clouds=tuple((r, values.get(r, 0)) for r in sorted(members)))


def diagram_from_document(order: VertexOrder, document: DiagramDocument) -> CloudDiagram:
    try:
        edges = [order.parse_edge(text) for text in document.edges]
        values = {order.number[c.anchor_vertex]: c.value for c in document.clouds}
    except (KeyError, TreeValidationError) as exc:
        raise DiagramMismatchError(f"Diagram does not fit the tree: {exc}") from exc
    return make_diagram(order, edges, values)


def cloud_diagram(order: VertexOrder, cell: Cell) -> CloudDiagram:
    roots = order.cloud_roots(cell.edges)
    values = dict.fromkeys(order.cloud_members(cell.edges), 0)
    for v in cell.vertices:
        values[roots[v]] += 1
    return CloudDiagram(edges=cell.edges, clouds=tuple(sorted(values.items())))


def equivalent(order: VertexOrder, c: Cell, other: Cell) -> bool:
    if c.n != other.n:
        raise DiagramMismatchError(f"Cells have different n ({c.n} and {other.n}).")
    return cloud_diagram(order, c) == cloud_diagram(order, other)


def _check_fits(order: VertexOrder, diagram: CloudDiagram) -> None:
    anchors = tuple(sorted(order.cloud_members(diagram.edges)))
    if tuple(root for root, _ in diagram.clouds) != anchors:
        raise DiagramMismatchError("Diagram clouds do not match the tree's components.")


def coarsen(order: VertexOrder, diagram: CloudDiagram, edges: Iterable[int]) -> CloudDiagram:
    """Forget all edges outside `edges`, crediting each forgotten edge and cloud
    to the coarser component that contains it."""
    keep = tuple(sorted(edges))
    if not set(keep) <= set(diagram.edges):
        raise ValueError("Can only coarsen onto a subset of the diagram's edges.")
    roots = order.cloud_roots(keep)
    totals = dict.fromkeys(order.cloud_members(keep), 0)
    for root, value in diagram.clouds:
        totals[roots[root]] += value
    for e in diagram.edges:
        if e not in keep:
            totals[roots[e]] += 1
    return CloudDiagram(edges=keep, clouds=tuple(sorted(totals.items())))


def leq(order: VertexOrder, d: CloudDiagram, c: CloudDiagram) -> bool:
    """Partial order on classes: `d <= c` iff d's edges are among c's and every
    d-cloud holds exactly the c-edges and c-cloud values inside it."""
    _check_fits(order, d)
    _check_fits(order, c)
    if d.n != c.n:
        raise DiagramMismatchError(f"Diagrams have different n ({d.n} and {c.n}).")
    if not set(d.edges) <= set(c.edges):
        return False
    return coarsen(order, c, d.edges) == d


def one_cell_factors(order: VertexOrder, diagram: CloudDiagram) -> list[CloudDiagram]:
    """The unique 1-cell classes whose least upper bound is `diagram`, sorted by iota."""
    if diagram.degree == 0:
        raise ValueError("A 0-cell class has no 1-cell factors.")
    ordered = sorted(diagram.edges, key=lambda e: order.parent[e])
    return [coarsen(order, diagram, (e,)) for e in ordered]


def least_upper_bound(order: VertexOrder, diagrams: Sequence[CloudDiagram]) -> CloudDiagram | None:
    """Least class above every diagram whose edge set is exactly their union.

    Cloud values are the unique solution of the linear conditions imposed by
    each diagram; `None` when the conditions are inconsistent, not integral,
    negative, exceed a cloud's size, or leave the values undetermined.
    """
    unique = sorted(set(diagrams))
    if not unique:
        raise ValueError("Need at least one diagram.")
    n = unique[0].n
    if any(d.n != n for d in unique):
        raise DiagramMismatchError("Diagrams have different n.")
    union = tuple(sorted({e for d in unique for e in d.edges}))
    ends = [x for e in union for x in (order.parent[e], e)]
    if len(ends) != len(set(ends)):
        return None

    members = order.cloud_members(union)
    anchors = sorted(members)
    column = {root: i for i, root in enumerate(anchors)}
    size = len(anchors)
    rows: list[list] = []
    for d in unique:
        coarse_roots = order.cloud_roots(d.edges)
        for root, value in d.clouds:
            row = [QQ(0)] * (size + 1)
            for anchor in anchors:
                if coarse_roots[anchor] == root:
                    row[column[anchor]] = QQ(1)
            extra = sum(1 for e in union if e not in d.edges and coarse_roots[e] == root)
            row[size] = QQ(value - extra)
            rows.append(row)

    reduced, pivots = DomainMatrix(rows, (len(rows), size + 1), QQ).rref()
    if size in pivots:
        return None
    if len(pivots) < size:
        LOGGER.debug("Cloud values under-determined for edges %s.", union)
        return None
    table = reduced.to_Matrix()
    values: dict[int, int] = {}
    for row_index, col in enumerate(pivots):
        entry = table[row_index, size]
        value = Fraction(int(entry.p), int(entry.q))
        if value.denominator != 1 or value < 0 or value > len(members[anchors[col]]):
            return None
        values[anchors[col]] = int(value)

    result = CloudDiagram(edges=union, clouds=tuple(sorted(values.items())))
    if any(coarsen(order, result, d.edges) != d for d in unique):
        return None
    return result


def critical_cell_in_class(order: VertexOrder, diagram: CloudDiagram) -> Cell | None:
    """The critical cell of a class, or `None` when the class has none.

    Vertices are stacked from each cloud's minimum vertex, which keeps every
    vertex blocked; each edge then needs a nonempty cloud rooted at a child of
    its `iota` in a smaller nonzero direction.
    """
    _check_fits(order, diagram)
    members = order.cloud_members(diagram.edges)
    for root, value in diagram.clouds:
        if value > len(members[root]):
            return None
    values = dict(diagram.clouds)
    for e in diagram.edges:
        if not any(values[c] for c in witness_roots(order, diagram.edges, e)):
            return None
    cell = Cell(
        edges=diagram.edges,
        vertices=tuple(v for root, value in diagram.clouds for v in members[root][:value]),
    )
    return cell if classify_cell(order, cell) is CellClass.CRITICAL else None
