"""Rational cohomology of the discrete configuration space via critical cocycles.

A `BasisClass` is the cloud diagram of a class holding a critical cell; its
cocycle is the indicator of that class. Products decompose classes into 1-cell
factors and take least upper bounds. Tensor elements live in H* (x) H* with the
Koszul sign `(a (x) b)(a' (x) b') = (-1)^{|a'||b|} aa' (x) bb'`.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .cell_complex import (
    Cell,
    CellClass,
    Gradient,
    boundary,
    critical_cells,
    enumerate_cells,
    morse_cycle,
    reduced_complex_dim,
    require_sufficient,
)
from .clouds import (
    CloudDiagram,
    cloud_diagram,
    critical_cell_in_class,
    least_upper_bound,
    one_cell_factors,
)
from .errors import MissingCriticalCellError
from .models import BasisClassDocument, BasisDocument, BettiDocument
from .settings import BraidscapeLimits, resolve_limits
from .tree import VertexOrder

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True, order=True)
class BasisClass:
    """A class containing a critical cell; `cell` is that unique critical cell."""

    diagram: CloudDiagram
    cell: Cell = field(compare=False)

    @property
    def degree(self) -> int:
        return self.diagram.degree

    def to_document(self, order: VertexOrder) -> BasisClassDocument:
        return BasisClassDocument(
            degree=self.degree,
            diagram=self.diagram.to_document(order),
            critical_cell=self.cell.to_document(order, CellClass.CRITICAL),
        )


def _clean(terms: Mapping) -> dict:
    return {key: Fraction(value) for key, value in terms.items() if value != 0}


class Cochain:
    """Rational combination of basis classes; zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[BasisClass, Fraction | int] | None = None) -> None:
        self.terms: dict[BasisClass, Fraction] = _clean(terms or {})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int | None:
        degrees = {b.degree for b in self.terms}
        if len(degrees) > 1:
            raise ValueError("Cochain is not homogeneous.")
        return degrees.pop() if degrees else None

    def __add__(self, other: Cochain) -> Cochain:
        merged = dict(self.terms)
        for key, value in other.terms.items():
            merged[key] = merged.get(key, Fraction(0)) + value
        return Cochain(merged)

    def scale(self, factor: Fraction | int) -> Cochain:
        return Cochain({key: value * factor for key, value in self.terms.items()})

    def __neg__(self) -> Cochain:
        return self.scale(-1)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cochain) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Cochain({len(self.terms)} terms)"

    def label(self, order: VertexOrder) -> str:
        if self.is_zero:
            return "0"
        return " ".join(
            f"{'+' if value > 0 else '-'}{abs(value)}*{key.diagram.label(order)}"
            for key, value in sorted(self.terms.items())
        )


class TensorElement:
    """Rational combination of pairs of basis classes; the unit is the degree-0 class."""

    __slots__ = ("terms",)

    def __init__(
        self,
        terms: Mapping[tuple[BasisClass, BasisClass], Fraction | int] | None = None,
    ) -> None:
        self.terms: dict[tuple[BasisClass, BasisClass], Fraction] = _clean(terms or {})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: TensorElement) -> TensorElement:
        merged = dict(self.terms)
        for key, value in other.terms.items():
            merged[key] = merged.get(key, Fraction(0)) + value
        return TensorElement(merged)

    def scale(self, factor: Fraction | int) -> TensorElement:
        return TensorElement({key: value * factor for key, value in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TensorElement) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"TensorElement({len(self.terms)} terms)"

    def coefficient(self, left: BasisClass, right: BasisClass) -> Fraction:
        return self.terms.get((left, right), Fraction(0))

    def label(self, order: VertexOrder) -> str:
        if self.is_zero:
            return "0"
        return " ".join(
            f"{'+' if value > 0 else '-'}{abs(value)}*{a.diagram.label(order)}(x){b.diagram.label(order)}"
            for (a, b), value in sorted(self.terms.items())
        )


def _inversions(keys: Sequence[int]) -> int:
    return sum(1 for i in range(len(keys)) for j in range(i + 1, len(keys)) if keys[i] > keys[j])


class CohomologyRing:
    """Cohomology of the unordered discrete configuration space of `n` points.

    Args:
        order: Numbered tree, sufficiently subdivided for `n`.
        n: Number of points.
        limits: Enumeration caps.

    Raises:
        InsufficientSubdivisionError: If the tree is not subdivided enough.
    """

    def __init__(self, order: VertexOrder, n: int, *, limits: BraidscapeLimits | None = None) -> None:
        if n < 1:
            raise ValueError("n must be at least 1.")
        require_sufficient(order, n)
        self.order = order
        self.n = n
        self.limits = limits
        self.top_dimension = reduced_complex_dim(order, n)
        unit_cell = Cell(edges=(), vertices=tuple(range(n)))
        self.unit = BasisClass(cloud_diagram(order, unit_cell), unit_cell)
        self._products: dict[tuple[CloudDiagram, CloudDiagram], Cochain] = {}
        self._gradient = Gradient(order)
        self._tallies: dict[int, tuple[list[BasisClass], list[dict[CloudDiagram, int]]]] = {}

    # -- basis ---------------------------------------------------------------

    def basis(self, degree: int | None = None) -> list[BasisClass]:
        degrees = [degree] if degree is not None else range(self.top_dimension + 1)
        classes: list[BasisClass] = []
        for k in degrees:
            for cell in critical_cells(self.order, self.n, k, limits=self.limits):
                classes.append(BasisClass(cloud_diagram(self.order, cell), cell))
        return classes

    def basis_class(self, diagram: CloudDiagram) -> BasisClass:
        if diagram.degree == 0:
            return self.unit
        cell = critical_cell_in_class(self.order, diagram)
        if cell is None:
            raise MissingCriticalCellError(
                f"Class {diagram.label(self.order)} contains no critical cell."
            )
        return BasisClass(diagram, cell)

    def basis_class_of(self, cell: Cell) -> BasisClass:
        return self.basis_class(cloud_diagram(self.order, cell))

    def factors(self, cls: BasisClass) -> list[BasisClass]:
        return [self.basis_class(d) for d in one_cell_factors(self.order, cls.diagram)]

    def _cycle_tallies(self, degree: int) -> tuple[list[BasisClass], list[dict[CloudDiagram, int]]]:
        """Basis classes of `degree` with the per-class coefficient sums of their Morse cycles."""
        if degree not in self._tallies:
            classes = self.basis(degree)
            tallies: list[dict[CloudDiagram, int]] = []
            for cls in classes:
                tally: dict[CloudDiagram, int] = {}
                cycle = morse_cycle(self.order, cls.cell, limits=self.limits, gradient=self._gradient)
                for cell, coefficient in cycle.items():
                    diagram = cloud_diagram(self.order, cell)
                    tally[diagram] = tally.get(diagram, 0) + coefficient
                tallies.append(tally)
            self._tallies[degree] = (classes, tallies)
        return self._tallies[degree]

    def expand_class(self, diagram: CloudDiagram) -> Cochain:
        """The cohomology class of the indicator cocycle of `diagram` in the critical basis.

        The Morse cycles of the critical cells form a homology basis, so the
        coefficients solve `M a = f` where `M[c][d]` pairs the cycle of `c`
        with the cocycle of `d` and `f[c]` pairs it with `diagram`.
        """
        if diagram.degree == 0:
            return Cochain({self.unit: 1})
        classes, tallies = self._cycle_tallies(diagram.degree)
        rhs = [tally.get(diagram, 0) for tally in tallies]
        if not any(rhs):
            return Cochain()
        pairing = [[tally.get(cls.diagram, 0) for cls in classes] for tally in tallies]
        size = len(classes)
        if all(pairing[i][j] == (i == j) for i in range(size) for j in range(size)):
            return Cochain(dict(zip(classes, rhs)))
        matrix = DomainMatrix([[QQ(x) for x in row] for row in pairing], (size, size), QQ)
        column = DomainMatrix([[QQ(x)] for x in rhs], (size, 1), QQ)
        try:
            solution = matrix.lu_solve(column).to_Matrix()
        except DMNonInvertibleMatrixError as exc:
            raise MissingCriticalCellError(
                f"Class {diagram.label(self.order)} cannot be written in the critical basis."
            ) from exc
        return Cochain(
            {
                cls: Fraction(int(solution[i, 0].p), int(solution[i, 0].q))
                for i, cls in enumerate(classes)
            }
        )

    # -- products ------------------------------------------------------------

    def multiply_basis(self, a: BasisClass, b: BasisClass) -> Cochain:
        """Cup product of two basis cocycles.

        Repeated factors and factor collections without an upper bound give 0,
        as does any product above the top critical dimension. Otherwise the
        result is the cocycle of the least upper bound, signed by the shuffle
        that sorts the factors by `iota`. A bound whose class holds no critical
        cell is rewritten in the basis through `expand_class`.
        """
        if a.degree == 0:
            return Cochain({b: 1})
        if b.degree == 0:
            return Cochain({a: 1})
        key = (a.diagram, b.diagram)
        cached = self._products.get(key)
        if cached is not None:
            return cached
        result = self._multiply(a, b)
        self._products[key] = result
        return result

    def _multiply(self, a: BasisClass, b: BasisClass) -> Cochain:
        if a.degree + b.degree > self.top_dimension:
            return Cochain()
        combined = one_cell_factors(self.order, a.diagram) + one_cell_factors(self.order, b.diagram)
        if len(set(combined)) < len(combined):
            return Cochain()
        bound = least_upper_bound(self.order, combined)
        if bound is None or bound.degree != len(combined):
            return Cochain()
        sign = -1 if _inversions([self.order.parent[f.edges[0]] for f in combined]) % 2 else 1
        cell = critical_cell_in_class(self.order, bound)
        if cell is None:
            LOGGER.debug("Expanding %s in the critical basis.", bound.label(self.order))
            return self.expand_class(bound).scale(sign)
        return Cochain({BasisClass(bound, cell): sign})

    def tensor_multiply(self, x: TensorElement, y: TensorElement) -> TensorElement:
        total: dict[tuple[BasisClass, BasisClass], Fraction] = {}
        for (a, b), cx in x.terms.items():
            for (a2, b2), cy in y.terms.items():
                left = self.multiply_basis(a, a2)
                if left.is_zero:
                    continue
                right = self.multiply_basis(b, b2)
                if right.is_zero:
                    continue
                sign = -1 if (a2.degree * b.degree) % 2 else 1
                for la, lc in left.terms.items():
                    for rb, rc in right.terms.items():
                        pair = (la, rb)
                        total[pair] = total.get(pair, Fraction(0)) + sign * cx * cy * lc * rc
        return TensorElement(total)

    def zero_divisor(self, a: BasisClass) -> TensorElement:
        """`a (x) 1 - 1 (x) a`, an element of the kernel of the cup product."""
        if a.degree == 0:
            raise ValueError("Zero-divisors are built from positive-degree classes.")
        return TensorElement({(a, self.unit): 1, (self.unit, a): -1})

    def cup(self, x: TensorElement) -> Cochain:
        """The multiplication map H* (x) H* -> H*."""
        total = Cochain()
        for (a, b), coefficient in x.terms.items():
            total = total + self.multiply_basis(a, b).scale(coefficient)
        return total

    def zero_divisor_product(self, classes: Iterable[BasisClass]) -> TensorElement:
        product = TensorElement({(self.unit, self.unit): 1})
        for cls in classes:
            product = self.tensor_multiply(product, self.zero_divisor(cls))
            if product.is_zero:
                break
        return product

    # -- lower bounds ----------------------------------------------------------

    def search_disjoint_critical_pair(self, k: int | None = None) -> tuple[Cell, Cell] | None:
        """First pair of critical `k`-cells whose factor classes are pairwise distinct.

        The search is exhaustive over all pairs, so `None` is definitive.
        """
        k = self.top_dimension if k is None else k
        if k == 0:
            return None
        cells = critical_cells(self.order, self.n, k, limits=self.limits)
        bits: dict[CloudDiagram, int] = {}
        masks: list[int] = []
        for cell in cells:
            mask = 0
            for factor in one_cell_factors(self.order, cloud_diagram(self.order, cell)):
                mask |= 1 << bits.setdefault(factor, len(bits))
            masks.append(mask)
        LOGGER.debug("Pair search over %d critical %d-cells.", len(cells), k)
        for i, mask in enumerate(masks):
            for j in range(i + 1, len(masks)):
                if mask & masks[j] == 0:
                    return cells[i], cells[j]
        return None

    def pair_product(self, phi: Cell, psi: Cell) -> TensorElement:
        classes = [*self.factors(self.basis_class_of(phi)), *self.factors(self.basis_class_of(psi))]
        return self.zero_divisor_product(classes)

    def zdcl_lower_bound(self) -> int:
        """A verified length of a nonzero product of zero-divisors."""
        top = self.top_dimension
        if top == 0:
            return 0
        pair = self.search_disjoint_critical_pair(top)
        if pair is not None and not self.pair_product(*pair).is_zero:
            return 2 * top
        product: TensorElement | None = None
        length = 0
        for cls in self.basis():
            if cls.degree == 0:
                continue
            zd = self.zero_divisor(cls)
            trial = zd if product is None else self.tensor_multiply(product, zd)
            if not trial.is_zero:
                product = trial
                length += 1
        return length

    # -- homology oracle -------------------------------------------------------

    def homology_oracle(self, max_dim: int | None = None) -> tuple[int, ...]:
        """Rational Betti numbers from the full cube complex, independent of Morse theory."""
        max_dim = self.top_dimension if max_dim is None else max_dim
        return betti_numbers(self.order, self.n, max_dim, limits=self.limits)

    def to_basis_document(self) -> BasisDocument:
        classes = self.basis()
        counts = [0] * (self.top_dimension + 1)
        for cls in classes:
            counts[cls.degree] += 1
        return BasisDocument(
            n=self.n,
            classes=[cls.to_document(self.order) for cls in classes],
            counts=counts,
        )


def _rank(entries: dict[int, dict[int, int]], rows: int, cols: int) -> int:
    if rows == 0 or cols == 0 or not entries:
        return 0
    sparse = {r: {c: QQ(v) for c, v in row.items()} for r, row in entries.items()}
    return DomainMatrix(sparse, (rows, cols), QQ).rank()


def betti_numbers(
    order: VertexOrder,
    n: int,
    max_dim: int,
    *,
    limits: BraidscapeLimits | None = None,
) -> tuple[int, ...]:
    """Betti numbers b_0..b_max_dim over the rationals."""
    if max_dim < 0:
        raise ValueError("max_dim must be non-negative.")
    cells_by_dim: dict[int, list[Cell]] = {d: [] for d in range(max_dim + 2)}
    for cell in enumerate_cells(order, n, cells_by_dim, limits=limits):
        cells_by_dim[cell.dim].append(cell)
    index = {d: {cell: i for i, cell in enumerate(cells)} for d, cells in cells_by_dim.items()}

    ranks = {0: 0}
    for d in range(1, max_dim + 2):
        entries: dict[int, dict[int, int]] = {}
        faces = index[d - 1]
        for col, cell in enumerate(cells_by_dim[d]):
            for face, coefficient in boundary(order, cell):
                entries.setdefault(faces[face], {})[col] = coefficient
        ranks[d] = _rank(entries, len(faces), len(cells_by_dim[d]))

    betti = tuple(
        len(cells_by_dim[d]) - ranks[d] - ranks[d + 1] for d in range(max_dim + 1)
    )
    LOGGER.info("Betti numbers for n=%d up to degree %d: %s", n, max_dim, betti)
    return betti


# -- module-level entry points ----------------------------------------------


@lru_cache(maxsize=32)
def _shared_ring(order: VertexOrder, n: int, limits: BraidscapeLimits) -> CohomologyRing:
    return CohomologyRing(order, n, limits=limits)


def ring_for(order: VertexOrder, n: int, *, limits: BraidscapeLimits | None = None) -> CohomologyRing:
    """Ring shared between calls with the same tree, `n` and resolved limits."""
    return _shared_ring(order, n, resolve_limits(limits))


def basis(order: VertexOrder, n: int, *, limits: BraidscapeLimits | None = None) -> list[BasisClass]:
    return ring_for(order, n, limits=limits).basis()


def multiply_basis(
    order: VertexOrder,
    n: int,
    a: BasisClass,
    b: BasisClass,
    *,
    limits: BraidscapeLimits | None = None,
) -> Cochain:
    return ring_for(order, n, limits=limits).multiply_basis(a, b)


def tensor_multiply(
    order: VertexOrder,
    n: int,
    x: TensorElement,
    y: TensorElement,
    *,
    limits: BraidscapeLimits | None = None,
) -> TensorElement:
    return ring_for(order, n, limits=limits).tensor_multiply(x, y)


def zero_divisor(order: VertexOrder, n: int, a: BasisClass) -> TensorElement:
    return ring_for(order, n).zero_divisor(a)


def search_disjoint_critical_pair(
    order: VertexOrder,
    n: int,
    k: int | None = None,
    *,
    limits: BraidscapeLimits | None = None,
) -> tuple[Cell, Cell] | None:
    return ring_for(order, n, limits=limits).search_disjoint_critical_pair(k)


def zdcl_lower_bound(order: VertexOrder, n: int, *, limits: BraidscapeLimits | None = None) -> int:
    return ring_for(order, n, limits=limits).zdcl_lower_bound()


def homology_oracle(
    order: VertexOrder,
    n: int,
    max_dim: int | None = None,
    *,
    limits: BraidscapeLimits | None = None,
) -> tuple[int, ...]:
    return ring_for(order, n, limits=limits).homology_oracle(max_dim)


def betti_document(order: VertexOrder, n: int, max_dim: int, *, limits: BraidscapeLimits | None = None) -> BettiDocument:
    ring = CohomologyRing(order, n, limits=limits)
    counts = [len(critical_cells(order, n, k, limits=limits)) for k in range(max_dim + 1)]
    return BettiDocument(n=n, betti=list(ring.homology_oracle(max_dim)), critical_counts=counts)
