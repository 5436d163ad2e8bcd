"""Topological complexity of configuration spaces of trees, with certificates.

`decide_tc` subdivides the tree, picks the applicable clause of the criterion,
searches for arcs, builds a pair of critical top cells whose 1-cell factors are
pairwise distinct and re-verifies the product of zero-divisors they produce.
The lower bound `2k` from that product and the upper bound `2k + 1` from the
top critical dimension `k` pinch the value.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .arcs import (
    CASE_2A,
    CASE_2B_EVEN,
    CASE_2B_ODD,
    CASE_STATEMENT1,
    ArcCertificate,
    certificate_from_document,
    check_arc_certificate,
    degree_three,
    find_case2a,
    find_case2b,
    high_degree,
    min_allowable_k,
)
from .cell_complex import Cell, CellClass, classify_cell, parse_cell, reduced_complex_dim
from .clouds import CloudDiagram, cloud_diagram, diagram_from_document, one_cell_factors
from .cohomology import CohomologyRing
from .errors import BraidscapeError, CertificateInconsistentError
from .models import TcCertificateDocument, VerificationDocument
from .settings import BraidscapeLimits
from .tree import (
    Point,
    Tree,
    TreeStats,
    VertexOrder,
    order_vertices,
    stats,
    subdivide_for,
    tree_from_document,
)

LOGGER = logging.getLogger(__name__)

CASE_TRIVIAL = "trivial"
CASE_INTERVAL = "interval"

DETERMINED = "determined"
NOT_APPLICABLE = "not_applicable"


class ReasonCode(str, Enum):
    BELOW_STATEMENT1_THRESHOLD = "below_statement1_threshold"
    NO_CASE2_CERTIFICATE = "no_case2_certificate"
    CONNECTIVITY_FAILURE = "connectivity_failure"


@dataclass(frozen=True, slots=True)
class TcCertificate:
    """Outcome of `decide_tc` over the (subdivided) tree held by `order`."""

    order: VertexOrder = field(repr=False, compare=False)
    status: str
    n: int
    m: int
    r: int
    s: int
    value: int | None = None
    case: str | None = None
    top_dimension: int | None = None
    arc_certificate: ArcCertificate | None = None
    phi: Cell | None = None
    psi: Cell | None = None
    phi_factors: tuple[CloudDiagram, ...] = ()
    psi_factors: tuple[CloudDiagram, ...] = ()
    applies_to: tuple[str, ...] = ()
    ordered_caveat: ReasonCode | None = None
    reason: ReasonCode | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def determined(self) -> bool:
        return self.status == DETERMINED

    def to_document(self) -> TcCertificateDocument:
        order = self.order
        return TcCertificateDocument(
            status=self.status,
            n=self.n,
            m=self.m,
            r=self.r,
            s=self.s,
            value=self.value,
            case=self.case,
            top_dimension=self.top_dimension,
            arc_certificate=self.arc_certificate.to_document(order) if self.arc_certificate else None,
            phi=self.phi.to_document(order, CellClass.CRITICAL) if self.phi else None,
            psi=self.psi.to_document(order, CellClass.CRITICAL) if self.psi else None,
            phi_factors=[d.to_document(order) for d in self.phi_factors],
            psi_factors=[d.to_document(order) for d in self.psi_factors],
            applies_to=list(self.applies_to),
            ordered_caveat=self.ordered_caveat.value if self.ordered_caveat else None,
            reason=self.reason.value if self.reason else None,
            diagnostics=dict(sorted(self.diagnostics.items())),
            tree=order.tree.to_document(),
        )


def certificate_from_tc_document(document: TcCertificateDocument) -> TcCertificate:
    """Rebuild a certificate from its document, for independent verification.

    Raises:
        CertificateInconsistentError: If the document does not fit its tree.
    """
    if document.tree is None:
        raise CertificateInconsistentError("Certificate document carries no tree.")
    order = order_vertices(tree_from_document(document.tree))
    try:
        phi = parse_cell(order, document.phi.members) if document.phi else None
        psi = parse_cell(order, document.psi.members) if document.psi else None
        phi_factors = tuple(diagram_from_document(order, d) for d in document.phi_factors)
        psi_factors = tuple(diagram_from_document(order, d) for d in document.psi_factors)
    except BraidscapeError as exc:
        raise CertificateInconsistentError(f"Certificate does not fit its tree: {exc}") from exc
    return TcCertificate(
        order=order,
        status=document.status,
        n=document.n,
        m=document.m,
        r=document.r,
        s=document.s,
        value=document.value,
        case=document.case,
        top_dimension=document.top_dimension,
        arc_certificate=(
            certificate_from_document(order, document.arc_certificate)
            if document.arc_certificate
            else None
        ),
        phi=phi,
        psi=psi,
        phi_factors=phi_factors,
        psi_factors=psi_factors,
        applies_to=tuple(document.applies_to),
        ordered_caveat=ReasonCode(document.ordered_caveat) if document.ordered_caveat else None,
        reason=ReasonCode(document.reason) if document.reason else None,
        diagnostics=dict(document.diagnostics),
    )


# -- critical cell construction -------------------------------------------------


class _CellBuilder:
    def __init__(self, order: VertexOrder, n: int) -> None:
        self.order = order
        self.n = n
        self.edges: list[int] = []
        self.vertices: list[int] = []
        self.occupied: set[int] = set()

    def add_pair(self, v: int, edge_direction: int, witness_direction: int) -> None:
        """Edge in `edge_direction` at `v`, blocked by the child in `witness_direction`."""
        order = self.order
        if order.degree(v) <= edge_direction:
            raise CertificateInconsistentError(
                f"Vertex {order.ids[v]!r} has no direction {edge_direction}."
            )
        edge = order.child_in_direction(v, edge_direction)
        witness = order.child_in_direction(v, witness_direction)
        for x in (v, edge, witness):
            if x in self.occupied:
                raise CertificateInconsistentError(
                    f"Vertex {order.ids[x]!r} is used twice; is the tree sufficiently subdivided?"
                )
        self.edges.append(edge)
        self.vertices.append(witness)
        self.occupied.update((v, edge, witness))

    def add_vertex(self, v: int) -> None:
        if v in self.occupied:
            raise CertificateInconsistentError(f"Vertex {self.order.ids[v]!r} is used twice.")
        self.vertices.append(v)
        self.occupied.add(v)

    def take_in_cloud(self, point: Point) -> None:
        """Add the minimal unused vertex of the cloud holding `point`."""
        edges = tuple(sorted(self.edges))
        root = _endpoint_cloud(self.order, edges, point)
        for v in self.order.cloud_members(edges)[root]:
            if v not in self.occupied:
                self.add_vertex(v)
                return
        raise CertificateInconsistentError(
            f"Cloud of {self.order.ids[root]!r} has no room for another vertex."
        )

    def fill(self) -> None:
        for v in range(self.order.size):
            if len(self.vertices) + len(self.edges) >= self.n:
                break
            if v not in self.occupied:
                self.add_vertex(v)

    def build(self) -> Cell:
        cell = Cell.of(self.vertices, self.edges)
        if cell.n != self.n or not cell.is_valid(self.order):
            raise CertificateInconsistentError(f"Constructed cell {cell.label(self.order)} is not a cell for n={self.n}.")
        if classify_cell(self.order, cell) is not CellClass.CRITICAL:
            raise CertificateInconsistentError(f"Constructed cell {cell.label(self.order)} is not critical.")
        return cell


def _endpoint_cloud(order: VertexOrder, edges: tuple[int, ...], point: Point) -> int:
    """Root of the cloud holding `point`, after sliding the point along its chain
    to the nearest vertex that lies in a cloud (ties go away from the base)."""
    roots = order.cloud_roots(edges)
    start = sorted(point.carrier(order))
    frontier = start
    seen = set(start)
    while frontier:
        hits = [v for v in frontier if roots[v] >= 0]
        if hits:
            return roots[max(hits)]
        following: list[int] = []
        for v in frontier:
            if order.degree(v) > 2 and v not in start:
                continue
            neighbors = [*order.children[v], *((order.parent[v],) if v else ())]
            for w in neighbors:
                if w not in seen and (order.degree(w) <= 2 or roots[w] >= 0):
                    seen.add(w)
                    following.append(w)
        frontier = following
    raise CertificateInconsistentError(f"No cloud near arc endpoint {point.label(order)}.")


def build_phi_psi(order: VertexOrder, n: int, tree_stats: TreeStats, cert: ArcCertificate) -> tuple[Cell, Cell]:
    """Critical top cells for the clause recorded in `cert`.

    Raises:
        CertificateInconsistentError: If the certificate does not fit the tree.
    """
    phi = _CellBuilder(order, n)
    psi = _CellBuilder(order, n)
    if cert.case == CASE_STATEMENT1:
        m = len(order.essential)
        if n - 2 * m < cert.k:
            raise CertificateInconsistentError(f"Statement 1 needs n >= 2m + k = {2 * m + cert.k}.")
        for v in order.essential:
            phi.add_pair(v, 2, 1)
            if order.degree(v) == 3:
                psi.add_pair(v, 2, 1)
            else:
                psi.add_pair(v, 3, 2)
        for arc in cert.arcs:
            phi.take_in_cloud(arc.start_point(order))
            psi.take_in_cloud(arc.end_point(order))
        phi.fill()
        psi.fill()
        return phi.build(), psi.build()

    q = cert.q
    if q is None or n != 2 * q + (cert.epsilon or 0):
        raise CertificateInconsistentError(f"Case-2 certificate does not match n={n}.")

    if cert.case == CASE_2A:
        r = tree_stats.r
        high = high_degree(order)[: min(r, q)]
        three = degree_three(order)
        spare = max(q - r, 0)
        for v in high:
            phi.add_pair(v, 2, 1)
            psi.add_pair(v, 3, 2)
        for v in three[:spare]:
            phi.add_pair(v, 2, 1)
        for v in three[spare : 2 * spare]:
            psi.add_pair(v, 2, 1)
        if cert.epsilon:
            phi.add_vertex(0)
            psi.add_vertex(0)
        return phi.build(), psi.build()

    if cert.case not in (CASE_2B_EVEN, CASE_2B_ODD):
        raise CertificateInconsistentError(f"Unknown certificate case {cert.case!r}.")
    ends = {x for arc in cert.arcs for x in (arc.path[0], arc.path[-1])}
    hats = [v for v in high_degree(order) if v not in ends]
    tilde_count = q - len(hats) - len(cert.arcs)
    pool = [*cert.interior_targets, *cert.targets]
    if tilde_count < 0 or len(pool) < tilde_count:
        raise CertificateInconsistentError("Too few degree-3 targets for the top dimension.")
    for arc in cert.arcs:
        phi.add_pair(arc.path[0], 2, 1)
        psi.add_pair(arc.path[-1], 2, 1)
    for v in hats:
        phi.add_pair(v, 2, 1)
        psi.add_pair(v, 3, 2)
    for v in pool[:tilde_count]:
        phi.add_pair(v, 2, 1)
        psi.add_pair(v, 2, 1)
    if cert.case == CASE_2B_ODD:
        if cert.initial_arc is None:
            raise CertificateInconsistentError("Odd case needs an initial arc.")
        phi.take_in_cloud(cert.initial_arc.start_point(order))
        psi.take_in_cloud(cert.initial_arc.end_point(order))
    return phi.build(), psi.build()


# -- decision ---------------------------------------------------------------------


def _applies_to(tree_stats: TreeStats) -> tuple[tuple[str, ...], ReasonCode | None]:
    if tree_stats.ordered_connected:
        return ("unordered", "ordered"), None
    return ("unordered",), ReasonCode.CONNECTIVITY_FAILURE


def decide_tc(
    tree: Tree,
    n: int,
    *,
    limits: BraidscapeLimits | None = None,
    verify: bool = True,
) -> TcCertificate:
    """Decide the topological complexity of the configuration spaces of `n` points.

    Args:
        tree: Any tree; it is subdivided internally.
        n: Number of points.
        limits: Search and enumeration caps.
        verify: Re-verify determined outcomes before returning them.

    Raises:
        CellCapExceededError: If an enumeration would exceed the cell cap.
        ArcSearchCapExceededError: If an arc search hits its cap or timeout.
        CertificateInconsistentError: If a constructed certificate fails
            re-verification.
    """
    if n < 1:
        raise ValueError("n must be at least 1.")
    tree_stats = stats(tree, n)
    m, r, s = tree_stats.m, tree_stats.r, tree_stats.s
    order = order_vertices(subdivide_for(tree, n))
    base = {"order": order, "n": n, "m": m, "r": r, "s": s}

    if n == 1 or m == 0:
        applies, caveat = _applies_to(tree_stats)
        case = CASE_TRIVIAL if n == 1 else CASE_INTERVAL
        LOGGER.info("TC=1 (%s) for n=%d.", case, n)
        return TcCertificate(
            **base,
            status=DETERMINED,
            value=1,
            case=case,
            top_dimension=0,
            applies_to=applies,
            ordered_caveat=caveat,
        )

    q, epsilon = divmod(n, 2)
    diagnostics: dict[str, Any] = {"vertices": order.size, "all_degree_three": s == 0}
    cert: ArcCertificate | None
    if n >= 2 * m:
        k, arcs = min_allowable_k(order, limits=limits)
        diagnostics.update(k=k, threshold=2 * m + k)
        if n < 2 * m + k:
            LOGGER.info("n=%d lies in the gap below 2m+k=%d.", n, 2 * m + k)
            return TcCertificate(
                **base,
                status=NOT_APPLICABLE,
                reason=ReasonCode.BELOW_STATEMENT1_THRESHOLD,
                top_dimension=reduced_complex_dim(order, n),
                diagnostics=diagnostics,
            )
        cert = ArcCertificate(case=CASE_STATEMENT1, arcs=arcs, targets=degree_three(order), k=k)
        top = m
    else:
        cert = find_case2a(order, tree_stats, q, epsilon)
        if cert is None:
            cert = find_case2b(order, tree_stats, q, epsilon, limits=limits)
        if cert is None:
            return TcCertificate(
                **base,
                status=NOT_APPLICABLE,
                reason=ReasonCode.NO_CASE2_CERTIFICATE,
                top_dimension=reduced_complex_dim(order, n),
                diagnostics=diagnostics,
            )
        top = q

    phi, psi = build_phi_psi(order, n, tree_stats, cert)
    applies, caveat = _applies_to(tree_stats)
    certificate = TcCertificate(
        **base,
        status=DETERMINED,
        value=2 * top + 1,
        case=cert.case,
        top_dimension=top,
        arc_certificate=cert,
        phi=phi,
        psi=psi,
        phi_factors=tuple(one_cell_factors(order, cloud_diagram(order, phi))),
        psi_factors=tuple(one_cell_factors(order, cloud_diagram(order, psi))),
        applies_to=applies,
        ordered_caveat=caveat,
        diagnostics=diagnostics,
    )
    LOGGER.info("TC=%d for n=%d via case %s.", certificate.value, n, cert.case)
    if verify:
        report = verify_certificate(certificate, limits=limits)
        if not report.ok:
            raise CertificateInconsistentError(f"Certificate failed re-verification: {report.failure}")
    return certificate


# -- verification -------------------------------------------------------------------


@dataclass(slots=True)
class VerificationReport:
    ok: bool = True
    checks: dict[str, bool] = field(default_factory=dict)
    failure: str | None = None

    def record(self, name: str, passed: bool, message: str) -> bool:
        self.checks[name] = passed
        if not passed and self.ok:
            self.ok = False
            self.failure = f"{name}: {message}"
        return passed

    def to_document(self) -> VerificationDocument:
        return VerificationDocument(ok=self.ok, checks=dict(self.checks), failure=self.failure)


def verify_certificate(cert: TcCertificate, *, limits: BraidscapeLimits | None = None) -> VerificationReport:
    """Independently re-check a determined certificate; the first failure is reported."""
    report = VerificationReport()
    if not report.record("status", cert.determined, "only determined certificates can be verified"):
        return report
    order, n = cert.order, cert.n
    tree_stats = stats(order.tree, n)
    report.record(
        "tree_stats",
        (tree_stats.m, tree_stats.r, tree_stats.s) == (cert.m, cert.r, cert.s),
        "essential-vertex counts do not match the tree",
    )

    if cert.phi is None or cert.psi is None:
        top = 0 if n == 1 or tree_stats.m == 0 else None
        report.record("top_dimension", top == 0 and cert.top_dimension == 0, "trivial outcome needs a contractible case")
        report.record("value", cert.value == 1, "trivial outcome must have value 1")
        return report

    if not report.record(
        "cells",
        all(c.is_valid(order) and c.n == n for c in (cert.phi, cert.psi)),
        "phi and psi must be cells of the configuration space",
    ):
        return report
    report.record("phi_critical", classify_cell(order, cert.phi) is CellClass.CRITICAL, "phi is not critical")
    report.record("psi_critical", classify_cell(order, cert.psi) is CellClass.CRITICAL, "psi is not critical")

    ring = CohomologyRing(order, n, limits=limits)
    top = ring.top_dimension
    report.record(
        "top_dimension",
        top == cert.top_dimension == cert.phi.dim == cert.psi.dim,
        f"top critical dimension is {top}, certificate claims {cert.top_dimension}",
    )
    report.record("value", cert.value == 2 * top + 1, f"value must be {2 * top + 1}")

    phi_factors = one_cell_factors(order, cloud_diagram(order, cert.phi))
    psi_factors = one_cell_factors(order, cloud_diagram(order, cert.psi))
    report.record(
        "factor_diagrams",
        tuple(phi_factors) == cert.phi_factors and tuple(psi_factors) == cert.psi_factors,
        "stored factor diagrams differ from the cells' factors",
    )
    distinct = report.record(
        "factors_distinct",
        len(set(phi_factors) | set(psi_factors)) == 2 * top,
        "phi and psi share a 1-cell factor class",
    )
    if cert.arc_certificate is not None:
        problem = check_arc_certificate(order, tree_stats, cert.arc_certificate)
        report.record("arc_certificate", problem is None, problem or "")
    if distinct and report.ok:
        product = ring.pair_product(cert.phi, cert.psi)
        report.record("zero_divisor_product", not product.is_zero, "the product of zero-divisors vanishes")
    return report


# -- experiments --------------------------------------------------------------------


def tc_profile(
    tree: Tree,
    n_values: Iterable[int],
    *,
    limits: BraidscapeLimits | None = None,
) -> list[TcCertificate]:
    """Outcomes over a range of point counts."""
    return [decide_tc(tree, n, limits=limits) for n in n_values]


def gap(profile: Sequence[TcCertificate]) -> list[int]:
    """Point counts left undetermined by the criterion."""
    return [c.n for c in profile if not c.determined]
