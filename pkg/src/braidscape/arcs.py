"""Oriented arcs, direction sums at vertices, allowability and arc certificate searches.

Arcs are geodesics of the tree, stored as the vertex sequence they traverse.
When an endpoint lies strictly inside the first (or last) edge, the flag
`start_inside` (`end_inside`) is set and that outer vertex is not on the arc.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement

from .errors import ArcSearchCapExceededError, CertificateInconsistentError
from .models import ArcCertificateDocument, ArcDocument
from .settings import BraidscapeLimits, resolve_limits
from .tree import Point, TreeStats, VertexOrder

LOGGER = logging.getLogger(__name__)

CASE_STATEMENT1 = "1"
CASE_2A = "2a"
CASE_2B_EVEN = "2b-even"
CASE_2B_ODD = "2b-odd"


@dataclass(frozen=True, slots=True)
class OrientedArc:
    path: tuple[int, ...]
    start_inside: bool = False
    end_inside: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", tuple(self.path))
        if len(self.path) < 2:
            raise ValueError("An arc spans at least one edge.")
        if len(set(self.path)) != len(self.path):
            raise ValueError("An arc in a tree never revisits a vertex.")

    @property
    def initial(self) -> int | None:
        """Initial vertex, or `None` when the arc starts inside an edge."""
        return None if self.start_inside else self.path[0]

    @property
    def terminal(self) -> int | None:
        return None if self.end_inside else self.path[-1]

    @property
    def endpoints(self) -> frozenset[int]:
        return frozenset(v for v in (self.initial, self.terminal) if v is not None)

    def on_arc(self) -> tuple[int, ...]:
        """Vertices lying on the arc."""
        start = 1 if self.start_inside else 0
        stop = len(self.path) - 1 if self.end_inside else len(self.path)
        return self.path[start:stop]

    def interior(self) -> tuple[int, ...]:
        return tuple(v for v in self.on_arc() if v not in self.endpoints)

    def start_point(self, order: VertexOrder) -> Point:
        if not self.start_inside:
            return Point.at(self.path[0])
        edge = order.edge_between(self.path[0], self.path[1])
        return Point.inside(edge, Fraction(1, 2))

    def end_point(self, order: VertexOrder) -> Point:
        if not self.end_inside:
            return Point.at(self.path[-1])
        edge = order.edge_between(self.path[-2], self.path[-1])
        return Point.inside(edge, Fraction(1, 2))

    def check(self, order: VertexOrder) -> None:
        for a, b in zip(self.path, self.path[1:]):
            if order.parent[a] != b and order.parent[b] != a:
                raise CertificateInconsistentError(
                    f"Arc steps between non-adjacent vertices {order.ids[a]!r} and {order.ids[b]!r}."
                )

    def reversed(self) -> OrientedArc:
        return OrientedArc(
            path=tuple(reversed(self.path)),
            start_inside=self.end_inside,
            end_inside=self.start_inside,
        )

    def label(self, order: VertexOrder) -> str:
        inner = "->".join(order.ids[v] for v in self.path)
        return f"{'(' if self.start_inside else '['}{inner}{')' if self.end_inside else ']'}"

    def to_document(self, order: VertexOrder) -> ArcDocument:
        return ArcDocument(
            path=[order.ids[v] for v in self.path],
            start_inside=self.start_inside,
            end_inside=self.end_inside,
        )


def arc_from_document(order: VertexOrder, document: ArcDocument) -> OrientedArc:
    try:
        arc = OrientedArc(
            path=tuple(order.number[v] for v in document.path),
            start_inside=document.start_inside,
            end_inside=document.end_inside,
        )
    except (KeyError, ValueError) as exc:
        raise CertificateInconsistentError(f"Arc does not fit the tree: {exc}") from exc
    arc.check(order)
    return arc


def arc_between(order: VertexOrder, a: Point, b: Point) -> OrientedArc:
    """The geodesic arc from `a` to `b`, oriented from `a`."""
    if a == b:
        raise ValueError("Arc endpoints must differ.")
    a_exits = [a.vertex] if a.is_vertex else [order.parent[a.edge], a.edge]
    b_exits = [b.vertex] if b.is_vertex else [order.parent[b.edge], b.edge]
    if not a.is_vertex and a.edge == b.edge:
        first, second = (a_exits[0], a_exits[1]) if a.t < b.t else (a_exits[1], a_exits[0])
        return OrientedArc(path=(first, second), start_inside=True, end_inside=True)
    path = min(
        (order.path_between(x, y) for x in a_exits for y in b_exits),
        key=len,
    )
    if not a.is_vertex:
        path.insert(0, next(x for x in a_exits if x != path[0]))
    if not b.is_vertex:
        path.append(next(y for y in b_exits if y != path[-1]))
    return OrientedArc(path=tuple(path), start_inside=not a.is_vertex, end_inside=not b.is_vertex)


# -- direction sums -------------------------------------------------------------


def _neighbor_direction(order: VertexOrder, v: int, w: int) -> int:
    return 0 if order.parent[v] == w else order.child_direction(w)


def _contributions(order: VertexOrder, arc: OrientedArc) -> dict[int, dict[int, int]]:
    """Per vertex on the arc, +1 toward the vertex along the arriving edge and
    -1 along the leaving edge."""
    result: dict[int, dict[int, int]] = {}
    last = len(arc.path) - 1
    for index, v in enumerate(arc.path):
        if v == 0:
            continue
        if (index == 0 and arc.start_inside) or (index == last and arc.end_inside):
            continue
        signs: dict[int, int] = {}
        if index > 0:
            signs[_neighbor_direction(order, v, arc.path[index - 1])] = 1
        if index < last:
            signs[_neighbor_direction(order, v, arc.path[index + 1])] = -1
        result[v] = signs
    return result


def eta(order: VertexOrder, arcs: Iterable[OrientedArc], v: int) -> tuple[int, ...]:
    """Direction sums at `v`, indexed by direction (0 points toward the base)."""
    if v == 0:
        raise ValueError("Directions are undefined at the base vertex.")
    sums = [0] * order.degree(v)
    for arc in arcs:
        for direction, sign in _contributions(order, arc).get(v, {}).items():
            sums[direction] += sign
    return tuple(sums)


def is_allowable(order: VertexOrder, arcs: Sequence[OrientedArc], targets: Iterable[int]) -> bool:
    endpoints = frozenset().union(*(arc.endpoints for arc in arcs)) if arcs else frozenset()
    for v in targets:
        if v == 0:
            raise ValueError("Directions are undefined at the base vertex.")
        if v in endpoints or not any(eta(order, arcs, v)):
            return False
    return True


# -- canonical positions --------------------------------------------------------


def chains(order: VertexOrder) -> list[tuple[int, ...]]:
    """Maximal paths with degree-2 interiors, each oriented away from the base."""
    result: list[tuple[int, ...]] = []
    for u in range(order.size):
        if order.degree(u) == 2 and u != 0:
            continue
        for c in order.children[u]:
            chain = [u, c]
            while order.degree(chain[-1]) == 2:
                chain.append(order.children[chain[-1]][0])
            result.append(tuple(chain))
    result.sort(key=lambda chain: chain[1])
    return result


def chain_position(order: VertexOrder, chain: Sequence[int]) -> Point:
    """The middle of a chain: its middle vertex, or the midpoint of a single edge."""
    length = len(chain) - 1
    if length >= 2:
        return Point.at(chain[length // 2])
    return Point.inside(chain[1], Fraction(1, 2))


def chain_positions(order: VertexOrder) -> list[Point]:
    return [chain_position(order, chain) for chain in chains(order)]


def degree_three(order: VertexOrder) -> tuple[int, ...]:
    return tuple(v for v in order.essential if order.degree(v) == 3)


def high_degree(order: VertexOrder) -> tuple[int, ...]:
    return tuple(v for v in order.essential if order.degree(v) > 3)


# -- certificates ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ArcCertificate:
    """Arcs and vertex sets witnessing one clause of the main criterion.

    `targets` is the allowable set (all degree-3 vertices for statement 1, the
    set used for case 2b, or the degree-3 vertices carrying edges for case 2a).
    `interior_targets` holds the degree-3 vertices inside `initial_arc`.
    """

    case: str
    arcs: tuple[OrientedArc, ...] = ()
    targets: tuple[int, ...] = ()
    initial_arc: OrientedArc | None = None
    interior_targets: tuple[int, ...] = ()
    k: int = 0
    q: int | None = None
    epsilon: int | None = None
    r_prime: int | None = None
    s_prime: int | None = None

    def to_document(self, order: VertexOrder) -> ArcCertificateDocument:
        return ArcCertificateDocument(
            case=self.case,
            arcs=[arc.to_document(order) for arc in self.arcs],
            initial_arc=self.initial_arc.to_document(order) if self.initial_arc else None,
            targets=[order.ids[v] for v in self.targets],
            interior_targets=[order.ids[v] for v in self.interior_targets],
            k=self.k,
            q=self.q,
            epsilon=self.epsilon,
            r_prime=self.r_prime,
            s_prime=self.s_prime,
        )


def certificate_from_document(order: VertexOrder, document: ArcCertificateDocument) -> ArcCertificate:
    try:
        targets = tuple(order.number[v] for v in document.targets)
        interior = tuple(order.number[v] for v in document.interior_targets)
    except KeyError as exc:
        raise CertificateInconsistentError(f"Unknown vertex {exc} in arc certificate.") from exc
    return ArcCertificate(
        case=document.case,
        arcs=tuple(arc_from_document(order, a) for a in document.arcs),
        targets=targets,
        initial_arc=arc_from_document(order, document.initial_arc) if document.initial_arc else None,
        interior_targets=interior,
        k=document.k,
        q=document.q,
        epsilon=document.epsilon,
        r_prime=document.r_prime,
        s_prime=document.s_prime,
    )


class _Budget:
    """Counts tested collections against the configured cap and timeout."""

    def __init__(self, limits: BraidscapeLimits | None, what: str) -> None:
        resolved = resolve_limits(limits)
        self.cap = resolved.max_arc_collections
        self.deadline = (
            time.monotonic() + resolved.arc_timeout_seconds
            if resolved.arc_timeout_seconds is not None
            else None
        )
        self.what = what
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.cap:
            raise ArcSearchCapExceededError(
                f"{self.what}: tested more than {self.cap} arc collections without a verdict."
            )
        if self.deadline is not None and self.used % 256 == 0 and time.monotonic() > self.deadline:
            raise ArcSearchCapExceededError(f"{self.what}: arc search timed out.")


def _signature(order: VertexOrder, arc: OrientedArc, watched: tuple[int, ...]) -> tuple:
    contributions = _contributions(order, arc)
    return tuple(
        tuple(contributions.get(v, {}).get(d, 0) for d in range(3)) for v in watched
    )


def min_allowable_k(
    order: VertexOrder,
    *,
    limits: BraidscapeLimits | None = None,
) -> tuple[int, tuple[OrientedArc, ...]]:
    """Smallest number of oriented arcs allowable for every degree-3 vertex.

    Arc endpoints range over one middle position per chain; arcs with the same
    effect on degree-3 vertices are tried once. Collections are tested in
    lexicographic order, so the witness is deterministic.

    Raises:
        ArcSearchCapExceededError: If the cap or timeout is hit first.
    """
    watched = degree_three(order)
    if not watched:
        return 0, ()
    positions = chain_positions(order)
    representatives: dict[tuple, OrientedArc] = {}
    for a in positions:
        for b in positions:
            if a == b:
                continue
            arc = arc_between(order, a, b)
            signature = _signature(order, arc, watched)
            if any(any(step) for step in signature):
                representatives.setdefault(signature, arc)
    signatures = list(representatives)
    budget = _Budget(limits, "min_allowable_k")
    LOGGER.debug("Allowability search over %d arc shapes for %d vertices.", len(signatures), len(watched))

    for k in range(1, len(order.essential) + 1):
        for chosen in combinations_with_replacement(range(len(signatures)), k):
            budget.tick()
            if all(
                any(sum(signatures[i][slot][d] for i in chosen) for d in range(3))
                for slot in range(len(watched))
            ):
                arcs = tuple(representatives[signatures[i]] for i in chosen)
                if not is_allowable(order, arcs, watched):
                    raise CertificateInconsistentError("Allowability witness failed re-verification.")
                LOGGER.info("Minimal allowable arc count is %d.", k)
                return k, arcs
    raise ArcSearchCapExceededError("No allowable collection with at most m arcs was found.")


def statement1_certificate(order: VertexOrder, *, limits: BraidscapeLimits | None = None) -> ArcCertificate:
    k, arcs = min_allowable_k(order, limits=limits)
    return ArcCertificate(case=CASE_STATEMENT1, arcs=arcs, targets=degree_three(order), k=k)


def find_case2a(order: VertexOrder, stats: TreeStats, q: int, epsilon: int = 0) -> ArcCertificate | None:
    """Certificate for `s >= 2(q - r)`; no arcs are needed."""
    if stats.s < 2 * (q - stats.r):
        return None
    used = degree_three(order)[: 2 * max(q - stats.r, 0)]
    return ArcCertificate(case=CASE_2A, targets=used, q=q, epsilon=epsilon)


def _essential_arcs(order: VertexOrder, forbidden: frozenset[int]) -> list[OrientedArc]:
    ends = [v for v in order.essential if v not in forbidden]
    return [
        OrientedArc(path=tuple(order.path_between(a, b)))
        for a in ends
        for b in ends
        if a != b
    ]


def _arc_collections(
    candidates: Sequence[OrientedArc],
    k: int,
    budget: _Budget,
) -> Iterator[tuple[OrientedArc, ...]]:
    for chosen in combinations(candidates, k):
        ends = [x for arc in chosen for x in (arc.path[0], arc.path[-1])]
        if len(ends) != len(set(ends)):
            continue
        budget.tick()
        yield chosen


def _allowable_subset(order: VertexOrder, arcs: Sequence[OrientedArc], pool: Iterable[int]) -> tuple[int, ...]:
    endpoints = frozenset().union(*(arc.endpoints for arc in arcs)) if arcs else frozenset()
    return tuple(v for v in pool if v not in endpoints and any(eta(order, arcs, v)))


def _search_case2b_arcs(
    order: VertexOrder,
    q: int,
    excluded: frozenset[int],
    needed_offset: int,
    budget: _Budget,
) -> tuple[tuple[OrientedArc, ...], tuple[int, ...], int] | None:
    """First arcs A_1..A_k with distinct essential endpoints outside `excluded`
    and an allowable degree-3 set of size at least `q - r' - k - needed_offset`."""
    high = high_degree(order)
    pool = tuple(v for v in degree_three(order) if v not in excluded)
    candidates = _essential_arcs(order, excluded)
    for k in range(1, len(order.essential) // 2 + 1):
        for arcs in _arc_collections(candidates, k, budget):
            ends = {x for arc in arcs for x in (arc.path[0], arc.path[-1])}
            r_prime = sum(1 for v in high if v not in ends)
            need = q - r_prime - k - needed_offset
            if q - r_prime - k < 0:
                continue
            allowed = _allowable_subset(order, arcs, pool)
            if len(allowed) >= need:
                return arcs, allowed, r_prime
    return None


def find_case2b(
    order: VertexOrder,
    stats: TreeStats,
    q: int,
    epsilon: int,
    *,
    limits: BraidscapeLimits | None = None,
) -> ArcCertificate | None:
    """Exhaustive search for a case-2b certificate; `None` is definitive.

    For `epsilon = 1` the initial arc ranges over the trivial arc along the
    base edge and all geodesics between chain positions. Every subset of at
    most `q` degree-3 vertices inside the arc is tried as the interior target
    set, largest first, once per subset.

    Raises:
        ArcSearchCapExceededError: If the cap or timeout is hit first.
    """
    if epsilon not in (0, 1):
        raise ValueError("epsilon must be 0 or 1.")
    budget = _Budget(limits, "find_case2b")
    if epsilon == 0:
        found = _search_case2b_arcs(order, q, frozenset(), 0, budget)
        if found is None:
            LOGGER.info("No case 2b certificate for q=%d.", q)
            return None
        arcs, allowed, r_prime = found
        return ArcCertificate(
            case=CASE_2B_EVEN,
            arcs=arcs,
            targets=allowed,
            k=len(arcs),
            q=q,
            epsilon=0,
            r_prime=r_prime,
        )

    watched = set(degree_three(order))
    seen: set[tuple[int, ...]] = set()
    for initial, interior in _interior_choices(order, watched, q):
        if interior in seen:
            continue
        seen.add(interior)
        budget.tick()
        s_prime = len(interior)
        if s_prime >= q - stats.r:
            return ArcCertificate(
                case=CASE_2B_ODD,
                initial_arc=initial,
                interior_targets=interior,
                k=0,
                q=q,
                epsilon=1,
                r_prime=stats.r,
                s_prime=s_prime,
            )
        found = _search_case2b_arcs(order, q, frozenset(interior), s_prime, budget)
        if found is not None:
            arcs, allowed, r_prime = found
            return ArcCertificate(
                case=CASE_2B_ODD,
                arcs=arcs,
                targets=allowed,
                initial_arc=initial,
                interior_targets=interior,
                k=len(arcs),
                q=q,
                epsilon=1,
                r_prime=r_prime,
                s_prime=s_prime,
            )
    LOGGER.info("No case 2b certificate for q=%d, epsilon=1.", q)
    return None


def _interior_choices(
    order: VertexOrder, watched: set[int], q: int
) -> Iterator[tuple[OrientedArc, tuple[int, ...]]]:
    for initial in _initial_arcs(order):
        inside = tuple(v for v in initial.interior() if v in watched)
        for size in range(min(len(inside), q), -1, -1):
            for subset in combinations(inside, size):
                yield initial, subset


def _initial_arcs(order: VertexOrder) -> Iterator[OrientedArc]:
    yield OrientedArc(path=(0, order.children[0][0]))
    positions = chain_positions(order)
    for a in positions:
        for b in positions:
            if a != b:
                yield arc_between(order, a, b)


# -- re-verification ------------------------------------------------------------


def check_arc_certificate(order: VertexOrder, stats: TreeStats, cert: ArcCertificate) -> str | None:
    """Re-check a certificate against its clause; returns the first problem or `None`."""
    try:
        for arc in (*cert.arcs, *((cert.initial_arc,) if cert.initial_arc else ())):
            arc.check(order)
    except CertificateInconsistentError as exc:
        return str(exc)
    watched = set(degree_three(order))
    if cert.case == CASE_STATEMENT1:
        if set(cert.targets) != watched:
            return "Statement-1 targets must be every degree-3 vertex."
        if len(cert.arcs) != cert.k:
            return "Arc count does not match k."
        if not is_allowable(order, cert.arcs, cert.targets):
            return "Arcs are not allowable for the degree-3 vertices."
        return None
    if cert.q is None:
        return "Case-2 certificate without q."
    if cert.case == CASE_2A:
        return None if stats.s >= 2 * (cert.q - stats.r) else "s < 2(q - r)."
    if not set(cert.targets) <= watched or not set(cert.interior_targets) <= watched:
        return "Targets must be degree-3 vertices."
    ends = [x for arc in cert.arcs for x in (arc.path[0], arc.path[-1])]
    if any(arc.start_inside or arc.end_inside for arc in cert.arcs) or len(ends) != len(set(ends)):
        return "Arc endpoints must be distinct essential vertices."
    if any(order.degree(x) < 3 for x in ends):
        return "Arc endpoints must be essential vertices."
    r_prime = sum(1 for v in high_degree(order) if v not in ends)
    if cert.r_prime != r_prime:
        return "r' does not match the arcs."
    if not is_allowable(order, cert.arcs, cert.targets):
        return "Arcs are not allowable for the target set."
    if cert.case == CASE_2B_EVEN:
        if len(cert.targets) < cert.q - r_prime - len(cert.arcs):
            return "Target set is too small."
        return None
    if cert.initial_arc is None:
        return "Odd case without an initial arc."
    interior = set(cert.initial_arc.interior())
    if not set(cert.interior_targets) <= interior or len(cert.interior_targets) > cert.q:
        return "Interior targets must lie inside the initial arc."
    if set(cert.targets) & set(cert.interior_targets) or set(ends) & set(cert.interior_targets):
        return "Interior targets overlap other targets or arc endpoints."
    s_prime = len(cert.interior_targets)
    if s_prime >= cert.q - stats.r:
        return None
    if len(cert.targets) < cert.q - r_prime - len(cert.arcs) - s_prime:
        return "Target set is too small."
    return None

