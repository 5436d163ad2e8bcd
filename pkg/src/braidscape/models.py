from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class TreeDocument(BaseModel):
    """Tree file payload: vertex ids, base vertex and clockwise neighbor lists."""

    vertices: list[str]
    base: str
    rotation: dict[str, list[str]]


class StatsDocument(BaseModel):
    """Essential-vertex counts and configuration-space connectivity."""

    m: int
    r: int
    s: int
    essential: list[str] = Field(default_factory=list)
    n: int
    unordered_connected: bool
    ordered_connected: bool


class CellDocument(BaseModel):
    """A cube of the discrete configuration space as sorted element ids."""

    members: list[str]
    n: int
    dim: int
    classification: Literal["critical", "collapsible", "redundant"] | None = None


class CloudDocument(BaseModel):
    anchor_vertex: str
    value: int


class DiagramDocument(BaseModel):
    """Canonical cloud diagram of a cell equivalence class."""

    edges: list[str]
    clouds: list[CloudDocument]


class BasisClassDocument(BaseModel):
    degree: int
    diagram: DiagramDocument
    critical_cell: CellDocument


class BasisDocument(BaseModel):
    n: int
    classes: list[BasisClassDocument] = Field(default_factory=list)
    counts: list[int] = Field(default_factory=list)


class BettiDocument(BaseModel):
    n: int
    betti: list[int]
    critical_counts: list[int] = Field(default_factory=list)


class CensusDocument(BaseModel):
    """Per-dimension counts of critical, collapsible and redundant cells."""

    n: int
    dims: dict[str, dict[str, int]]


class ArcDocument(BaseModel):
    """Oriented arc as a vertex-id sequence with endpoint flags."""

    path: list[str]
    start_inside: bool = False
    end_inside: bool = False


class ArcCertificateDocument(BaseModel):
    case: Literal["1", "2a", "2b-even", "2b-odd"]
    arcs: list[ArcDocument] = Field(default_factory=list)
    initial_arc: ArcDocument | None = None
    targets: list[str] = Field(default_factory=list)
    interior_targets: list[str] = Field(default_factory=list)
    k: int = 0
    q: int | None = None
    epsilon: int | None = None
    r_prime: int | None = None
    s_prime: int | None = None


class TcCertificateDocument(BaseModel):
    """Outcome of the topological-complexity decision procedure."""

    status: Literal["determined", "not_applicable"]
    n: int
    m: int
    r: int
    s: int
    value: int | None = None
    case: str | None = None
    top_dimension: int | None = None
    arc_certificate: ArcCertificateDocument | None = None
    phi: CellDocument | None = None
    psi: CellDocument | None = None
    phi_factors: list[DiagramDocument] = Field(default_factory=list)
    psi_factors: list[DiagramDocument] = Field(default_factory=list)
    applies_to: list[Literal["unordered", "ordered"]] = Field(default_factory=list)
    ordered_caveat: str | None = None
    reason: Literal[
        "below_statement1_threshold",
        "no_case2_certificate",
        "connectivity_failure",
    ] | None = None
    diagnostics: dict[str, Any] = Field(default_factory=dict)
    tree: TreeDocument | None = None


class VerificationDocument(BaseModel):
    ok: bool
    checks: dict[str, bool] = Field(default_factory=dict)
    failure: str | None = None


class KeyframeDocument(BaseModel):
    """Configuration at an exact rational time (`num/den`)."""

    time: str
    points: list[str]


class PathDocument(BaseModel):
    ordered: bool
    l: int
    keyframes: list[KeyframeDocument]


class RunReport(BaseModel):
    """Deterministic envelope written by every CLI command."""

    command: list[str]
    inputs: dict[str, str] = Field(default_factory=dict)
    limits: dict[str, Any] = Field(default_factory=dict)
    outcome: Any = None
    timing_seconds: float | None = None
