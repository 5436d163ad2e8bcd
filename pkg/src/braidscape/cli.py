from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
import sys
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from .arcs import statement1_certificate
from .cell_complex import cell_census, classify_cell, enumerate_cells
from .cohomology import CohomologyRing, betti_document
from .errors import BraidscapeError, CertificateInconsistentError
from .models import CensusDocument, RunReport, TcCertificateDocument
from .planner import (
    parse_configuration,
    plan_ordered,
    plan_unordered,
    random_configuration,
    validate_path,
)
from .settings import BraidscapeLimits
from .tc import certificate_from_tc_document, decide_tc, tc_profile, verify_certificate
from .tree import Tree, is_sufficiently_subdivided, load_tree, order_vertices, stats, subdivide_for

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_APPLICABLE = 2

DEFAULT_SEED = 20240101

Outcome = tuple[Any, int, str]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, list):
        return [_dump(item) for item in value]
    if isinstance(value, dict):
        return {key: _dump(item) for key, item in value.items()}
    return value


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def _prepared(tree: Tree, n: int) -> Tree:
    if is_sufficiently_subdivided(tree, n):
        return tree
    LOGGER.info("Subdividing the input tree for n=%d.", n)
    return subdivide_for(tree, n)


# -- commands -------------------------------------------------------------------


def _cmd_stats(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    result = stats(load_tree(args.tree), args.n)
    summary = f"m={result.m} r={result.r} s={result.s}"
    if not result.ordered_connected:
        summary += f" (ordered space of {args.n} points is disconnected)"
    return result.to_document(), EXIT_OK, summary


def _cmd_subdivide(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    tree = subdivide_for(load_tree(args.tree), args.n)
    return tree.to_document(), EXIT_OK, f"{len(tree.vertices)} vertices"


def _cmd_cells(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    tree = load_tree(args.tree)
    if args.subdivide:
        tree = subdivide_for(tree, args.n)
    order = order_vertices(tree)
    dims = args.dim if args.dim else list(range(args.n + 1))
    if args.census:
        census = cell_census(order, args.n, dims, limits=limits)
        document = CensusDocument(
            n=args.n,
            dims={str(d): {c.value: count for c, count in sorted(counter.items())} for d, counter in census.items()},
        )
        total = sum(sum(counter.values()) for counter in census.values())
        return document, EXIT_OK, f"{total} cells classified"
    cells = [
        cell.to_document(order, classify_cell(order, cell)).model_dump(mode="json")
        for cell in enumerate_cells(order, args.n, dims, limits=limits)
    ]
    return {"n": args.n, "cells": cells}, EXIT_OK, f"{len(cells)} cells"


def _cmd_critical(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    order = order_vertices(_prepared(load_tree(args.tree), args.n))
    ring = CohomologyRing(order, args.n, limits=limits)
    document = ring.to_basis_document()
    return document, EXIT_OK, "critical cells per dimension: " + " ".join(map(str, document.counts))


def _cmd_homology(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    order = order_vertices(_prepared(load_tree(args.tree), args.n))
    max_dim = args.max_dim if args.max_dim is not None else min(args.n // 2, len(order.essential)) + 1
    document = betti_document(order, args.n, max_dim, limits=limits)
    return document, EXIT_OK, "betti " + " ".join(map(str, document.betti))


def _cmd_tc(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    certificate = decide_tc(load_tree(args.tree), args.n, limits=limits)
    if certificate.determined:
        return certificate.to_document(), EXIT_OK, f"TC = {certificate.value} (case {certificate.case})"
    return (
        certificate.to_document(),
        EXIT_NOT_APPLICABLE,
        f"not applicable: {certificate.reason.value if certificate.reason else 'unknown'}",
    )


def _cmd_arcs(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    order = order_vertices(load_tree(args.tree))
    cert = statement1_certificate(order, limits=limits)
    return cert.to_document(order), EXIT_OK, f"k = {cert.k}"


def _cmd_plan(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    order = order_vertices(_prepared(load_tree(args.tree), args.n))
    if args.random:
        rng = random.Random(args.seed)
        x = random_configuration(order, args.n, rng, ordered=args.ordered)
        y = random_configuration(order, args.n, rng, ordered=args.ordered)
    else:
        if args.from_config is None or args.to_config is None:
            raise BraidscapeError("plan needs --from and --to, or --random.")
        x = parse_configuration(order, args.from_config, ordered=args.ordered)
        y = parse_configuration(order, args.to_config, ordered=args.ordered)
        if x.n != args.n or y.n != args.n:
            raise BraidscapeError(f"Configurations must have exactly {args.n} points.")
    path = plan_ordered(order, x, y) if args.ordered else plan_unordered(order, x, y)
    check = validate_path(order, path)
    document = path.to_document()
    if args.frames_out is not None:
        _write_text(args.frames_out, _canonical_json(document.model_dump(mode="json")) + "\n")
    outcome = {
        "from": x.label(order),
        "to": y.label(order),
        "valid": check.ok,
        "failure": check.failure,
        "path": document,
    }
    summary = f"{len(path.keyframes)} keyframes, l={path.l}, valid={check.ok}"
    return outcome, EXIT_OK if check.ok else EXIT_ERROR, summary


def _cmd_verify(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    try:
        document = TcCertificateDocument.model_validate_json(args.certificate.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise CertificateInconsistentError(f"Invalid certificate document: {exc}") from exc
    report = verify_certificate(certificate_from_tc_document(document), limits=limits)
    summary = "certificate verified" if report.ok else f"verification failed: {report.failure}"
    return report.to_document(), EXIT_OK if report.ok else EXIT_ERROR, summary


def _cmd_profile(args: argparse.Namespace, limits: BraidscapeLimits) -> Outcome:
    if args.n_max < args.n_min:
        raise ValueError("--n-max must not be below --n-min.")
    rows = []
    for certificate in tc_profile(load_tree(args.tree), range(args.n_min, args.n_max + 1), limits=limits):
        rows.append(
            {
                "n": certificate.n,
                "status": certificate.status,
                "value": certificate.value,
                "case": certificate.case,
                "reason": certificate.reason.value if certificate.reason else None,
            }
        )
    undetermined = [row["n"] for row in rows if row["status"] != "determined"]
    return {"rows": rows, "undetermined": undetermined}, EXIT_OK, f"undetermined n: {undetermined}"


# -- parser ---------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print the full JSON run report.")
    common.add_argument("--out", type=Path, help="Write the JSON run report to this file.")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--max-cells", type=int)
    common.add_argument("--max-arc-collections", type=int)
    common.add_argument("--timing", action="store_true", help="Embed wall-clock timing in the report.")

    parser = argparse.ArgumentParser(
        prog="braidscape",
        description="Topological complexity certificates for configuration spaces of trees.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[..., Outcome], help_text: str, *, n: bool = True) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        if name != "verify":
            sub.add_argument("--tree", type=Path, required=True)
        if n:
            sub.add_argument("--n", type=int, required=True)
        return sub

    command("stats", _cmd_stats, "Essential-vertex counts and connectivity.")
    command("subdivide", _cmd_subdivide, "Subdivide a tree for n points.")
    cells = command("cells", _cmd_cells, "Enumerate and classify cells.")
    cells.add_argument("--dim", type=int, action="append")
    cells.add_argument("--census", action="store_true")
    cells.add_argument("--subdivide", action="store_true")
    command("critical", _cmd_critical, "Critical cells and the cohomology basis.")
    homology = command("homology", _cmd_homology, "Betti numbers of the full cube complex.")
    homology.add_argument("--max-dim", type=int)
    command("tc", _cmd_tc, "Decide topological complexity with a certificate.")
    command("arcs", _cmd_arcs, "Minimal allowable arc collection.", n=False)
    plan = command("plan", _cmd_plan, "Plan a motion between configurations.")
    plan.add_argument("--from", dest="from_config")
    plan.add_argument("--to", dest="to_config")
    plan.add_argument("--ordered", action="store_true")
    plan.add_argument("--random", action="store_true")
    plan.add_argument("--seed", type=int, default=DEFAULT_SEED)
    plan.add_argument("--frames-out", type=Path)
    verify = command("verify", _cmd_verify, "Re-verify a certificate document.", n=False)
    verify.add_argument("--certificate", type=Path, required=True)
    profile = command("profile", _cmd_profile, "Decide over a range of n.", n=False)
    profile.add_argument("--n-min", type=int, required=True)
    profile.add_argument("--n-max", type=int, required=True)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, RunReport | None]:
    arguments = list(sys.argv[1:] if argv is None else argv)
    args = _build_parser().parse_args(arguments)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    started = time.perf_counter()
    try:
        limits = BraidscapeLimits.from_env().with_overrides(
            max_cells=args.max_cells,
            max_arc_collections=args.max_arc_collections,
        )
        outcome, code, summary = args.handler(args, limits)
    except (BraidscapeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR, None
    elapsed = time.perf_counter() - started
    LOGGER.info("%s finished in %.3fs.", args.command, elapsed)

    inputs = {
        str(path): _sha256(path)
        for path in (getattr(args, "tree", None), getattr(args, "certificate", None))
        if path is not None
    }
    report = RunReport(
        command=arguments,
        inputs=inputs,
        limits=asdict(limits),
        outcome=_dump(outcome),
        timing_seconds=round(elapsed, 6) if args.timing else None,
    )
    payload = _canonical_json(report.model_dump(mode="json"))
    if args.out is not None:
        _write_text(args.out, payload + "\n")
    print(payload if args.json else summary)
    return code, report


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
