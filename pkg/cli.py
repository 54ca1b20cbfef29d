import argparse
import asyncio
import io
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from checks import UnknownSuiteError, run_suite
from config import RunConfig, SurfaceConfig, load_run_config, load_settings
from dh import EMPIRICAL_RATE, default_grid, run_dh_grid
from lp import run_mu_table
from polygon import TABLE_RAYS
from polytope import UnboundedBodyError, build_c2_body, build_toric_body, vertex_enumerate, volume
from ratcore import rat_str
from semigroup import GammaSpec, ValVector, gamma_enumerate, gamma_member, minkowski_decompose

# Configure module logger
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULT_TABLE_SURFACES = ["P2", "P1xP1", "H1", "H2"]


def setup_logging(level: str):
    root = logging.getLogger()
    root.setLevel(level)
    # Clear existing handlers to avoid duplicates on repeated runs
    if root.hasHandlers():
        root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    root.addHandler(handler)


def _coeffs(text: Optional[str]):
    if text is None:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _surface_override(args) -> Optional[Dict[str, Any]]:
    if getattr(args, "polygon", None):
        return {"polygon": json.loads(args.polygon)}
    label = getattr(args, "surface", None)
    if label is None or isinstance(label, list):
        return None
    data: Dict[str, Any] = {"surface": label}
    coeffs = _coeffs(getattr(args, "coeffs", None))
    if coeffs is not None:
        data["coeffs"] = coeffs
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nobodies", description="Exact Newton-Okounkov bodies of Hilbert schemes of points")
    parser.add_argument("--config", help="JSON run configuration; flags override its values")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--format", choices=["json", "csv"])
    parser.add_argument("--output", help="Output file (relative paths go under NOBODIES_OUTPUT_DIR)")
    parser.add_argument("--approx", action="store_true", default=None, help="Add approximate decimal columns")
    parser.add_argument("--workers", type=int, help="Worker processes for per-n fan-out")
    sub = parser.add_subparsers(dest="command", required=True)

    mu = sub.add_parser("mu-table", help="Minimal slopes t with tD_n + E having a nonempty body")
    mu.add_argument("--surface", action="append", help="P2, P1xP1, H<e> (repeatable)")
    mu.add_argument("--n", type=int)
    mu.add_argument("--n-min", type=int)
    mu.add_argument("--n-max", type=int)

    body = sub.add_parser("body", help="H-representation, vertices and volume of a body")
    body.add_argument("--surface", help="P2, P1xP1, H<e>, or c2")
    body.add_argument("--coeffs", help="Comma-separated class coefficients, e.g. 4 or 1,1")
    body.add_argument("--polygon", help="Raw polygon JSON {c, lower, upper}")
    body.add_argument("--n", type=int)
    body.add_argument("--r", type=int)
    body.add_argument("--vertices", action="store_true", default=None)
    body.add_argument("--volume", action="store_true", default=None)

    sg = sub.add_parser("semigroup", help="Enumerate, decompose or test valuation vectors")
    sg.add_argument("action", choices=["enumerate", "decompose", "member"])
    sg.add_argument("--surface", help="P2, P1xP1, H<e>, or c2 (default)")
    sg.add_argument("--coeffs")
    sg.add_argument("--polygon")
    sg.add_argument("--n", type=int)
    sg.add_argument("--r", type=int)
    sg.add_argument("--box", type=int, nargs=2, metavar=("P_MAX", "Q_MAX"))
    sg.add_argument("--graded", type=int, nargs=2, metavar=("P", "Q"))
    sg.add_argument("--vector", type=int, nargs="+", help="p_1..p_n q_1..q_n")
    sg.add_argument("--vector-json", help='Vector as JSON, e.g. {"a": [0, 0], "b": [0, 2]}')

    grid = sub.add_parser("dh-grid", help="Rescaled graded counts against fiber volumes")
    grid.add_argument("--n", type=int)
    grid.add_argument("--r", type=int)
    grid.add_argument("--resolution", type=int)
    grid.add_argument("--step", help="Grid spacing, e.g. 1/2")

    check = sub.add_parser("check", help="Run an invariant suite")
    check.add_argument("suite", help="semigroup, oracle, catalan, dh, mu, volume")
    return parser


def overrides_from_args(args) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {
        "command": args.command,
        "format": args.format,
        "output": args.output,
        "approx": args.approx,
    }
    for key in ("n", "n_min", "n_max", "r", "vertices", "volume", "action", "vector", "resolution", "step", "suite"):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "vector_json", None):
        overrides["vector"] = json.loads(args.vector_json)
    for key in ("box", "graded"):
        if getattr(args, key, None) is not None:
            overrides[key] = tuple(getattr(args, key))
    surface = _surface_override(args)
    if surface is not None:
        overrides["surface"] = surface
    if args.command == "mu-table" and args.surface:
        overrides["surfaces"] = list(args.surface)
    return overrides


def _fmt(value: Optional[Fraction]) -> str:
    return "infeasible" if value is None else rat_str(value)


def cmd_mu_table(config: RunConfig, workers: int) -> List[Dict[str, Any]]:
    surfaces = config.surfaces or [SurfaceConfig.model_validate(label) for label in DEFAULT_TABLE_SURFACES]
    n_values = [config.n] if config.n is not None else list(range(config.n_min, config.n_max + 1))
    jobs = []
    for surface in surfaces:
        preset = surface.preset()
        if preset is None:
            raise ValueError(f"mu-table needs preset surfaces, got {surface.label}")
        ray = tuple(surface.coeffs) if surface.coeffs is not None else TABLE_RAYS.get(preset.label, (1,) * preset.picard_rank)
        for n in n_values:
            jobs.append((preset.label, ray, n))
    logger.info(f"Computing {len(jobs)} slopes with {workers} worker(s)")
    results = asyncio.run(run_mu_table(jobs, workers))
    rows = []
    for (label, _, n), mu in zip(jobs, results):
        row = {"surface": label, "n": n, "mu": _fmt(mu)}
        if config.approx:
            row["mu_approx"] = "" if mu is None else f"{float(mu):.12f}"
        rows.append(row)
    return rows


def cmd_body(config: RunConfig) -> Dict[str, Any]:
    surface = config.surface or SurfaceConfig.model_validate("c2")
    n = config.n or 2
    r = 1 if config.r is None else config.r
    _, polygon = surface.resolve()
    H = build_c2_body(n, r) if polygon is None else build_toric_body(polygon, n, r)
    payload: Dict[str, Any] = {"surface": surface.label, "n": n, "r": r,
                               "unbounded": polygon is None, "hrep": H.to_json()}
    if config.vertices or config.volume:
        V = vertex_enumerate(H)
        payload["unbounded"] = not V.bounded
        if config.vertices:
            payload["vrep"] = V.to_json()
            payload["vertex_count"] = len(V.vertices)
        if config.volume:
            vol = volume(V)
            payload["volume"] = rat_str(vol)
            if config.approx:
                payload["volume_approx"] = f"{float(vol):.12f}"
    return payload


def _vector(config: RunConfig) -> Optional[ValVector]:
    if config.vector is None:
        return None
    if isinstance(config.vector, dict):
        return ValVector.from_json(config.vector)
    return ValVector.of(config.vector)


def cmd_semigroup(config: RunConfig) -> Any:
    surface = config.surface or SurfaceConfig.model_validate("c2")
    _, polygon = surface.resolve()
    v = _vector(config)
    n = config.n or (v.n if v is not None else 2)
    spec = GammaSpec(n=n, r=1 if config.r is None else config.r, polygon=polygon)
    if config.action in ("member", "decompose") and v is None:
        raise ValueError(f"{config.action} needs --vector or --vector-json")
    if config.action == "member":
        return {"vector": v.to_json(), "r": spec.r, "member": gamma_member(spec, v)}
    if config.action == "decompose":
        return {"vector": v.to_json(), "r": spec.r,
                "summands": [s.to_json() for s in minkowski_decompose(v, spec.r, n)]}
    members = gamma_enumerate(spec, box=config.box, graded=config.graded)
    return [m.to_json() for m in members]


def cmd_dh_grid(config: RunConfig, workers: int) -> Dict[str, Any]:
    n = config.n or 2
    r = 10 if config.r is None else config.r
    if r < 1:
        raise ValueError(f"dh-grid needs r >= 1, got {r}")
    grid = default_grid(config.resolution, config.step)
    comparison = asyncio.run(run_dh_grid(n, r, grid, workers))
    logger.warning(f"The deviation bound {rat_str(EMPIRICAL_RATE)}/r is an empirical fit")
    rows = []
    for row in comparison.rows:
        entry = {"p": rat_str(row.p), "q": rat_str(row.q), "count_scaled": rat_str(row.count_scaled),
                 "fiber_volume": rat_str(row.fiber_volume), "abs_dev": rat_str(row.abs_dev)}
        if config.approx:
            entry["abs_dev_approx"] = f"{float(row.abs_dev):.6f}"
        rows.append(entry)
    return {"n": n, "r": r, "max_deviation": rat_str(comparison.max_deviation),
            "empirical_bound": rat_str(comparison.empirical_bound), "rows": rows}


def cmd_check(config: RunConfig, workers: int) -> Tuple[List[Dict[str, Any]], bool]:
    """Per-check records with the compared values, and whether every check passed."""
    outcomes = run_suite(config.suite or "", workers)
    return [o.model_dump() for o in outcomes], all(o.passed for o in outcomes)


def render(payload: Any, fmt: str, stream: bool = False) -> str:
    """JSON (or JSON lines when stream=True) or CSV for table-shaped payloads."""
    if fmt == "csv":
        table = payload["rows"] if isinstance(payload, dict) and "rows" in payload else payload
        if isinstance(table, list) and table and "a" in table[0]:
            table = [dict({f"a{i + 1}": x for i, x in enumerate(v["a"])},
                          **{f"b{i + 1}": y for i, y in enumerate(v["b"])}) for v in table]
        if isinstance(table, dict):
            table = [table]
        buffer = io.StringIO()
        pd.DataFrame(table).to_csv(buffer, index=False)
        return buffer.getvalue()
    if stream and isinstance(payload, list):
        return "".join(json.dumps(item) + "\n" for item in payload)
    return json.dumps(payload, indent=2) + "\n"


def emit(text: str, output: Optional[str], output_dir: str):
    if not output:
        sys.stdout.write(text)
        return
    path = output if os.path.isabs(output) else os.path.join(output_dir, output)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    logger.info(f"Wrote {path}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = load_settings()
    except ValidationError as e:
        setup_logging("INFO")
        logger.error(f"Invalid environment settings: {e}")
        return EXIT_CONFIG
    setup_logging((args.log_level or settings.log_level).upper())
    workers = args.workers or settings.workers

    try:
        config = load_run_config(args.config, overrides_from_args(args))
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    try:
        if config.command == "mu-table":
            text = render(cmd_mu_table(config, workers), config.format)
        elif config.command == "body":
            try:
                payload = cmd_body(config)
            except UnboundedBodyError as e:
                logger.error(f"Volume refused: {e}")
                return EXIT_CONFIG
            text = render(payload, config.format)
        elif config.command == "semigroup":
            text = render(cmd_semigroup(config), config.format, stream=config.action == "enumerate")
        elif config.command == "dh-grid":
            text = render(cmd_dh_grid(config, workers), config.format)
        else:
            report, passed = cmd_check(config, workers)
            text = render(report, config.format)
            emit(text, config.output, settings.output_dir)
            return EXIT_OK if passed else EXIT_CHECK_FAILED
        emit(text, config.output, settings.output_dir)
        return EXIT_OK
    except (UnknownSuiteError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"Cannot write output: {e}")
        return EXIT_CONFIG
    except ValueError as e:
        # Domain errors (empty polygon, vector not in the semigroup, ...) come from user input.
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"Critical Error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
