import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from polytope import HPolyhedron, build_c2_body, vertex_enumerate, volume
from ratcore import QQ, rat_str, to_rational
from semigroup import GammaSpec, graded_count

# Configure module logger
logger = logging.getLogger(__name__)

# Deviation bound c / r used for the n=2 convergence check; fitted, not proven.
EMPIRICAL_RATE = Fraction(10)


class DHRow(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: QQ
    q: QQ
    count: int
    count_scaled: QQ
    fiber_volume: QQ
    abs_dev: QQ


class DHComparison(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    r: int
    rows: Tuple[DHRow, ...]
    max_deviation: QQ
    empirical_bound: QQ


def fiber_polytope(n: int, p, q) -> Optional[HPolyhedron]:
    """
    The fiber over (p, q) in coordinates (a_1..a_{n-1}, b_1..b_{n-1}), after
    eliminating a_n = p - sum a_i and b_n = q - sum b_i. None when a row
    becomes 0 >= positive, i.e. the fiber is empty.
    """
    p, q = to_rational(p), to_rational(q)
    body = build_c2_body(n, 1)
    m = n - 1
    rows = []
    for normal, offset in body.rows:
        na, nb = normal[:n], normal[n:]
        reduced = tuple(na[i] - na[-1] for i in range(m)) + tuple(nb[i] - nb[-1] for i in range(m))
        shifted = offset - na[-1] * p - nb[-1] * q
        if not any(reduced):
            if shifted > 0:
                return None
            continue
        rows.append((reduced, shifted))
    return HPolyhedron.from_rows(2 * m, rows)


def fiber_volume(n: int, p, q) -> Fraction:
    p, q = to_rational(p), to_rational(q)
    if p < 0 or q < 0:
        return Fraction(0)
    if n == 1:
        # Point fibers carry unit mass.
        return Fraction(1)
    H = fiber_polytope(n, p, q)
    if H is None or not H.rows:
        return Fraction(0)
    V = vertex_enumerate(H)
    if not V.vertices:
        return Fraction(0)
    vol = volume(V)
    logger.debug(f"Fiber volume n={n} at ({rat_str(p)}, {rat_str(q)}): {rat_str(vol)}")
    return vol


def _compare_point(job: Tuple[int, int, Fraction, Fraction]) -> DHRow:
    n, r, p, q = job
    rp, rq = r * p, r * q
    if rp.denominator != 1 or rq.denominator != 1:
        raise ValueError(f"Grid point ({rat_str(p)}, {rat_str(q)}) is not on the 1/{r} lattice")
    count = graded_count(GammaSpec(n=n, r=r), int(rp), int(rq))
    scaled = Fraction(count, r ** (2 * n - 2))
    vol = fiber_volume(n, p, q)
    return DHRow(p=p, q=q, count=count, count_scaled=scaled, fiber_volume=vol, abs_dev=abs(scaled - vol))


async def run_dh_grid(n: int, r: int, grid: Sequence[Tuple], workers: int = 1) -> DHComparison:
    """Compares rescaled graded counts with fiber volumes; rows follow grid order."""
    jobs = [(n, r, to_rational(p), to_rational(q)) for p, q in grid]
    if workers <= 1:
        rows = [_compare_point(job) for job in jobs]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(await asyncio.gather(*[loop.run_in_executor(pool, _compare_point, job) for job in jobs]))
    worst = max((row.abs_dev for row in rows), default=Fraction(0))
    logger.info(f"DH comparison n={n}, r={r}: max deviation {float(worst):.4f} over {len(rows)} points")
    return DHComparison(n=n, r=r, rows=tuple(rows), max_deviation=worst, empirical_bound=EMPIRICAL_RATE / r)


def dh_compare(n: int, r: int, grid: Sequence[Tuple], workers: int = 1) -> DHComparison:
    return asyncio.run(run_dh_grid(n, r, grid, workers))


def default_grid(resolution: int = 5, step=Fraction(1, 2)) -> List[Tuple[Fraction, Fraction]]:
    """resolution x resolution interior points k*step, k = 1..resolution."""
    step = to_rational(step)
    return [(step * i, step * j) for i in range(1, resolution + 1) for j in range(1, resolution + 1)]
