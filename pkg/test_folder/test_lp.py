import asyncio
import os
import sys
import time
from fractions import Fraction

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import load_settings
from lp import (EmptyRegionError, FacetVerdict, LPMethod, LPProblem, LPStatus, contains, facet_check, feasible,
                feasible_at, mu_slope, run_mu_table, same_set, solve)
from polygon import P1XP1, P2, TABLE_RAYS, hirzebruch
from polytope import HPolyhedron, build_toric_body

F = Fraction

load_dotenv()


def test_solve_statuses():
    print("Testing LP statuses...\n")
    half_line = HPolyhedron.from_rows(1, [((1,), 1)])
    result = solve(LPProblem((F(1),), half_line))
    assert result.status == LPStatus.OPTIMAL and result.value == 1 and result.witness == (1,)
    print(f"✅ min x over x >= 1: {result.certificate()}")

    empty = HPolyhedron.from_rows(1, [((1,), 1), ((-1,), 0)])
    assert solve(LPProblem((F(1),), empty)).status == LPStatus.INFEASIBLE
    assert solve(LPProblem((F(-1),), HPolyhedron.from_rows(1, [((1,), 0)]))).status == LPStatus.UNBOUNDED

    simplex = HPolyhedron.from_rows(2, [((1, 0), 0), ((0, 1), 0), ((1, 1), 1)])
    result = solve(LPProblem((F(1), F(1)), simplex), method=LPMethod.SIMPLEX)
    assert result.value == 1
    assert sum(result.witness) == 1
    assert sum(y * simplex.rows[i][1] for i, y in result.dual.items()) == result.value
    result = solve(LPProblem((F(2), F(1)), simplex))
    assert result.value == 1 and result.witness == (0, 1)
    print("✅ Optimal, infeasible and unbounded programs with dual certificates")


def test_containment():
    square = HPolyhedron.from_rows(2, [((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)])
    triangle = HPolyhedron.from_rows(2, [((1, 0), 0), ((0, 1), 0), ((-1, -1), -1)])
    assert feasible(square)
    assert contains(square, triangle)
    assert not contains(triangle, square)
    assert same_set(square, square.with_rows([((1, 1), 0)]))
    print("✅ Containment between a square and a triangle")


def test_slopes():
    assert mu_slope(P2, (1,), 2) == 1
    assert mu_slope(P1XP1, (1, 1), 2) == F(1, 2)
    line = P2.polygon((1,))
    assert feasible_at(line, 4, 1, "3/2")
    assert not feasible_at(line, 4, 1, F(3, 2) - F(1, 1000))
    assert not feasible_at(line, 4, 1, -1)
    # Multiples of -E fold onto r = 0 over the point polygon of the zero class.
    assert feasible(build_toric_body(P2.polygon((0,)), 4, -2))
    results = asyncio.run(run_mu_table([("P2", (1,), 2), ("P1xP1", (1, 1), 2)], workers=1))
    assert results == [1, F(1, 2)]
    print("✅ Slopes for P2 and P1xP1 at n=2, endpoint 3/2 for P2 at n=4")


def test_facets():
    assert facet_check(P1XP1, 2, (1, 1, 0)) == FacetVerdict.VALID_NOT_TIGHT
    assert facet_check(P1XP1, 2, (1, 1, 1)) == FacetVerdict.VALID_AND_TIGHT
    assert facet_check(P1XP1, 2, (1, 1, 2)) == FacetVerdict.VIOLATED
    try:
        facet_check(P2, 2, (1, 1, 0))
    except ValueError:
        print("✅ Wrong facet length refused")
    assert issubclass(EmptyRegionError, ValueError)
    print("✅ Facet verdicts on P1xP1, n=2")


def test_backends_agree():
    body = build_toric_body(P2.polygon((2,)), 2, 1)
    objectives = [(1, 0, 0, 0), (0, -1, 0, 1), (1, 1, -1, -1), (-1, -2, 0, 0), (0, 0, 0, 0)]
    for objective in objectives:
        problem = LPProblem(tuple(F(c) for c in objective), body)
        fast, exact = solve(problem), solve(problem, method=LPMethod.SIMPLEX)
        assert fast.status == exact.status and fast.value == exact.value, f"{objective}: {fast} vs {exact}"
    half_plane = HPolyhedron.from_rows(2, [((1, 0), 0)])
    for method in (LPMethod.CDD, LPMethod.SIMPLEX):
        assert solve(LPProblem((F(0), F(1)), half_plane), method=method).status == LPStatus.UNBOUNDED
        assert not feasible(half_plane.with_rows([((-1, 0), 1)]), method=method)
    print("✅ cdd and simplex backends agree on status and optimum")


def test_slope_monotonicity():
    for n in (2, 3, 4, 5):
        inner = mu_slope(P2, (1,), n)
        middle = mu_slope(P1XP1, (1, 1), n)
        outer = mu_slope(hirzebruch(1), (1, 1), n)
        assert outer <= middle <= inner, f"n={n}: {outer}, {middle}, {inner}"
        assert mu_slope(P2, (2,), n) == inner / 2
    print("✅ Larger polygons never need a larger slope")


def _check_endpoint(n, mu):
    line = P2.polygon((1,))
    assert mu_slope(P2, (1,), n) == mu
    assert feasible_at(line, n, 1, mu)
    assert not feasible_at(line, n, 1, mu - F(1, 1000))
    body = build_toric_body(line.scale(mu), n, 1)
    first = tuple(F(1) if k == 0 else F(0) for k in range(body.dim))
    result = solve(LPProblem(first, body))
    assert result.status == LPStatus.OPTIMAL and result.value == 0 and result.witness[0] == 0


def test_endpoint_witnesses():
    for n, mu in ((5, F(2)), (9, F(3))):
        _check_endpoint(n, mu)
        print(f"✅ P2 n={n}: feasible at mu={mu}, empty just below, witness with a_1 = 0")
    if not load_settings().run_slow:
        print("NOBODIES_RUN_SLOW not set, skipping n=20")
        return
    _check_endpoint(20, F(5))
    print("✅ P2 n=20: feasible at mu=5, empty just below, witness with a_1 = 0")


def test_sweep_time():
    if not load_settings().run_slow:
        print("NOBODIES_RUN_SLOW not set, skipping the timed sweep")
        return
    jobs = [(label, TABLE_RAYS[label], n) for label in ("P2", "P1xP1", "H1", "H2") for n in range(2, 21)]
    start = time.monotonic()
    asyncio.run(run_mu_table(jobs, workers=load_settings().workers))
    elapsed = time.monotonic() - start
    assert elapsed < 120, f"n <= 20 sweep took {elapsed:.0f}s"
    print(f"✅ n <= 20 sweep over four surfaces in {elapsed:.1f}s")


if __name__ == "__main__":
    test_solve_statuses()
    test_containment()
    test_slopes()
    test_facets()
    test_backends_agree()
    test_slope_monotonicity()
    test_endpoint_witnesses()
    test_sweep_time()
