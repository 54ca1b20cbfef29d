import asyncio
import json
import logging
import math
import os
from typing import Callable, Dict, List

from pydantic import BaseModel

from dh import default_grid, dh_compare, fiber_volume
from lp import run_mu_table
from oracle import determinant_product, gamma_one_tuples, jr_member, valuation_set_Ar, verify_products
from polygon import P1XP1, P2, TABLE_RAYS, hirzebruch
from polytope import build_toric_body, catalan_cells, vertex_enumerate, volume
from ratcore import rat_str
from semigroup import (GammaSpec, ValVector, gamma_enumerate, gamma_member_maxform, graded_count,
                       minkowski_decompose, minkowski_sum_in_box)

# Configure module logger
logger = logging.getLogger(__name__)

EXPECTED_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "expected_values.json")

SUITES = ("semigroup", "oracle", "catalan", "dh", "mu", "volume")

# Degree box for the semigroup and valuation-set equalities, n <= 3 and r <= 3.
CHECK_BOX = (6, 6)


class UnknownSuiteError(ValueError):
    pass


class CheckOutcome(BaseModel):
    name: str
    passed: bool
    expected: str
    actual: str


def load_expected(path: str = EXPECTED_PATH) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _outcome(name: str, expected, actual) -> CheckOutcome:
    passed = expected == actual
    if not passed:
        logger.warning(f"Check {name} failed: expected {expected}, got {actual}")
    return CheckOutcome(name=name, passed=passed, expected=str(expected), actual=str(actual))


def _suite_semigroup(workers: int) -> List[CheckOutcome]:
    out = []
    box = CHECK_BOX
    for n in (1, 2, 3):
        for r in (0, 1, 2, 3):
            spec = GammaSpec(n=n, r=r)
            members = gamma_enumerate(spec, box=box)
            agree = all(gamma_member_maxform(spec, v) for v in members)
            out.append(_outcome(f"maxform agrees on Gamma_{r} box n={n}", True, agree))
            if r >= 1:
                sums = minkowski_sum_in_box(n, r, box)
                out.append(_outcome(f"Gamma_{r} equals {r}-fold sum of Gamma_1, n={n}", True, sums == set(members)))
                round_trip = all(
                    len(parts) == r and sum_of(parts, n) == v
                    for v in members for parts in [minkowski_decompose(v, r, n)]
                )
                out.append(_outcome(f"decomposition round trip Gamma_{r}, n={n}", True, round_trip))
    out.append(_outcome("graded count n=2 r=1 (1,1)", 2, graded_count(GammaSpec(n=2, r=1), 1, 1)))
    out.append(_outcome("graded count n=2 r=0 (1,0)", 1, graded_count(GammaSpec(n=2, r=0), 1, 0)))
    return out


def sum_of(parts, n):
    total = ValVector.zero(n)
    for part in parts:
        total = total.plus(part)
    return total


def _suite_oracle(workers: int) -> List[CheckOutcome]:
    out = []
    for n in (1, 2, 3):
        for r in (1, 2, 3):
            box = CHECK_BOX
            vals = valuation_set_Ar(n, r, box)
            gamma = set(gamma_enumerate(GammaSpec(n=n, r=r), box=box))
            out.append(_outcome(f"valuation set equals Gamma_{r} in box, n={n}", True, vals == gamma))
            out.append(_outcome(f"expanded products n={n} r={r}", 10, verify_products(n, r, box, samples=10)))
    tuples = gamma_one_tuples(2, (1, 1))
    for r in (1, 2, 3):
        product = determinant_product([tuples[k % len(tuples)] for k in range(r)])
        out.append(_outcome(f"product of {r} determinants lies in J^{r}", True, jr_member(product, r)))
    return out


def _suite_catalan(workers: int) -> List[CheckOutcome]:
    expected = load_expected()["catalan"]
    return [_outcome(f"cells n={n}", count, catalan_cells(int(n))) for n, count in expected.items()]


def _suite_dh(workers: int) -> List[CheckOutcome]:
    out = [
        _outcome("fiber volume n=2 at (1,2)", "3/4", rat_str(fiber_volume(2, 1, 2))),
        _outcome("fiber volume n=2 at (0,2)", "0", rat_str(fiber_volume(2, 0, 2))),
        _outcome("fiber volume n=1", "1", rat_str(fiber_volume(1, 3, 5))),
    ]
    grid = default_grid(5)
    comparisons = [dh_compare(2, r, grid, workers=workers) for r in (10, 20, 40)]
    for comparison in comparisons:
        logger.info(f"r={comparison.r}: max deviation {rat_str(comparison.max_deviation)} (empirical threshold)")
    deviations = [c.max_deviation for c in comparisons]
    out.append(_outcome("deviation decreases over r=10, 20, 40", True,
                        deviations[0] > deviations[1] > deviations[2]))
    out.append(_outcome("deviation within 10/r at r=40", True,
                        comparisons[-1].max_deviation <= comparisons[-1].empirical_bound))
    return out


def _suite_mu(workers: int) -> List[CheckOutcome]:
    table = load_expected()["mu"]
    jobs = []
    for label in table:
        top = 20 if label == "P2" else 10
        for n in range(2, top + 1):
            jobs.append((label, TABLE_RAYS[label], n))
    results = asyncio.run(run_mu_table(jobs, workers=workers))
    out = []
    for (label, _, n), mu in zip(jobs, results):
        actual = "infeasible" if mu is None else rat_str(mu)
        out.append(_outcome(f"mu {label} n={n}", table[label][str(n)], actual))
    return out


def _suite_volume(workers: int) -> List[CheckOutcome]:
    out = []
    for preset, coeffs in ((P2, (1,)), (P1XP1, (1, 1)), (hirzebruch(1), (1, 1)), (hirzebruch(2), (1, 1))):
        polygon = preset.polygon(coeffs)
        for n in (2, 3):
            expected = polygon.area() ** n / math.factorial(n)
            actual = volume(vertex_enumerate(build_toric_body(polygon, n, 0)))
            out.append(_outcome(f"volume of {preset.label} n={n} at r=0", rat_str(expected), rat_str(actual)))
    values = load_expected()["p2_4h_plus_e"]
    V = vertex_enumerate(build_toric_body(P2.polygon((4,)), 4, 1))
    out.append(_outcome("vertices of 4H+E, n=4", values["n4_vertices"], len(V.vertices)))
    vol = volume(V)
    out.append(_outcome("volume of 4H+E, n=4", values["n4_volume"], rat_str(vol)))
    out.append(_outcome("volume times 8!", values["n4_volume_times_8_factorial"],
                        rat_str(vol * math.factorial(8))))
    return out


_SUITES: Dict[str, Callable[[int], List[CheckOutcome]]] = {
    "semigroup": _suite_semigroup,
    "oracle": _suite_oracle,
    "catalan": _suite_catalan,
    "dh": _suite_dh,
    "mu": _suite_mu,
    "volume": _suite_volume,
}


def run_suite(name: str, workers: int = 1) -> List[CheckOutcome]:
    if name not in _SUITES:
        raise UnknownSuiteError(f"Unknown suite {name!r}; choose from {', '.join(SUITES)}")
    logger.info(f"Running check suite: {name}")
    outcomes = _SUITES[name](workers)
    failed = sum(1 for o in outcomes if not o.passed)
    logger.info(f"Suite {name}: {len(outcomes) - failed}/{len(outcomes)} passed")
    return outcomes
