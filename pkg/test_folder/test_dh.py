import os
import sys
from fractions import Fraction

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import load_settings
from dh import EMPIRICAL_RATE, default_grid, dh_compare, fiber_volume
from ratcore import solve_linear

F = Fraction

load_dotenv()


def test_fiber_volumes():
    print("Testing fiber volumes...\n")
    assert fiber_volume(2, 1, 2) == F(3, 4)
    assert fiber_volume(2, 0, 2) == 0
    assert fiber_volume(1, 3, 5) == 1
    assert fiber_volume(2, -1, 2) == 0
    print("✅ Fiber volumes at (1,2), on the boundary and for n=1")


def test_grid():
    assert default_grid(2) == [(F(1, 2), F(1, 2)), (F(1, 2), F(1)), (F(1), F(1, 2)), (F(1), F(1))]
    assert len(default_grid(3, "1/3")) == 9


def test_counts_approach_volume():
    expected = {10: F(91, 100), 20: F(331, 400)}
    for r, scaled in expected.items():
        comparison = dh_compare(2, r, [(1, 2)])
        row = comparison.rows[0]
        print(f"r={r}: rescaled count {row.count_scaled}, deviation {row.abs_dev}")
        assert row.count_scaled == scaled
        assert row.abs_dev == scaled - F(3, 4)
        assert comparison.empirical_bound == EMPIRICAL_RATE / r
    try:
        dh_compare(2, 10, [(F(1, 3), F(1, 2))])
    except ValueError:
        print("✅ Points off the 1/r lattice refused")

    if not load_settings().run_slow:
        print("NOBODIES_RUN_SLOW not set, skipping r=40")
        return
    row = dh_compare(2, 40, [(1, 2)]).rows[0]
    assert row.count_scaled == F(1261, 1600)
    print("✅ r=40")


def test_fiber_volume_is_polynomial_in_a_chamber():
    # For 0 < p < 1 < q the fiber polytope keeps the same facets.
    nodes = [(F(1, 8) + F(i, 8), F(5, 4) + F(j, 4)) for i in range(3) for j in range(3) if i + j <= 2]
    M = [(1, p, q, p * p, p * q, q * q) for p, q in nodes]
    coeffs = solve_linear(M, [fiber_volume(2, p, q) for p, q in nodes])
    assert coeffs is not None
    for p, q in ((F(3, 16), F(11, 8)), (F(1, 3), F(3, 2)), (F(5, 16), F(13, 8))):
        fitted = sum(c * m for c, m in zip(coeffs, (1, p, q, p * p, p * q, q * q)))
        assert fiber_volume(2, p, q) == fitted, f"({p}, {q}): {fiber_volume(2, p, q)} vs {fitted}"
    assert fiber_volume(2, F(3, 16), F(11, 8)) == F(45, 1024)
    print("✅ Fiber volume agrees with the quadratic fitted on six nearby points")


if __name__ == "__main__":
    test_fiber_volumes()
    test_grid()
    test_counts_approach_volume()
    test_fiber_volume_is_polynomial_in_a_chamber()
