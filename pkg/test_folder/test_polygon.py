import os
import sys
from fractions import Fraction

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from polygon import (P1XP1, P2, EmptyPolygonError, NewtonPolygon, UnboundedPolygonError, area, hirzebruch,
                     lattice_points, preset_from_label, scale)

load_dotenv()


def test_presets():
    print("Testing preset polygons...\n")
    cases = [
        (P2, (2,), Fraction(2), 6),
        (P1XP1, (2, 3), Fraction(6), 12),
        (hirzebruch(1), (1, 1), Fraction(3, 2), 5),
    ]
    for preset, coeffs, area, points in cases:
        polygon = preset.polygon(coeffs)
        print(f"{preset.label} {coeffs}: area {polygon.area()}, {len(polygon.lattice_points())} lattice points")
        assert polygon.area() == area
        assert len(polygon.lattice_points()) == points

    triangle = P2.polygon((2,))
    assert triangle.vertices() == [(0, 0), (2, 0), (0, 2)]
    assert triangle.contains((1, 1))
    assert not triangle.contains(("3/2", 1))
    print("✅ Preset areas, lattice points and vertices")


def test_scaling():
    polygon = P2.polygon((1,)).scale(3)
    assert polygon.area() == Fraction(9, 2)
    assert polygon.scale(0).area() == 0
    for preset, coeffs in ((P2, (1,)), (P1XP1, (2, 3)), (hirzebruch(1), (1, 1)), (hirzebruch(2), ("1/2", 1))):
        base = preset.polygon(coeffs)
        for t in (Fraction(1, 3), Fraction(1, 2), 2, Fraction(7, 4), 5):
            assert scale(base, t).area() == Fraction(t) ** 2 * area(base), f"{preset.label} at t={t}"
    print("✅ Scaling multiplies area by t^2")


def test_unit_triangle_dilations():
    for m in range(21):
        assert len(lattice_points(P2.polygon((m,)))) == (m + 1) * (m + 2) // 2
    print("✅ m-th dilate of the unit triangle has (m+1)(m+2)/2 lattice points, m <= 20")


def test_second_hirzebruch():
    polygon = hirzebruch(2).polygon((1, 1))
    assert polygon.vertices() == [(0, 0), (1, 0), (1, 3), (0, 1)]
    assert polygon.lattice_points() == [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (1, 3)]
    assert polygon.area() == 2
    print("✅ H2 at (1,1): trapezoid with six lattice points")


def test_validation():
    try:
        NewtonPolygon.build(2, [(0, 3)], [(0, 1)])
    except EmptyPolygonError as e:
        print(f"✅ Empty polygon reported: {e}")
    else:
        raise AssertionError("empty polygon should raise")

    try:
        NewtonPolygon.build(None, [(0, 0)], [(0, 1)])
    except UnboundedPolygonError:
        print("✅ Upper pieces without a cap refused")
    else:
        raise AssertionError("missing cap should raise")

    quadrant = NewtonPolygon.quadrant()
    assert not quadrant.bounded
    try:
        quadrant.area()
    except UnboundedPolygonError:
        print("✅ Quadrant has no area")


def test_labels_and_json():
    assert preset_from_label("p2") == P2
    assert preset_from_label("H3").e == 3
    assert preset_from_label("H2m").mirrored
    assert hirzebruch(2, mirrored=True).label == "H2m"
    try:
        preset_from_label("P3")
    except ValueError:
        print("✅ Unknown label refused")
    polygon = hirzebruch(2).polygon(("1/2", 1))
    assert NewtonPolygon.from_json(polygon.to_json()) == polygon
    print("✅ Labels and JSON form")


if __name__ == "__main__":
    test_presets()
    test_scaling()
    test_unit_triangle_dilations()
    test_second_hirzebruch()
    test_validation()
    test_labels_and_json()
