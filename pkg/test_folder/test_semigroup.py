import itertools
import os
import random
import sys

from dotenv import load_dotenv

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import load_settings
from polygon import P1XP1, P2, hirzebruch
from semigroup import (DimensionMismatchError, GammaSpec, NotInSemigroupError, ValVector, gamma_enumerate,
                       gamma_member, gamma_member_maxform, graded_count, minkowski_decompose,
                       minkowski_sum_in_box, section_count)

load_dotenv()


def _sum(parts, n):
    total = ValVector.zero(n)
    for part in parts:
        total = total.plus(part)
    return total


def test_membership():
    print("Testing membership...\n")
    spec = GammaSpec(n=2, r=2)
    assert gamma_member(spec, ValVector.of([0, 0, 0, 2]))
    assert not gamma_member(spec, ValVector.of([0, 0, 0, 1]))
    assert not gamma_member(spec, ValVector.of([1, 0, 0, 0]))
    assert GammaSpec(n=2, r=-3).r == 1
    assert GammaSpec(n=2, r=-2).r == 0
    try:
        gamma_member(spec, ValVector.of([0, 0, 0, 1, 1, 1]))
    except DimensionMismatchError:
        print("✅ Wrong length refused")
    else:
        raise AssertionError("dimension mismatch should raise")


def test_two_descriptions_agree():
    for r in (0, 1, 2):
        spec = GammaSpec(n=3, r=r)
        members = set()
        for coords in itertools.product(range(3), repeat=6):
            v = ValVector.of(coords)
            triple, pairs = gamma_member(spec, v), gamma_member_maxform(spec, v)
            assert triple == pairs, f"{coords} r={r}: {triple} vs {pairs}"
            if triple:
                members.add(v)
        enumerated = gamma_enumerate(spec, box=(2, 2))
        assert set(enumerated) == members
        assert enumerated == sorted(enumerated)
        print(f"✅ r={r}: {len(members)} members in the box, both descriptions agree")


def test_counts():
    assert graded_count(GammaSpec(n=2, r=1), 1, 1) == 2
    assert graded_count(GammaSpec(n=2, r=0), 1, 0) == 1
    assert graded_count(GammaSpec(n=2, r=1), -1, 0) == 0
    line = P2.polygon((1,))
    assert section_count(line, 2, 0) == 6
    assert section_count(line, 2, 1) == 3
    print("✅ Graded and section counts")


def test_decomposition():
    for n, r in ((2, 2), (3, 2), (3, 3)):
        for v in gamma_enumerate(GammaSpec(n=n, r=r), box=(3, 3)):
            parts = minkowski_decompose(v, r, n)
            assert len(parts) == r
            assert parts == sorted(parts)
            assert _sum(parts, n) == v
            assert all(gamma_member(GammaSpec(n=n, r=1), s) for s in parts)
        print(f"✅ Decomposed every box member of Gamma_{r}, n={n}")
    try:
        minkowski_decompose(ValVector.of([0, 0, 0, 1]), 2)
    except NotInSemigroupError:
        print("✅ Non-members refused")


def test_minkowski_sum():
    for n, r in ((2, 2), (2, 3), (3, 2)):
        box = (3, 3)
        assert minkowski_sum_in_box(n, r, box) == set(gamma_enumerate(GammaSpec(n=n, r=r), box=box))
        print(f"✅ Gamma_{r} equals the {r}-fold sum of Gamma_1 in the box, n={n}")

    if not load_settings().run_slow:
        print("NOBODIES_RUN_SLOW not set, skipping the boxes of side 6")
        return
    for n in (1, 2, 3):
        for r in (1, 2, 3):
            members = set(gamma_enumerate(GammaSpec(n=n, r=r), box=(6, 6)))
            assert minkowski_sum_in_box(n, r, (6, 6)) == members
            for v in members:
                parts = minkowski_decompose(v, r, n)
                assert len(parts) == r and _sum(parts, n) == v
            print(f"✅ n={n}, r={r}: sum and decomposition agree on the box of side 6")


PRESETS = ((P2, (2,)), (P1XP1, (1, 1)), (hirzebruch(1), (1, 1)), (hirzebruch(2), (1, 1)))


def test_graded_count_matches_enumeration():
    for preset, coeffs in PRESETS:
        polygon = preset.polygon(coeffs)
        for n in (1, 2):
            for r in (0, 1):
                spec = GammaSpec(n=n, r=r, polygon=polygon)
                for p, q in ((2, 0), (2, 1), (3, 1), (4, 1), (1, 2), (3, 3)):
                    expected = len(gamma_enumerate(spec, graded=(p, q)))
                    assert graded_count(spec, p, q) == expected, f"{preset.label} n={n} r={r} ({p},{q})"
    assert graded_count(GammaSpec(n=1, r=0, polygon=P1XP1.polygon((1, 1))), 2, 0) == 0
    assert graded_count(GammaSpec(n=2, r=1, polygon=P1XP1.polygon((1, 1))), 2, 1) == 1
    assert graded_count(GammaSpec(n=2, r=1, polygon=P1XP1.polygon((1, 1))), 3, 1) == 0
    print("✅ Graded counts match graded enumeration on toric polygons")


def test_toric_point_tuples():
    for preset, coeffs in PRESETS:
        polygon = preset.polygon(coeffs)
        points = polygon.lattice_points()
        for n in (2, 3):
            multisets = {ValVector(tuple(p for p, _ in t), tuple(q for _, q in t))
                         for t in itertools.combinations_with_replacement(points, n)}
            subsets = {ValVector(tuple(p for p, _ in t), tuple(q for _, q in t))
                       for t in itertools.combinations(points, n)}
            assert set(gamma_enumerate(GammaSpec(n=n, r=0, polygon=polygon))) == multisets
            assert set(gamma_enumerate(GammaSpec(n=n, r=1, polygon=polygon))) == subsets
            assert all(gamma_member(GammaSpec(n=n, r=1, polygon=polygon), v) for v in subsets)
        print(f"✅ {preset.label}: r=0 gives multisets and r=1 gives subsets of lattice points")


def test_closure_under_addition():
    rng = random.Random(0)
    for n in (2, 3):
        boxes = {r: gamma_enumerate(GammaSpec(n=n, r=r), box=(2, 2)) for r in (0, 1, 2)}
        for r in (0, 1, 2):
            for s in (0, 1, 2):
                if r + s == 0:
                    continue
                target = GammaSpec(n=n, r=r + s)
                for _ in range(200):
                    v, w = rng.choice(boxes[r]), rng.choice(boxes[s])
                    assert gamma_member(target, v.plus(w)), f"{v} + {w} not in Gamma_{r + s}"
        print(f"✅ Gamma_r + Gamma_s lies in Gamma_(r+s), n={n}")


if __name__ == "__main__":
    test_membership()
    test_two_descriptions_agree()
    test_counts()
    test_decomposition()
    test_minkowski_sum()
    test_graded_count_matches_enumeration()
    test_toric_point_tuples()
    test_closure_under_addition()
