import logging
import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import FrozenSet, List, Optional, Sequence, Tuple

from sympy.combinatorics import Permutation
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, ring
from sympy.utilities.iterables import multiset_permutations

from lp import feasible
from polygon import NewtonPolygon
from polytope import HPolyhedron
from semigroup import ValVector, lower_excess, upper_excess

# Configure module logger
logger = logging.getLogger(__name__)

MPoly = PolyElement
PointTuple = Tuple[Tuple[int, int], ...]


class ZeroPolynomialError(ValueError):
    pass


class RepeatedPointError(ValueError):
    pass


class ValuationMismatchError(ValueError):
    """Raised when the trailing term of an expanded product disagrees with the sum of valuations."""


@lru_cache(maxsize=None)
def poly_ring(n: int):
    """QQ[x1..xn, y1..yn] with lex order x1 > ... > xn > y1 > ... > yn."""
    names = ",".join([f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)])
    R, *gens = ring(names, QQ, lex)
    return R, tuple(gens[:n]), tuple(gens[n:])


@lru_cache(maxsize=None)
def _shift_ring(n: int):
    names = ",".join([f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)] + ["s", "t"])
    R, *gens = ring(names, QQ, lex)
    return R, tuple(gens)


def n_of(f: MPoly) -> int:
    return f.ring.ngens // 2


def valuation(f: MPoly) -> ValVector:
    """Exponent vector of the lex-smallest term."""
    if not f:
        raise ZeroPolynomialError("The zero polynomial has no valuation")
    return ValVector.of(min(f.keys()))


def _sorted_points(points: Sequence[Sequence[int]]) -> PointTuple:
    return tuple(sorted((int(p), int(q)) for p, q in points))


def monomial_symmetric(points: Sequence[Sequence[int]]) -> MPoly:
    """Sum of x_i^p y_i^q over every distinct assignment of the points to the indices i."""
    pts = _sorted_points(points)
    n = len(pts)
    R, _, _ = poly_ring(n)
    terms = {}
    for perm in multiset_permutations(list(pts)):
        monom = tuple(p for p, _ in perm) + tuple(q for _, q in perm)
        terms[monom] = terms.get(monom, 0) + 1
    return R.from_dict(terms)


def determinant(points: Sequence[Sequence[int]]) -> MPoly:
    """det(x_i^{p_j} y_i^{q_j}) over the lex-sorted points, fully expanded."""
    pts = _sorted_points(points)
    if len(set(pts)) != len(pts):
        raise RepeatedPointError(f"Determinant of repeated points {pts} vanishes")
    n = len(pts)
    R, _, _ = poly_ring(n)
    terms = {}
    for perm in permutations(range(n)):
        # Row i takes column perm[i].
        sign = Permutation(list(perm)).signature()
        monom = tuple(pts[perm[i]][0] for i in range(n)) + tuple(pts[perm[i]][1] for i in range(n))
        terms[monom] = terms.get(monom, 0) + sign
    return R.from_dict({m: c for m, c in terms.items() if c})


def jr_member(f: MPoly, r: int) -> bool:
    """Membership in the intersection over pairs i < j of (x_i - x_j, y_i - y_j)^r."""
    if not f or r <= 0:
        return True
    n = n_of(f)
    S, gens = _shift_ring(n)
    xs, ys, s, t = gens[:n], gens[n:2 * n], gens[2 * n], gens[2 * n + 1]
    g = f.set_ring(S)
    s_idx, t_idx = 2 * n, 2 * n + 1
    for i, j in combinations(range(n), 2):
        h = g.compose([(xs[j], xs[i] + s), (ys[j], ys[i] + t)])
        if any(m[s_idx] + m[t_idx] < r for m in h.keys()):
            return False
    return True


def gamma_one_tuples(n: int, box: Tuple[int, int]) -> List[PointTuple]:
    """Strictly increasing point tuples inside the box, i.e. the determinant basis of degree one."""
    p_max, q_max = box
    points = [(p, q) for p in range(p_max + 1) for q in range(q_max + 1)]
    return [tuple(c) for c in combinations(points, n)]


def _tuple_valuation(pts: PointTuple) -> ValVector:
    return ValVector(tuple(p for p, _ in pts), tuple(q for _, q in pts))


def verify_products(n: int, r: int, box: Tuple[int, int], samples: int = 10, seed: int = 0) -> int:
    """
    Expands random products of r determinants and checks that each trailing
    term equals the sum of the factor valuations. Returns the number checked.
    """
    rng = random.Random(seed)
    pool = gamma_one_tuples(n, box)
    if not pool:
        return 0
    checked = 0
    for _ in range(samples):
        factors = [rng.choice(pool) for _ in range(r)]
        product = determinant(factors[0])
        expected = _tuple_valuation(factors[0])
        for pts in factors[1:]:
            product = product * determinant(pts)
            expected = expected.plus(_tuple_valuation(pts))
        actual = valuation(product)
        if actual != expected:
            raise ValuationMismatchError(f"Product of {factors}: trailing term {actual}, expected {expected}")
        checked += 1
    logger.info(f"Verified {checked} determinant products for n={n}, r={r}")
    return checked


def valuation_set_Ar(n: int, r: int, box: Tuple[int, int], samples: int = 10, seed: int = 0) -> FrozenSet[ValVector]:
    """
    Valuations of r-fold determinant products that fall in the box, from
    valuations being additive. A sample of products is expanded to confirm it.
    """
    if r == 0:
        return frozenset({ValVector.zero(n)})
    verify_products(n, r, box, samples=samples, seed=seed)
    p_max, q_max = box
    current = {_tuple_valuation(pts) for pts in gamma_one_tuples(n, box)}
    for _ in range(1, r):
        grown = set()
        for v in current:
            for pts in _capped_tuples([p_max - x for x in v.a], [q_max - y for y in v.b]):
                grown.add(v.plus(_tuple_valuation(pts)))
        current = grown
    logger.info(f"Valuation set n={n}, r={r}, box={box}: {len(current)} vectors")
    return frozenset(current)


def _capped_tuples(p_caps: Sequence[int], q_caps: Sequence[int]):
    """Strictly increasing point tuples whose i-th point lies in [0, p_caps[i]] x [0, q_caps[i]]."""
    n = len(p_caps)
    prefix: List[Tuple[int, int]] = []

    def rec(i: int):
        if i == n:
            yield tuple(prefix)
            return
        start_p = prefix[-1][0] if prefix else 0
        for p in range(start_p, p_caps[i] + 1):
            start_q = prefix[-1][1] + 1 if prefix and prefix[-1][0] == p else 0
            for q in range(start_q, q_caps[i] + 1):
                prefix.append((p, q))
                yield from rec(i + 1)
                prefix.pop()

    yield from rec(0)


def _in_hull_2d(points: Sequence[Tuple[int, int]], target: Tuple[int, int]) -> bool:
    k = len(points)
    one, zero = Fraction(1), Fraction(0)
    rows = [(tuple(one if m == i else zero for m in range(k)), zero) for i in range(k)]
    for coord in range(2):
        normal = tuple(Fraction(pt[coord]) for pt in points)
        rows.append((normal, Fraction(target[coord])))
        rows.append((tuple(-v for v in normal), -Fraction(target[coord])))
    rows.append((tuple(one for _ in range(k)), one))
    rows.append((tuple(-one for _ in range(k)), -one))
    return feasible(HPolyhedron.from_rows(k, rows))


def newton_polytope_bounds(f: MPoly, r: int) -> bool:
    """
    For nu(f) = (p, q), checks that each projection to (a_j, b_j) of the
    Newton polytope contains (p_j, q_j - lower excess) and (p_j, q_j + upper excess).
    """
    v = valuation(f)
    n = v.n
    if n == 1:
        return True
    p, q = v.a, v.b
    for j in range(n):
        projection = sorted({(m[j], m[n + j]) for m in f.keys()})
        low = (p[j], q[j] - lower_excess(p, j, r))
        high = (p[j], q[j] + upper_excess(p, j, r))
        for target in (low, high):
            if not _in_hull_2d(projection, target):
                logger.info(f"Point {target} missing from projection {j} of the Newton polytope")
                return False
    return True


def toric_restriction_filter(f: MPoly, polygon: NewtonPolygon) -> bool:
    """Every term has each (exponent of x_i, exponent of y_i) inside the polygon."""
    n = n_of(f)
    return all(polygon.contains((m[i], m[n + i])) for m in f.keys() for i in range(n))


def determinant_product(tuples: Sequence[Sequence[Sequence[int]]], n: Optional[int] = None) -> MPoly:
    if not tuples:
        R, _, _ = poly_ring(n)
        return R.one
    product = determinant(tuples[0])
    for pts in tuples[1:]:
        product = product * determinant(pts)
    return product
