import logging
import math
from fractions import Fraction
from typing import Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator

from polygon import NewtonPolygon

# Configure module logger
logger = logging.getLogger(__name__)


class DimensionMismatchError(ValueError):
    pass


class NotInSemigroupError(ValueError):
    pass


class ValVector(NamedTuple):
    """
    Integer point (p_1..p_n, q_1..q_n). Tuple comparison of two ValVectors is
    lexicographic order on the concatenated coordinates.
    """
    a: Tuple[int, ...]
    b: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def coords(self) -> Tuple[int, ...]:
        return self.a + self.b

    @classmethod
    def of(cls, coords: Sequence[int]) -> "ValVector":
        if len(coords) % 2:
            raise DimensionMismatchError(f"Odd number of coordinates: {len(coords)}")
        n = len(coords) // 2
        return cls(tuple(int(x) for x in coords[:n]), tuple(int(x) for x in coords[n:]))

    @classmethod
    def zero(cls, n: int) -> "ValVector":
        return cls((0,) * n, (0,) * n)

    def plus(self, other: "ValVector") -> "ValVector":
        if other.n != self.n:
            raise DimensionMismatchError(f"Cannot add vectors of lengths {self.n} and {other.n}")
        return ValVector(tuple(x + y for x, y in zip(self.a, other.a)),
                         tuple(x + y for x, y in zip(self.b, other.b)))

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_json(cls, data: dict) -> "ValVector":
        a, b = tuple(int(x) for x in data["a"]), tuple(int(x) for x in data["b"])
        if len(a) != len(b):
            raise DimensionMismatchError(f"a has {len(a)} entries but b has {len(b)}")
        return cls(a, b)


def normalize_r(r: int) -> int:
    """Negative degrees fold onto 0 (even) or 1 (odd)."""
    if r >= 0:
        return r
    return 0 if r % 2 == 0 else 1


class GammaSpec(BaseModel):
    """Selects Gamma_r (polygon None, the affine plane) or Gamma(D_n + rE) for a Newton polygon."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: PositiveInt
    r: int
    polygon: Optional[NewtonPolygon] = None

    @field_validator("r")
    @classmethod
    def _fold_negative(cls, r: int) -> int:
        return normalize_r(r)

    @property
    def toric(self) -> bool:
        return self.polygon is not None and self.polygon.bounded


def _ell(spec: GammaSpec, p: int) -> Fraction:
    return spec.polygon.ell(p) if spec.polygon is not None else Fraction(0)


def lower_excess(p: Sequence[int], j: int, r: int) -> int:
    """Sum over i < j with p_j - p_i < r of (r - p_j + p_i)."""
    return sum(r - p[j] + p[i] for i in range(j) if p[j] - p[i] < r)


def upper_excess(p: Sequence[int], j: int, r: int) -> int:
    """Sum over k > j with p_k - p_j < r of (r - p_k + p_j)."""
    return sum(r - p[k] + p[j] for k in range(j + 1, len(p)) if p[k] - p[j] < r)


def _check_dims(spec: GammaSpec, v: ValVector):
    if len(v.a) != spec.n or len(v.b) != spec.n:
        raise DimensionMismatchError(f"Vector has shape ({len(v.a)}, {len(v.b)}), expected n={spec.n}")


def _ordered(spec: GammaSpec, v: ValVector) -> bool:
    p, q = v.a, v.b
    if any(x < 0 for x in p) or any(y < 0 for y in q):
        return False
    if any(p[j] > p[j + 1] for j in range(spec.n - 1)):
        return False
    if spec.toric and p[-1] > spec.polygon.c:
        return False
    for j in range(spec.n - 1):
        if p[j] == p[j + 1] and q[j + 1] < q[j] + spec.r:
            return False
    return True


def gamma_member(spec: GammaSpec, v: ValVector) -> bool:
    """Membership through the bounds indexed by triples i <= j <= k."""
    _check_dims(spec, v)
    if not _ordered(spec, v):
        return False
    n, r = spec.n, spec.r
    p, q = v.a, v.b
    for j in range(n):
        for i in range(j + 1):
            if q[j] < _ell(spec, p[j]) + (j - i) * (r - p[j]) + sum(p[i:j]):
                return False
        if spec.toric:
            for k in range(j, n):
                if q[j] > spec.polygon.u(p[j]) - (k - j) * (r + p[j]) + sum(p[j + 1:k + 1]):
                    return False
    return True


def gamma_member_maxform(spec: GammaSpec, v: ValVector) -> bool:
    """Membership through the sums over close pairs."""
    _check_dims(spec, v)
    if not _ordered(spec, v):
        return False
    p, q = v.a, v.b
    for j in range(spec.n):
        if q[j] < _ell(spec, p[j]) + lower_excess(p, j, spec.r):
            return False
        if spec.toric and q[j] > spec.polygon.u(p[j]) - upper_excess(p, j, spec.r):
            return False
    return True


def _p_vectors(n: int, caps: Sequence[int], total: Optional[int]) -> Iterator[Tuple[int, ...]]:
    """Nondecreasing p with p_j <= caps[j], optionally summing to total, in lex order."""
    prefix: List[int] = []

    def rec(j: int, low: int, remaining: Optional[int]):
        if j == n:
            if remaining is None or remaining == 0:
                yield tuple(prefix)
            return
        high = caps[j]
        if remaining is not None:
            left = n - j
            if j == n - 1:
                low, high = max(low, remaining), min(high, remaining)
            else:
                high = min(high, remaining // left)
        for x in range(low, high + 1):
            prefix.append(x)
            yield from rec(j + 1, x, None if remaining is None else remaining - x)
            prefix.pop()

    yield from rec(0, 0, total)


def _q_ranges(spec: GammaSpec, p: Sequence[int], caps: Sequence[int]) -> Optional[List[Tuple[int, int]]]:
    """Per-coordinate q bounds that depend on p alone (the gap rule is applied while recursing)."""
    ranges = []
    for j in range(spec.n):
        lo = max(0, math.ceil(_ell(spec, p[j]) + lower_excess(p, j, spec.r)))
        hi = caps[j]
        if spec.toric:
            hi = min(hi, math.floor(spec.polygon.u(p[j]) - upper_excess(p, j, spec.r)))
        if lo > hi:
            return None
        ranges.append((lo, hi))
    return ranges


def _q_vectors(spec: GammaSpec, p: Sequence[int], ranges, total: Optional[int]) -> Iterator[Tuple[int, ...]]:
    n, r = spec.n, spec.r
    his = [hi for _, hi in ranges]
    tail_hi = [sum(his[j:]) for j in range(n)] + [0]
    prefix: List[int] = []

    def tail_min(j: int, prev: int) -> int:
        # Smallest possible q_j + ... + q_{n-1} given q_{j-1} = prev.
        acc = 0
        for m in range(j, n):
            lo = ranges[m][0]
            if m > 0 and p[m] == p[m - 1]:
                lo = max(lo, prev + r)
            acc += lo
            prev = lo
        return acc

    def rec(j: int, remaining: Optional[int]):
        if j == n:
            if remaining is None or remaining == 0:
                yield tuple(prefix)
            return
        lo, hi = ranges[j]
        if j > 0 and p[j] == p[j - 1]:
            lo = max(lo, prefix[-1] + r)
        if remaining is not None:
            if j == n - 1:
                lo, hi = max(lo, remaining), min(hi, remaining)
            else:
                hi = min(hi, remaining)
        for x in range(lo, hi + 1):
            if remaining is not None and j < n - 1:
                rest = remaining - x
                if rest > tail_hi[j + 1]:
                    continue
                if rest < tail_min(j + 1, x):
                    break
            prefix.append(x)
            yield from rec(j + 1, None if remaining is None else remaining - x)
            prefix.pop()

    yield from rec(0, total)


def _toric_caps(spec: GammaSpec, p_caps: Sequence[int]) -> List[int]:
    # Points of a toric polygon have p <= c.
    if not spec.toric:
        return list(p_caps)
    big_p = math.floor(spec.polygon.c)
    return [min(cap, big_p) for cap in p_caps]


def _iter_members(spec: GammaSpec, p_caps, q_caps, p_total=None, q_total=None) -> Iterator[ValVector]:
    for p in _p_vectors(spec.n, _toric_caps(spec, p_caps), p_total):
        ranges = _q_ranges(spec, p, q_caps)
        if ranges is None:
            continue
        for q in _q_vectors(spec, p, ranges, q_total):
            yield ValVector(p, q)


def gamma_enumerate(spec: GammaSpec, box: Optional[Tuple[int, int]] = None,
                    graded: Optional[Tuple[int, int]] = None,
                    caps: Optional[Tuple[Sequence[int], Sequence[int]]] = None) -> List[ValVector]:
    """
    Members of the semigroup in lex order, restricted by one of:
    box=(p_max, q_max) bounding every coordinate, graded=(p, q) fixing the
    coordinate sums, or caps=(p_caps, q_caps) bounding each coordinate
    separately. With none of them the polygon must be bounded and the whole
    (finite) set is returned.
    """
    n = spec.n
    big_p = big_q = None
    if spec.toric:
        big_p = math.floor(spec.polygon.c)
        top = max(spec.polygon.u(a) for a in range(big_p + 1))
        big_q = math.floor(top)

    if caps is not None:
        p_caps, q_caps = list(caps[0]), list(caps[1])
        if len(p_caps) != n or len(q_caps) != n:
            raise DimensionMismatchError(f"Caps must have length {n}")
        members = _iter_members(spec, p_caps, q_caps)
    elif box is not None:
        p_max, q_max = box
        members = _iter_members(spec, [p_max] * n, [q_max] * n)
    elif graded is not None:
        p_tot, q_tot = graded
        if p_tot < 0 or q_tot < 0:
            return []
        members = _iter_members(spec, [p_tot] * n, [q_tot] * n, p_tot, q_tot)
    elif spec.toric:
        members = _iter_members(spec, [big_p] * n, [big_q] * n)
    else:
        raise ValueError("Enumeration of the affine-plane semigroup needs a box or a graded target")

    return list(members)


def graded_count(spec: GammaSpec, p: int, q: int) -> int:
    if p < 0 or q < 0:
        return 0
    n = spec.n
    total = 0
    for pv in _p_vectors(n, _toric_caps(spec, [p] * n), p):
        ranges = _q_ranges(spec, pv, [q] * n)
        if ranges is None:
            continue
        total += sum(1 for _ in _q_vectors(spec, pv, ranges, q))
    return total


def section_count(polygon: NewtonPolygon, n: int, r: int) -> int:
    """Number of points of Gamma(D_n + rE); binomial(h0 + n - 1, n) at r=0 and binomial(h0, n) at r=1."""
    return len(gamma_enumerate(GammaSpec(n=n, r=r, polygon=polygon)))


def _strands(p: Sequence[int], r: int) -> List[List[Tuple[int, int]]]:
    """
    Splits a vector with p_1 = 0, gaps <= r and q at its lower bound into r
    strictly increasing sequences of pairs. Strands advance their p in
    round-robin order, each at most once per coordinate.
    """
    strands = [[(0, 0)] for _ in range(r)]
    order = list(range(r))
    for m in range(1, len(p)):
        step = p[m] - p[m - 1]
        for pos, s in enumerate(order):
            last_p, last_q = strands[s][-1]
            if pos < step:
                strands[s].append((last_p + 1, 0))
            else:
                strands[s].append((last_p, last_q + 1))
        order = order[step:] + order[:step]
    return strands


def minkowski_decompose(v: ValVector, r: int, n: Optional[int] = None) -> List[ValVector]:
    """
    Writes v in Gamma_r as a sum of r members of Gamma_1, sorted lexicographically.
    """
    n = v.n if n is None else n
    if r < 1:
        raise ValueError(f"Decomposition needs r >= 1, got {r}")
    if not gamma_member(GammaSpec(n=n, r=r), v):
        raise NotInSemigroupError(f"{v.to_json()} is not in Gamma_{r}")

    p, q = list(v.a), list(v.b)

    # Clamp p-gaps at r and start at 0; the removed part is added back at the end.
    p_red = [0] * n
    for j in range(1, n):
        p_red[j] = p_red[j - 1] + min(p[j] - p[j - 1], r)
    excess = [x - y for x, y in zip(p, p_red)]

    # Peel the slack above the lower bounds, block by block of equal p.
    q_min = [lower_excess(p_red, j, r) for j in range(n)]
    slack = [qj - m for qj, m in zip(q, q_min)]
    units = []  # (first index, block end, multiplicity)
    j = 0
    while j < n:
        k = j
        while k + 1 < n and p_red[k + 1] == p_red[j]:
            k += 1
        prev = 0
        for m in range(j, k + 1):
            if slack[m] > prev:
                units.append((m, k, slack[m] - prev))
            prev = slack[m]
        j = k + 1

    strands = _strands(p_red, r)
    summands = [[list(col) for col in zip(*strand)] for strand in strands]

    for first, end, count in units:
        if end == n - 1:
            target = 0
        else:
            target = next(s for s in range(r) if summands[s][0][end] < summands[s][0][end + 1])
        for m in range(first, end + 1):
            summands[target][1][m] += count

    for m in range(n):
        summands[0][0][m] += excess[m]

    result = sorted(ValVector(tuple(a), tuple(b)) for a, b in summands)

    total = ValVector.zero(n)
    gamma_one = GammaSpec(n=n, r=1)
    for s in result:
        if not gamma_member(gamma_one, s):
            raise RuntimeError(f"Summand {s.to_json()} of {v.to_json()} left Gamma_1")
        total = total.plus(s)
    if total != v:
        raise RuntimeError(f"Summands of {v.to_json()} add up to {total.to_json()}")
    logger.debug(f"Decomposed {v.to_json()} into {len(result)} summands")
    return result


def minkowski_sum_in_box(n: int, r: int, box: Tuple[int, int]) -> Set[ValVector]:
    """r-fold sums of Gamma_1 members that stay inside the box."""
    p_max, q_max = box
    gamma_one = GammaSpec(n=n, r=1)
    if r == 0:
        return {ValVector.zero(n)}
    current: Set[ValVector] = set(gamma_enumerate(gamma_one, box=box))
    for step in range(1, r):
        grown: Set[ValVector] = set()
        for s in current:
            caps = ([p_max - x for x in s.a], [q_max - y for y in s.b])
            for g in gamma_enumerate(gamma_one, caps=caps):
                grown.add(s.plus(g))
        current = grown
        logger.info(f"Minkowski sum n={n}: {step + 1} summands, {len(current)} points in box")
    return current
