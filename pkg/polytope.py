import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import cdd

from polygon import ClassForms, NewtonPolygon
from ratcore import QVector, affine_rank, determinant, dot, qvector, rat_str, to_rational
from semigroup import normalize_r

# Configure module logger
logger = logging.getLogger(__name__)

Row = Tuple[QVector, Fraction]


class UnboundedBodyError(ValueError):
    pass


def normalize_row(normal: Sequence[Fraction], offset: Fraction) -> Optional[Row]:
    """
    Scales a row normal.x >= offset to coprime integers. Returns None for a
    trivially true row (zero normal, offset <= 0).
    """
    normal = qvector(normal)
    offset = to_rational(offset)
    if not any(normal):
        if offset > 0:
            raise ValueError(f"Row 0 >= {rat_str(offset)} is infeasible")
        return None
    values = list(normal) + [offset]
    lcm = reduce(lambda x, y: x * y // math.gcd(x, y), (v.denominator for v in values), 1)
    ints = [int(v * lcm) for v in values]
    g = reduce(math.gcd, (abs(x) for x in ints if x), 0) or 1
    ints = [x // g for x in ints]
    return tuple(Fraction(x) for x in ints[:-1]), Fraction(ints[-1])


@dataclass(frozen=True)
class HPolyhedron:
    """{x in Q^dim : normal.x >= offset for every row}."""
    dim: int
    rows: Tuple[Row, ...] = field(default_factory=tuple)

    @classmethod
    def from_rows(cls, dim: int, rows) -> "HPolyhedron":
        seen = {}
        for normal, offset in rows:
            if len(normal) != dim:
                raise ValueError(f"Row of length {len(normal)} in a {dim}-dimensional system")
            row = normalize_row(normal, offset)
            if row is not None and row not in seen:
                seen[row] = None
        return cls(dim=dim, rows=tuple(seen))

    def with_rows(self, extra) -> "HPolyhedron":
        return HPolyhedron.from_rows(self.dim, list(self.rows) + list(extra))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        return all(dot(normal, x) >= offset for normal, offset in self.rows)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "rows": [{"normal": [rat_str(v) for v in normal], "offset": rat_str(offset)}
                     for normal, offset in self.rows],
        }


@dataclass(frozen=True)
class VPolytope:
    vertices: Tuple[QVector, ...]
    rays: Tuple[QVector, ...] = ()

    @property
    def bounded(self) -> bool:
        return not self.rays

    def to_json(self) -> dict:
        return {
            "vertices": [[rat_str(v) for v in vertex] for vertex in self.vertices],
            "rays": [[rat_str(v) for v in ray] for ray in self.rays],
        }


def body_rows(n: int, r: int, forms: ClassForms) -> List[Row]:
    """
    Rows of the body over variables (a_1..a_n, b_1..b_n, z_1..z_k), where the
    cap and the piece intercepts are affine forms in the extra variables z.
    """
    r = normalize_r(r)
    k = forms.extra
    dim = 2 * n + k
    zero = Fraction(0)

    def vec(entries: Dict[int, Fraction], form: Optional[Sequence[Fraction]] = None, sign: int = 1):
        out = [zero] * dim
        for idx, val in entries.items():
            out[idx] += val
        if form is not None:
            for m, coef in enumerate(form[1:]):
                out[2 * n + m] += sign * coef
        return tuple(out)

    def a(j):
        return j

    def b(j):
        return n + j

    rows: List[Row] = [(vec({a(0): Fraction(1)}), zero)]
    for j in range(n - 1):
        rows.append((vec({a(j + 1): Fraction(1), a(j): Fraction(-1)}), zero))
    if forms.c is not None:
        # c(z) - a_n >= 0
        rows.append((vec({a(n - 1): Fraction(-1)}, forms.c, +1), -forms.c[0]))

    for j in range(n):
        lows = range(j + 1) if r > 0 else (j,)
        for i in lows:
            for alpha, beta in forms.lower:
                # b_j - alpha a_j + (j-i) a_j - (a_i + ... + a_{j-1}) - beta(z) >= beta_0 + (j-i) r
                entries = {b(j): Fraction(1), a(j): -alpha + (j - i)}
                for m in range(i, j):
                    entries[a(m)] = entries.get(a(m), zero) - 1
                rows.append((vec(entries, beta, -1), beta[0] + (j - i) * r))
        highs = range(j, n) if r > 0 else (j,)
        for kk in highs:
            for gamma, delta in forms.upper:
                # -b_j + gamma a_j - (k-j) a_j + (a_{j+1} + ... + a_k) + delta(z) >= (k-j) r - delta_0
                entries = {b(j): Fraction(-1), a(j): gamma - (kk - j)}
                for m in range(j + 1, kk + 1):
                    entries[a(m)] = entries.get(a(m), zero) + 1
                rows.append((vec(entries, delta, +1), (kk - j) * r - delta[0]))
    return rows


def build_c2_body(n: int, r: int) -> HPolyhedron:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    H = HPolyhedron.from_rows(2 * n, body_rows(n, r, ClassForms.constant(NewtonPolygon.quadrant())))
    logger.debug(f"Affine-plane body n={n}, r={r}: {len(H.rows)} rows")
    return H


def build_toric_body(polygon: NewtonPolygon, n: int, r: int) -> HPolyhedron:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    H = HPolyhedron.from_rows(2 * n, body_rows(n, r, ClassForms.constant(polygon)))
    logger.debug(f"Toric body n={n}, r={r}: {len(H.rows)} rows")
    return H


def body_contains(polygon: Optional[NewtonPolygon], n: int, r: int, point: Sequence) -> bool:
    """Membership through the description by sums over close pairs."""
    x = qvector(point)
    if len(x) != 2 * n:
        raise ValueError(f"Point has {len(x)} coordinates, expected {2 * n}")
    polygon = polygon or NewtonPolygon.quadrant()
    a, b = x[:n], x[n:]
    if a[0] < 0 or any(a[j] > a[j + 1] for j in range(n - 1)):
        return False
    if polygon.c is not None and a[-1] > polygon.c:
        return False
    for j in range(n):
        low = polygon.ell(a[j]) + sum((r - a[j] + a[i] for i in range(j) if a[j] - a[i] < r), Fraction(0))
        if b[j] < low:
            return False
        if polygon.upper:
            high = polygon.u(a[j]) - sum((r - a[k] + a[j] for k in range(j + 1, n) if a[k] - a[j] < r),
                                         Fraction(0))
            if b[j] > high:
                return False
    return True


def cdd_matrix(H: HPolyhedron) -> "cdd.Matrix":
    mat = cdd.Matrix([[-offset] + list(normal) for normal, offset in H.rows], number_type="fraction")
    mat.rep_type = cdd.RepType.INEQUALITY
    return mat


def prune_redundant(H: HPolyhedron) -> HPolyhedron:
    """Drops redundant rows; implicit equalities come back as pairs of opposite rows."""
    if not H.rows:
        return H
    mat = cdd_matrix(H)
    mat.canonicalize()
    rows = []
    for i in range(mat.row_size):
        entries = [Fraction(v) for v in mat[i]]
        normal, offset = tuple(entries[1:]), -entries[0]
        rows.append((normal, offset))
        if i in mat.lin_set:
            rows.append((tuple(-v for v in normal), -offset))
    pruned = HPolyhedron.from_rows(H.dim, rows)
    logger.info(f"Pruned {len(H.rows)} rows to {len(pruned.rows)}")
    return pruned


def vertex_enumerate(H: HPolyhedron, prune: bool = True) -> VPolytope:
    if not H.rows:
        raise UnboundedBodyError("A system with no rows is all of space")
    source = prune_redundant(H) if prune else H
    poly = cdd.Polyhedron(cdd_matrix(source))
    gen = poly.get_generators()
    vertices, rays = set(), set()
    for i in range(gen.row_size):
        entries = [Fraction(v) for v in gen[i]]
        t, x = entries[0], tuple(entries[1:])
        if t == 0:
            rays.add(x)
            if i in gen.lin_set:
                rays.add(tuple(-v for v in x))
        else:
            vertices.add(tuple(v / t for v in x))
    V = VPolytope(vertices=tuple(sorted(vertices)), rays=tuple(sorted(rays)))
    logger.info(f"Vertex enumeration in dim {H.dim}: {len(V.vertices)} vertices, {len(V.rays)} rays")
    return V


def _hull_facets(vertices: Sequence[QVector]) -> List[Row]:
    mat = cdd.Matrix([[1] + list(v) for v in vertices], number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    ineq = cdd.Polyhedron(mat).get_inequalities()
    facets = []
    for i in range(ineq.row_size):
        entries = [Fraction(v) for v in ineq[i]]
        normal = tuple(entries[1:])
        if any(normal):
            facets.append((normal, -entries[0]))
    return facets


def volume(V: VPolytope) -> Fraction:
    """
    Exact volume through a pulling triangulation: each face is coned from its
    lexicographically smallest vertex over the faces of it that avoid that vertex.
    """
    if V.rays:
        raise UnboundedBodyError(f"Volume of an unbounded body ({len(V.rays)} rays) is infinite")
    if not V.vertices:
        return Fraction(0)
    verts = sorted(V.vertices)
    d = len(verts[0])
    if affine_rank(verts) < d:
        logger.info(f"Body spans less than {d} dimensions, volume 0")
        return Fraction(0)

    facets = _hull_facets(verts)
    tight_sets = []
    for normal, offset in facets:
        tight = frozenset(idx for idx, v in enumerate(verts) if dot(normal, v) == offset)
        tight_sets.append(tight)

    memo: Dict[FrozenSet[int], List[Tuple[int, ...]]] = {}

    def faces_of(face: FrozenSet[int]) -> List[FrozenSet[int]]:
        candidates = {face & t for t in tight_sets if not face <= t}
        candidates.discard(frozenset())
        return [s for s in candidates if not any(s < other for other in candidates)]

    def triangulate(face: FrozenSet[int], face_dim: int) -> List[Tuple[int, ...]]:
        if face in memo:
            return memo[face]
        if face_dim == 0:
            result = [tuple(face)]
        else:
            apex = min(face)
            result = []
            for sub in faces_of(face):
                if apex in sub:
                    continue
                for simplex in triangulate(sub, face_dim - 1):
                    result.append((apex,) + simplex)
        memo[face] = result
        return result

    simplices = triangulate(frozenset(range(len(verts))), d)
    total = Fraction(0)
    for simplex in simplices:
        base = verts[simplex[0]]
        rows = [tuple(x - y for x, y in zip(verts[idx], base)) for idx in simplex[1:]]
        total += abs(determinant(rows))
    vol = total / math.factorial(d)
    logger.info(f"Volume from {len(simplices)} simplices over {len(verts)} vertices: {rat_str(vol)}")
    return vol


def slice_shift(H: HPolyhedron, t, n: Optional[int] = None) -> HPolyhedron:
    """
    Cuts the body with a_1 >= t and translates the cut part by -t in every a
    coordinate, turning the slice of D into the body of D - tH.
    """
    t = to_rational(t)
    if t < 0:
        raise ValueError(f"Slice parameter must be nonnegative, got {rat_str(t)}")
    n = H.dim // 2 if n is None else n
    cut = [(tuple(Fraction(1) if m == 0 else Fraction(0) for m in range(H.dim)), t)]
    rows = []
    for normal, offset in list(H.rows) + cut:
        shift = sum(normal[:n], Fraction(0)) * t
        rows.append((normal, offset - shift))
    return HPolyhedron.from_rows(H.dim, rows)


def catalan_cells(n: int) -> int:
    """
    Counts the full-dimensional cells cut out of [0,1]^(n-1) by the
    hyperplanes t_{i+1} + ... + t_j = 1, enumerating down-closed sets of
    intervals and testing each partial pattern with a slack LP.
    """
    from lp import LPStatus, LPProblem, solve

    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    m = n - 1
    dim = m + 1  # t_1..t_m, s
    intervals = sorted(((i, j) for i in range(m) for j in range(i, m)), key=lambda ij: (ij[1] - ij[0], ij))
    base: List[Row] = []
    for j in range(m):
        base.append((tuple(Fraction(1) if x == j else Fraction(-1) if x == m else Fraction(0)
                           for x in range(dim)), Fraction(0)))
        base.append((tuple(Fraction(-1) if x == j else Fraction(-1) if x == m else Fraction(0)
                           for x in range(dim)), Fraction(-1)))
    objective = tuple(Fraction(-1) if x == m else Fraction(0) for x in range(dim))

    def interval_row(i, j, inside):
        if inside:
            # sum + s <= 1
            normal = tuple(Fraction(-1) if i <= x <= j or x == m else Fraction(0) for x in range(dim))
            return normal, Fraction(-1)
        normal = tuple(Fraction(1) if i <= x <= j else Fraction(-1) if x == m else Fraction(0) for x in range(dim))
        return normal, Fraction(1)

    def open_cell(rows) -> bool:
        result = solve(LPProblem(objective=objective, constraints=HPolyhedron.from_rows(dim, base + rows)))
        return result.status == LPStatus.OPTIMAL and result.value < 0

    count = 0

    def rec(idx: int, chosen: Dict[Tuple[int, int], bool], rows: List[Row]):
        nonlocal count
        if idx == len(intervals):
            count += 1
            return
        i, j = intervals[idx]
        subs_inside = i == j or (chosen[(i, j - 1)] and chosen[(i + 1, j)])
        for inside in (True, False):
            if inside and not subs_inside:
                continue
            row = interval_row(i, j, inside)
            if open_cell(rows + [row]):
                chosen[(i, j)] = inside
                rec(idx + 1, chosen, rows + [row])
                del chosen[(i, j)]

    rec(0, {}, [])
    logger.info(f"Cells for n={n}: {count}")
    return count
