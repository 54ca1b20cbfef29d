import asyncio
import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import cdd
from pydantic import BaseModel, ConfigDict

from polygon import ClassForms, NewtonPolygon, SurfacePreset, preset_from_label
from polytope import HPolyhedron, body_rows, build_toric_body, cdd_matrix
from ratcore import QQ, QVector, dot, qvector, rat_str, to_rational

# Configure module logger
logger = logging.getLogger(__name__)

# Consecutive degenerate pivots tolerated before switching to Bland's rule for good.
DEGENERATE_STREAK = 50


class EmptyRegionError(ValueError):
    pass


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LPMethod(str, enum.Enum):
    CDD = "cdd"
    SIMPLEX = "simplex"


class FacetVerdict(str, enum.Enum):
    VALID_AND_TIGHT = "valid_and_tight"
    VALID_NOT_TIGHT = "valid_not_tight"
    VIOLATED = "violated"


@dataclass(frozen=True)
class LPProblem:
    """minimize objective.x subject to constraints (x is free)."""
    objective: QVector
    constraints: HPolyhedron


class LPResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    status: LPStatus
    value: Optional[QQ] = None
    witness: Optional[Tuple[QQ, ...]] = None
    # Nonnegative row multipliers y with sum y_i normal_i = objective and sum y_i offset_i = value.
    dual: Optional[Dict[int, QQ]] = None

    def certificate(self) -> dict:
        return {
            "status": self.status.value,
            "value": None if self.value is None else rat_str(self.value),
            "witness": None if self.witness is None else [rat_str(v) for v in self.witness],
        }


class _StandardForm:
    """
    Revised simplex for min cost.y subject to A y = rhs, y >= 0, with rhs >= 0.
    Columns are sparse dicts row -> value; B^-1 is kept dense and updated per pivot.
    """

    def __init__(self, columns: List[Dict[int, Fraction]], rhs: List[Fraction]):
        self.m = len(rhs)
        self.n_real = len(columns)
        # One artificial per row, starting basis.
        self.columns = columns + [{i: Fraction(1)} for i in range(self.m)]
        self.basis = [self.n_real + i for i in range(self.m)]
        self.binv = [[Fraction(1) if i == k else Fraction(0) for k in range(self.m)] for i in range(self.m)]
        self.x_b = list(rhs)
        self.bland = False
        self.pivots = 0

    def _duals(self, cost) -> List[Fraction]:
        pi = [Fraction(0)] * self.m
        for p, var in enumerate(self.basis):
            c = cost(var)
            if c:
                row = self.binv[p]
                for k in range(self.m):
                    if row[k]:
                        pi[k] += c * row[k]
        return pi

    def _direction(self, j: int) -> List[Fraction]:
        col = self.columns[j]
        return [sum((self.binv[p][k] * v for k, v in col.items() if self.binv[p][k]), Fraction(0))
                for p in range(self.m)]

    def _pivot(self, p: int, j: int, u: List[Fraction]):
        lead = u[p]
        theta = self.x_b[p] / lead
        for i in range(self.m):
            if i != p and u[i]:
                self.x_b[i] -= theta * u[i]
        self.x_b[p] = theta
        prow = [v / lead for v in self.binv[p]]
        self.binv[p] = prow
        for i in range(self.m):
            if i != p and u[i]:
                f = u[i]
                self.binv[i] = [x - f * y for x, y in zip(self.binv[i], prow)]
        self.basis[p] = j
        self.pivots += 1

    def run(self, cost, allowed) -> str:
        """Iterates to optimality; returns "optimal" or "unbounded"."""
        streak = 0
        while True:
            pi = self._duals(cost)
            in_basis = set(self.basis)
            entering, best = None, Fraction(0)
            for j in range(len(self.columns)):
                if j in in_basis or not allowed(j):
                    continue
                reduced = cost(j) - sum((pi[k] * v for k, v in self.columns[j].items() if pi[k]), Fraction(0))
                if reduced < 0:
                    if self.bland:
                        entering = j
                        break
                    if reduced < best:
                        entering, best = j, reduced
            if entering is None:
                return "optimal"
            u = self._direction(entering)
            leave, ratio = None, None
            for p in range(self.m):
                if u[p] > 0:
                    q = self.x_b[p] / u[p]
                    if ratio is None or q < ratio or (q == ratio and self.basis[p] < self.basis[leave]):
                        leave, ratio = p, q
            if leave is None:
                return "unbounded"
            if ratio == 0:
                streak += 1
                if streak >= DEGENERATE_STREAK and not self.bland:
                    logger.debug(f"Switching to Bland's rule after {streak} degenerate pivots")
                    self.bland = True
            else:
                streak = 0
            self._pivot(leave, entering, u)

    def drive_out_artificials(self):
        for p, var in enumerate(self.basis):
            if var < self.n_real:
                continue
            in_basis = set(self.basis)
            for j in range(self.n_real):
                if j in in_basis:
                    continue
                u = self._direction(j)
                if u[p] != 0:
                    self._pivot(p, j, u)
                    break


def _solve_dual(rows: Sequence[Tuple[QVector, Fraction]], objective: QVector):
    """
    Solves max offset.y subject to sum y_i normal_i = objective, y >= 0.
    Returns (status, y, pi, signs).
    """
    d = len(objective)
    signs = [1 if c >= 0 else -1 for c in objective]
    columns = []
    for normal, _ in rows:
        col = {k: signs[k] * v for k, v in enumerate(normal) if v}
        columns.append(col)
    rhs = [signs[k] * c for k, c in enumerate(objective)]
    sf = _StandardForm(columns, rhs)
    n_real = sf.n_real

    sf.run(lambda j: Fraction(1) if j >= n_real else Fraction(0), lambda j: True)
    phase_one = sum((sf.x_b[p] for p, var in enumerate(sf.basis) if var >= n_real), Fraction(0))
    if phase_one > 0:
        return "infeasible", None, None, signs
    sf.drive_out_artificials()

    offsets = [off for _, off in rows]
    status = sf.run(lambda j: -offsets[j] if j < n_real else Fraction(0), lambda j: j < n_real)
    if status == "unbounded":
        return "unbounded", None, None, signs
    pi = sf._duals(lambda j: -offsets[j] if j < n_real else Fraction(0))
    y = {var: sf.x_b[p] for p, var in enumerate(sf.basis) if var < n_real and sf.x_b[p] != 0}
    logger.debug(f"Dual simplex on {len(rows)} rows x {d} variables: {sf.pivots} pivots")
    return "optimal", y, pi, signs


def _solve_simplex(H: HPolyhedron, objective: QVector) -> LPResult:
    rows = list(H.rows)
    status, y, pi, signs = _solve_dual(rows, objective)
    if status == "unbounded":
        return LPResult(status=LPStatus.INFEASIBLE)
    if status == "infeasible":
        # Dual empty: the primal is either empty or unbounded.
        if any(objective) and feasible(H, method=LPMethod.SIMPLEX):
            return LPResult(status=LPStatus.UNBOUNDED)
        return LPResult(status=LPStatus.INFEASIBLE)

    witness = tuple(-s * v for s, v in zip(signs, pi))
    value = dot(objective, witness)
    dual_value = sum((y_i * rows[i][1] for i, y_i in y.items()), Fraction(0))
    if dual_value != value or not H.satisfied_by(witness):
        raise RuntimeError(f"Simplex certificate mismatch: primal {rat_str(value)} vs dual {rat_str(dual_value)}")
    return LPResult(status=LPStatus.OPTIMAL, value=value, witness=witness, dual=y)


def _solve_cdd(H: HPolyhedron, objective: QVector) -> LPResult:
    mat = cdd_matrix(H)
    mat.obj_type = cdd.LPObjType.MIN
    mat.obj_func = tuple([0] + list(objective))
    lp = cdd.LinProg(mat)
    lp.solve()
    status = lp.status
    if status == cdd.LPStatusType.OPTIMAL:
        witness = tuple(Fraction(v) for v in lp.primal_solution)
        value = Fraction(lp.obj_value)
        if dot(objective, witness) != value or not H.satisfied_by(witness):
            raise RuntimeError(f"cdd optimum {rat_str(value)} fails the exact audit")
        return LPResult(status=LPStatus.OPTIMAL, value=value, witness=witness)
    if status in (cdd.LPStatusType.INCONSISTENT, cdd.LPStatusType.STRUC_INCONSISTENT,
                  cdd.LPStatusType.DUAL_UNBOUNDED):
        return LPResult(status=LPStatus.INFEASIBLE)
    if status == cdd.LPStatusType.UNBOUNDED:
        return LPResult(status=LPStatus.UNBOUNDED)
    if status in (cdd.LPStatusType.DUAL_INCONSISTENT, cdd.LPStatusType.STRUC_DUAL_INCONSISTENT):
        if any(objective) and feasible(H):
            return LPResult(status=LPStatus.UNBOUNDED)
        return LPResult(status=LPStatus.INFEASIBLE)
    raise RuntimeError(f"cdd left the program undecided ({status})")


def solve(problem: LPProblem, method: Optional[LPMethod] = None) -> LPResult:
    """
    Minimizes over {x : N x >= offset}. The cdd backend runs cddlib's exact
    rational solver; the simplex backend runs the in-house revised simplex on
    the dual program max offset.y, N^T y = objective, y >= 0, and also
    returns the row multipliers y.
    """
    method = LPMethod(method or LPMethod.CDD)
    H = problem.constraints
    objective = qvector(problem.objective)
    if len(objective) != H.dim:
        raise ValueError(f"Objective has length {len(objective)}, constraints live in dimension {H.dim}")
    if not H.rows:
        if any(objective):
            return LPResult(status=LPStatus.UNBOUNDED)
        return LPResult(status=LPStatus.OPTIMAL, value=Fraction(0),
                        witness=tuple(Fraction(0) for _ in range(H.dim)), dual={})
    if method == LPMethod.SIMPLEX:
        return _solve_simplex(H, objective)
    return _solve_cdd(H, objective)


def feasible(H: HPolyhedron, method: Optional[LPMethod] = None) -> bool:
    zero = tuple(Fraction(0) for _ in range(H.dim))
    return solve(LPProblem(zero, H), method).status == LPStatus.OPTIMAL


def contains(outer: HPolyhedron, inner: HPolyhedron) -> bool:
    """True iff every point of inner satisfies every row of outer."""
    if outer.dim != inner.dim:
        raise ValueError(f"Dimension mismatch: {outer.dim} vs {inner.dim}")
    if not feasible(inner):
        return True
    for normal, offset in outer.rows:
        result = solve(LPProblem(normal, inner))
        if result.status == LPStatus.UNBOUNDED or result.value < offset:
            return False
    return True


def same_set(first: HPolyhedron, second: HPolyhedron) -> bool:
    return contains(first, second) and contains(second, first)


def feasible_at(polygon: NewtonPolygon, n: int, r: int, t) -> bool:
    """Whether the body of tD_n + rE is nonempty, P_D given by polygon."""
    t = to_rational(t)
    if t < 0:
        return False
    return feasible(build_toric_body(polygon.scale(t), n, r))


def mu_slope(preset: SurfacePreset, ray_coeffs: Sequence, n: int) -> Optional[Fraction]:
    """
    Smallest t for which the body of tD_n + E is nonempty, as one LP over
    (a, b, t). Returns None when no t works.
    """
    polygon = preset.polygon(ray_coeffs)
    forms = ClassForms.dilation(polygon)
    dim = 2 * n + 1
    rows = body_rows(n, 1, forms)
    rows.append((tuple(Fraction(1) if k == dim - 1 else Fraction(0) for k in range(dim)), Fraction(0)))
    H = HPolyhedron.from_rows(dim, rows)
    objective = tuple(Fraction(1) if k == dim - 1 else Fraction(0) for k in range(dim))
    result = solve(LPProblem(objective, H))
    if result.status != LPStatus.OPTIMAL:
        logger.warning(f"mu for {preset.label} n={n}: {result.status.value}")
        return None
    logger.info(f"mu for {preset.label} n={n}: {rat_str(result.value)} ({len(H.rows)} rows)")
    return result.value


def facet_check(preset: SurfacePreset, n: int, facet: Sequence) -> FacetVerdict:
    """
    Checks f.(class) >= f_E on the projected cone of classes D with a nonempty
    body for D_n + E. facet lists the class coefficients followed by f_E.
    """
    facet = qvector(facet)
    k = preset.picard_rank
    if len(facet) != k + 1:
        raise ValueError(f"{preset.label} facets have {k} class coefficients and one E coefficient")
    dim = 2 * n + k
    H = HPolyhedron.from_rows(dim, body_rows(n, 1, preset.class_forms()))
    objective = tuple([Fraction(0)] * (2 * n) + list(facet[:k]))
    result = solve(LPProblem(objective, H))
    if result.status == LPStatus.INFEASIBLE:
        raise EmptyRegionError(f"No class of {preset.label} has a nonempty body at n={n}")
    if result.status == LPStatus.UNBOUNDED:
        return FacetVerdict.VIOLATED
    gap = result.value - facet[k]
    logger.info(f"Facet {[rat_str(v) for v in facet]} on {preset.label} n={n}: min gap {rat_str(gap)}")
    if gap < 0:
        return FacetVerdict.VIOLATED
    return FacetVerdict.VALID_AND_TIGHT if gap == 0 else FacetVerdict.VALID_NOT_TIGHT


def _mu_job(job: Tuple[str, Tuple, int]) -> Optional[Fraction]:
    label, ray, n = job
    return mu_slope(preset_from_label(label), ray, n)


async def run_mu_table(jobs: List[Tuple[str, Tuple, int]], workers: int = 1) -> List[Optional[Fraction]]:
    """Solves the jobs (surface label, ray, n) concurrently; results follow input order."""
    if workers <= 1:
        return [_mu_job(job) for job in jobs]
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, _mu_job, job) for job in jobs]
        return list(await asyncio.gather(*futures))
