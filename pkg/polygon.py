import enum
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from ratcore import QQ, RationalLike, qvector, rat_str, to_rational

# Configure module logger
logger = logging.getLogger(__name__)

Piece = Tuple[QQ, QQ]


class EmptyPolygonError(ValueError):
    """Raised when the lower boundary rises above the upper boundary somewhere on [0, c]."""


class UnboundedPolygonError(ValueError):
    """Raised when an operation needs a bounded polygon (area, lattice points, vertices)."""


def _eval_max(pieces, a: Fraction) -> Fraction:
    return max(alpha * a + beta for alpha, beta in pieces)


def _eval_min(pieces, a: Fraction) -> Fraction:
    return min(gamma * a + delta for gamma, delta in pieces)


def _argmax(pieces, a):
    return max(range(len(pieces)), key=lambda k: (pieces[k][0] * a + pieces[k][1], -k))


def _argmin(pieces, a):
    return min(range(len(pieces)), key=lambda k: (pieces[k][0] * a + pieces[k][1], k))


class NewtonPolygon(BaseModel):
    """
    P = {(a, b) : 0 <= a <= c, l(a) <= b <= u(a)} with l = max of the lower
    pieces (alpha, beta) and u = min of the upper pieces (gamma, delta).
    c is None (and upper is empty) for the unbounded quadrant of the affine plane.

    Build instances through NewtonPolygon.build so that emptiness is reported
    as EmptyPolygonError.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    c: Optional[QQ] = None
    lower: Tuple[Piece, ...] = ((Fraction(0), Fraction(0)),)
    upper: Tuple[Piece, ...] = ()

    @classmethod
    def build(cls, c: Optional[RationalLike], lower: Sequence[Sequence[RationalLike]],
              upper: Sequence[Sequence[RationalLike]] = ()) -> "NewtonPolygon":
        c = None if c is None else to_rational(c)
        lower = tuple(tuple(qvector(piece)) for piece in lower)
        upper = tuple(tuple(qvector(piece)) for piece in upper)
        if any(len(piece) != 2 for piece in lower + upper):
            raise ValueError("Boundary pieces are (slope, intercept) pairs")
        if not lower:
            raise UnboundedPolygonError("A polygon needs at least one lower boundary piece")
        if c is None and upper:
            raise UnboundedPolygonError("Upper pieces given without a width cap c")
        if c is not None and not upper:
            raise UnboundedPolygonError(f"Width cap c={rat_str(c)} given without upper pieces")
        if c is not None and c < 0:
            raise EmptyPolygonError(f"Width cap c={rat_str(c)} is negative")

        if c is not None:
            # u - l is concave, so it is enough to look at both ends of [0, c].
            for a in (Fraction(0), c):
                lo, hi = _eval_max(lower, a), _eval_min(upper, a)
                if lo > hi:
                    k, m = _argmax(lower, a), _argmin(upper, a)
                    raise EmptyPolygonError(
                        f"Lower piece {k} {tuple(map(rat_str, lower[k]))} exceeds upper piece {m} "
                        f"{tuple(map(rat_str, upper[m]))} at a={rat_str(a)} ({rat_str(lo)} > {rat_str(hi)})"
                    )
        return cls(c=c, lower=lower, upper=upper)

    @classmethod
    def quadrant(cls) -> "NewtonPolygon":
        return cls.build(None, [(0, 0)], [])

    @property
    def bounded(self) -> bool:
        return self.c is not None

    def ell(self, a: RationalLike) -> Fraction:
        return _eval_max(self.lower, to_rational(a))

    def u(self, a: RationalLike) -> Fraction:
        if not self.upper:
            raise UnboundedPolygonError("The quadrant has no upper boundary")
        return _eval_min(self.upper, to_rational(a))

    def contains(self, point: Sequence[RationalLike]) -> bool:
        a, b = qvector(point)
        if a < 0 or (self.c is not None and a > self.c):
            return False
        if b < self.ell(a):
            return False
        return not self.upper or b <= self.u(a)

    def _require_bounded(self, what: str):
        if self.c is None:
            raise UnboundedPolygonError(f"Cannot compute {what} of an unbounded polygon")

    def vertices(self) -> List[Tuple[Fraction, Fraction]]:
        """Counterclockwise vertex cycle starting from the lowest point on a=0."""
        self._require_bounded("vertices")
        c = self.c
        breaks = {Fraction(0), c}
        for pieces in (self.lower, self.upper):
            for k in range(len(pieces)):
                for m in range(k + 1, len(pieces)):
                    (s1, i1), (s2, i2) = pieces[k], pieces[m]
                    if s1 != s2:
                        a = (i2 - i1) / (s1 - s2)
                        if 0 < a < c:
                            breaks.add(a)
        xs = sorted(breaks)
        cycle = [(a, self.ell(a)) for a in xs] + [(a, self.u(a)) for a in reversed(xs)]

        # Drop repeated and collinear points so only corners remain.
        points: List[Tuple[Fraction, Fraction]] = []
        for p in cycle:
            if not points or points[-1] != p:
                points.append(p)
        while len(points) > 1 and points[0] == points[-1]:
            points.pop()
        changed = True
        while changed and len(points) > 2:
            changed = False
            for i in range(len(points)):
                prev, cur, nxt = points[i - 1], points[i], points[(i + 1) % len(points)]
                cross = (cur[0] - prev[0]) * (nxt[1] - prev[1]) - (cur[1] - prev[1]) * (nxt[0] - prev[0])
                if cross == 0:
                    points.pop(i)
                    changed = True
                    break
        return points

    def area(self) -> Fraction:
        self._require_bounded("area")
        pts = self.vertices()
        twice = sum((p[0] * q[1] - q[0] * p[1] for p, q in zip(pts, pts[1:] + pts[:1])), Fraction(0))
        return abs(twice) / 2

    def lattice_points(self) -> List[Tuple[int, int]]:
        self._require_bounded("lattice points")
        points = []
        for p in range(0, math.floor(self.c) + 1):
            for q in range(math.ceil(self.ell(p)), math.floor(self.u(p)) + 1):
                points.append((p, q))
        return points

    def scale(self, t: RationalLike) -> "NewtonPolygon":
        t = to_rational(t)
        if t < 0:
            raise ValueError(f"Scaling factor must be nonnegative, got {rat_str(t)}")
        return NewtonPolygon.build(
            None if self.c is None else t * self.c,
            [(alpha, t * beta) for alpha, beta in self.lower],
            [(gamma, t * delta) for gamma, delta in self.upper],
        )

    def to_json(self) -> dict:
        return {
            "c": None if self.c is None else rat_str(self.c),
            "lower": [[rat_str(x) for x in piece] for piece in self.lower],
            "upper": [[rat_str(x) for x in piece] for piece in self.upper],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NewtonPolygon":
        return cls.build(data.get("c"), data.get("lower", [(0, 0)]), data.get("upper", []))


class ClassForms(BaseModel):
    """
    Boundary data whose cap and intercepts are affine forms in k extra variables.
    Each form is (constant, coeff_1, ..., coeff_k); slopes stay fixed.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    c: Optional[Tuple[QQ, ...]]
    lower: Tuple[Tuple[QQ, Tuple[QQ, ...]], ...]
    upper: Tuple[Tuple[QQ, Tuple[QQ, ...]], ...]

    @property
    def extra(self) -> int:
        forms = [f for _, f in self.lower + self.upper] + ([self.c] if self.c is not None else [])
        return len(forms[0]) - 1 if forms else 0

    @classmethod
    def constant(cls, polygon: NewtonPolygon) -> "ClassForms":
        """Forms with no extra variables: the polygon itself."""
        return cls(
            c=None if polygon.c is None else (polygon.c,),
            lower=tuple((alpha, (beta,)) for alpha, beta in polygon.lower),
            upper=tuple((gamma, (delta,)) for gamma, delta in polygon.upper),
        )

    @classmethod
    def dilation(cls, polygon: NewtonPolygon) -> "ClassForms":
        """Forms in one variable t describing t*P."""
        zero = Fraction(0)
        return cls(
            c=None if polygon.c is None else (zero, polygon.c),
            lower=tuple((alpha, (zero, beta)) for alpha, beta in polygon.lower),
            upper=tuple((gamma, (zero, delta)) for gamma, delta in polygon.upper),
        )


class SurfaceName(str, enum.Enum):
    P2 = "P2"
    P1XP1 = "P1xP1"
    HIRZEBRUCH = "hirzebruch"


class SurfacePreset(BaseModel):
    """
    Toric surface with its class-to-polygon map. Hirzebruch surfaces follow the
    orientation P = {0 <= a <= y, 0 <= b <= x + e*a}; mirrored=True flips it to
    u(a) = x + e*y - e*a.
    """
    model_config = ConfigDict(frozen=True)

    name: SurfaceName
    e: int = 0
    mirrored: bool = False

    @property
    def picard_rank(self) -> int:
        return 1 if self.name == SurfaceName.P2 else 2

    @property
    def label(self) -> str:
        if self.name == SurfaceName.HIRZEBRUCH:
            return f"H{self.e}" + ("m" if self.mirrored else "")
        return self.name.value

    def class_forms(self) -> ClassForms:
        """Cap and intercepts as linear forms in the class coordinates."""
        zero, one = Fraction(0), Fraction(1)
        if self.name == SurfaceName.P2:
            # coords (d,)
            return ClassForms(c=(zero, one), lower=((zero, (zero, zero)),), upper=((-one, (zero, one)),))
        if self.name == SurfaceName.P1XP1:
            # coords (x, y)
            return ClassForms(c=(zero, one, zero), lower=((zero, (zero, zero, zero)),),
                              upper=((zero, (zero, zero, one)),))
        e = Fraction(self.e)
        if self.mirrored:
            upper = ((-e, (zero, one, e)),)
        else:
            upper = ((e, (zero, one, zero)),)
        return ClassForms(c=(zero, zero, one), lower=((zero, (zero, zero, zero)),), upper=upper)

    def polygon(self, coeffs: Sequence[RationalLike]) -> NewtonPolygon:
        coeffs = qvector(coeffs)
        if len(coeffs) != self.picard_rank:
            raise ValueError(f"{self.label} expects {self.picard_rank} class coefficients, got {len(coeffs)}")
        forms = self.class_forms()

        def value(form):
            return form[0] + sum((f * x for f, x in zip(form[1:], coeffs)), Fraction(0))

        logger.debug(f"Building polygon for {self.label} with coeffs {[rat_str(x) for x in coeffs]}")
        return NewtonPolygon.build(
            value(forms.c),
            [(alpha, value(form)) for alpha, form in forms.lower],
            [(gamma, value(form)) for gamma, form in forms.upper],
        )


P2 = SurfacePreset(name=SurfaceName.P2)
P1XP1 = SurfacePreset(name=SurfaceName.P1XP1)


def hirzebruch(e: int, mirrored: bool = False) -> SurfacePreset:
    if e < 0:
        raise ValueError(f"Hirzebruch parameter must be nonnegative, got {e}")
    return SurfacePreset(name=SurfaceName.HIRZEBRUCH, e=e, mirrored=mirrored)


# Ray of the divisor D whose slopes are tabulated, per surface label.
TABLE_RAYS = {
    "P2": (1,),
    "P1xP1": (1, 1),
    "H1": (1, 1),
    "H2": (1, 1),
}


def preset_from_label(label: str) -> SurfacePreset:
    """Parses "P2", "P1xP1", "H<e>" and "H<e>m"."""
    text = label.strip()
    if text.upper() == "P2":
        return P2
    if text.lower() == "p1xp1":
        return P1XP1
    if text[:1].upper() == "H":
        body = text[1:]
        mirrored = body.endswith("m")
        digits = body[:-1] if mirrored else body
        if digits.isdigit():
            return hirzebruch(int(digits), mirrored)
    raise ValueError(f"Unknown surface label: {label!r}")


def polygon_of_class(preset: SurfacePreset, coeffs: Sequence[RationalLike]) -> NewtonPolygon:
    return preset.polygon(coeffs)


def scale(polygon: NewtonPolygon, t: RationalLike) -> NewtonPolygon:
    return polygon.scale(t)


def area(polygon: NewtonPolygon) -> Fraction:
    return polygon.area()


def lattice_points(polygon: NewtonPolygon) -> List[Tuple[int, int]]:
    return polygon.lattice_points()
