"""Gap-centered period cell holding two nearly touching convex inclusions.

The working cell is the rectangle (-L1, L1) x (-L2, L2).  The narrow gap of
width ``eps`` sits at the origin: inclusion D2 is centered at (L1, 0) on the
right edge, its mirror image D1 at (-L1, 0), so the inner boundary of D2
crosses the x-axis at (eps/2, 0).  Inclusions are disks or axis-aligned
ellipses; both are symmetric in each coordinate axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Disk",
    "Ellipse",
    "InclusionShape",
    "GapGeometry",
    "Region",
    "PathSegment",
    "Curve",
    "make_gap_geometry",
    "gap_halfwidth",
    "gap_halfwidth_deriv",
    "region_classify",
    "boundary_curves",
    "inclusion_boundary",
    "rect_classify",
    "rect_matrix_area",
]


@dataclass(frozen=True)
class Disk:
    """Circular inclusion of radius r0."""

    r0: float

    def __post_init__(self) -> None:
        if not self.r0 > 0.0:
            raise ValueError(f"disk radius must be positive, got {self.r0}")

    @property
    def kind(self) -> str:
        return "disk"

    @property
    def half_width(self) -> float:
        return self.r0

    @property
    def half_height(self) -> float:
        return self.r0

    @property
    def curvature_at_gap(self) -> float:
        return 1.0 / self.r0


@dataclass(frozen=True)
class Ellipse:
    """Axis-aligned elliptical inclusion with semi-axes (a, b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError(f"ellipse semi-axes must be positive, got a={self.a}, b={self.b}")

    @property
    def kind(self) -> str:
        return "ellipse"

    @property
    def half_width(self) -> float:
        return self.a

    @property
    def half_height(self) -> float:
        return self.b

    @property
    def curvature_at_gap(self) -> float:
        # curvature of the ellipse boundary at the end of the horizontal axis
        return self.a / (self.b * self.b)


InclusionShape = Union[Disk, Ellipse]


class Region(enum.IntEnum):
    MATRIX = 0
    INCLUSION1 = 1
    INCLUSION2 = 2
    OUTSIDE_CELL = 3


@dataclass(frozen=True)
class GapGeometry:
    """Frozen description of one gap configuration.

    kappa0 is the boundary curvature at the gap-facing vertex, r_osc = 1/kappa0
    the osculating disk radius there.  The two fixed singular points p1, p2 sit
    at (-a, 0) and (a, 0) with a = sqrt(eps (4 r_osc + eps)) / 2; both lie
    strictly inside their inclusion for any eps > 0.  L is the half-height of
    the neck region used by the test fields (half the inclusion half-height).
    """

    shape: InclusionShape
    eps: float
    L1: float
    L2: float
    kappa0: float
    r_osc: float
    a: float
    L: float

    @property
    def half_width(self) -> float:
        return self.shape.half_width

    @property
    def half_height(self) -> float:
        return self.shape.half_height

    @property
    def center1(self) -> tuple[float, float]:
        return (-self.L1, 0.0)

    @property
    def center2(self) -> tuple[float, float]:
        return (self.L1, 0.0)

    @property
    def p1(self) -> tuple[float, float]:
        return (-self.a, 0.0)

    @property
    def p2(self) -> tuple[float, float]:
        return (self.a, 0.0)

    @property
    def cell_area(self) -> float:
        return 4.0 * self.L1 * self.L2


def make_gap_geometry(shape: InclusionShape, eps: float, L2: float) -> GapGeometry:
    if not eps > 0.0:
        raise ValueError(f"gap width must be positive, got eps={eps}")
    if not L2 > shape.half_height:
        raise ValueError(
            f"cell half-height L2={L2} must exceed the inclusion half-height "
            f"{shape.half_height}"
        )
    kappa0 = shape.curvature_at_gap
    r_osc = 1.0 / kappa0
    a = np.sqrt(eps * (4.0 * r_osc + eps)) / 2.0
    return GapGeometry(
        shape=shape,
        eps=eps,
        L1=shape.half_width + eps / 2.0,
        L2=L2,
        kappa0=kappa0,
        r_osc=r_osc,
        a=float(a),
        L=shape.half_height / 2.0,
    )


def gap_halfwidth(geom: GapGeometry, y) -> np.ndarray:
    """Half-width f(y) of the gap: D2's inner boundary is the graph x = f(y).

    Defined for |y| <= inclusion half-height.  f(0) = eps/2 and
    f(y) = eps/2 + kappa0 y^2/2 + O(y^4) near the gap center.
    """
    y = np.asarray(y, dtype=float)
    A = geom.half_width
    B = geom.half_height
    if np.any(np.abs(y) > B * (1.0 + 1e-12)):
        raise ValueError("gap_halfwidth evaluated beyond the inclusion half-height")
    t = np.clip(1.0 - (y / B) ** 2, 0.0, None)
    return geom.eps / 2.0 + A * (1.0 - np.sqrt(t))


def gap_halfwidth_deriv(geom: GapGeometry, y) -> np.ndarray:
    """Derivative f'(y); requires |y| strictly below the inclusion half-height."""
    y = np.asarray(y, dtype=float)
    A = geom.half_width
    B = geom.half_height
    if np.any(np.abs(y) >= B):
        raise ValueError("gap_halfwidth_deriv needs |y| < inclusion half-height")
    t = 1.0 - (y / B) ** 2
    return A * y / (B * B * np.sqrt(t))


def _scaled_sq_dist(geom: GapGeometry, x, y, center_x: float):
    """((x-cx)/A)^2 + (y/B)^2; value < 1 means inside that inclusion."""
    A = geom.half_width
    B = geom.half_height
    return ((x - center_x) / A) ** 2 + (y / B) ** 2


def region_classify(geom: GapGeometry, points) -> np.ndarray:
    """Classify points as matrix / inclusion1 / inclusion2 / outside_cell.

    Cell-boundary and inclusion-boundary points fall to the matrix by the
    measure-zero convention, except points strictly outside the rectangle.
    """
    pts = np.asarray(points, dtype=float)
    x, y = pts[..., 0], pts[..., 1]
    out = np.full(np.shape(x), int(Region.MATRIX), dtype=np.int8)
    inc2 = _scaled_sq_dist(geom, x, y, geom.L1) < 1.0
    inc1 = _scaled_sq_dist(geom, x, y, -geom.L1) < 1.0
    out[inc2] = int(Region.INCLUSION2)
    out[inc1] = int(Region.INCLUSION1)
    outside = (np.abs(x) > geom.L1) | (np.abs(y) > geom.L2)
    out[outside] = int(Region.OUTSIDE_CELL)
    return out


# ---------------------------------------------------------------------------
# boundary curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSegment:
    """One smooth parametrized piece of a boundary curve, t in [0, 1].

    ``point`` maps t -> (..., 2) coordinates, ``speed`` gives |dgamma/dt| for
    the arclength weight and ``normal`` the unit normal pointing out of the
    matrix region (into an inclusion on inclusion arcs, out of the cell on
    cell edges).
    """

    point: Callable[[np.ndarray], np.ndarray]
    speed: Callable[[np.ndarray], np.ndarray]
    normal: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Curve:
    segments: tuple[PathSegment, ...]


def _ellipse_arc(cx: float, A: float, B: float, th0: float, th1: float) -> PathSegment:
    """Arc of the ellipse centered (cx, 0); normal points into the inclusion."""
    span = th1 - th0

    def point(t: np.ndarray) -> np.ndarray:
        th = th0 + span * np.asarray(t, dtype=float)
        return np.stack((cx + A * np.cos(th), B * np.sin(th)), axis=-1)

    def speed(t: np.ndarray) -> np.ndarray:
        th = th0 + span * np.asarray(t, dtype=float)
        return abs(span) * np.hypot(A * np.sin(th), B * np.cos(th))

    def normal(t: np.ndarray) -> np.ndarray:
        th = th0 + span * np.asarray(t, dtype=float)
        nx = np.cos(th) / A
        ny = np.sin(th) / B
        norm = np.hypot(nx, ny)
        # outward of the ellipse is (nx, ny)/norm; matrix-outward is the flip
        return np.stack((-nx / norm, -ny / norm), axis=-1)

    return PathSegment(point=point, speed=speed, normal=normal)


def _line_segment(p0, p1, n) -> PathSegment:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    n = np.asarray(n, dtype=float)
    length = float(np.hypot(*(p1 - p0)))

    def point(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return p0 + t[..., None] * (p1 - p0)

    def speed(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, length)

    def normal(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(n, t.shape + (2,)).copy()

    return PathSegment(point=point, speed=speed, normal=normal)


def boundary_curves(geom: GapGeometry) -> dict[str, Curve]:
    """The four pieces of the matrix boundary inside the cell.

    gamma_plus  : inner half of the D2 boundary plus the two uncovered parts
                  of the right cell edge; normal into D2 resp. (1, 0).
    gamma_minus : mirror image on the left.
    edge_top / edge_bottom : horizontal cell edges, outward normals.
    """
    A = geom.half_width
    B = geom.half_height
    L1, L2 = geom.L1, geom.L2

    gamma_plus = Curve(
        segments=(
            _line_segment((L1, L2), (L1, B), (1.0, 0.0)),
            _ellipse_arc(L1, A, B, np.pi / 2.0, 3.0 * np.pi / 2.0),
            _line_segment((L1, -B), (L1, -L2), (1.0, 0.0)),
        )
    )
    gamma_minus = Curve(
        segments=(
            _line_segment((-L1, L2), (-L1, B), (-1.0, 0.0)),
            _ellipse_arc(-L1, A, B, np.pi / 2.0, -np.pi / 2.0),
            _line_segment((-L1, -B), (-L1, -L2), (-1.0, 0.0)),
        )
    )
    edge_top = Curve(segments=(_line_segment((-L1, L2), (L1, L2), (0.0, 1.0)),))
    edge_bottom = Curve(segments=(_line_segment((-L1, -L2), (L1, -L2), (0.0, -1.0)),))
    return {
        "gamma_plus": gamma_plus,
        "gamma_minus": gamma_minus,
        "edge_top": edge_top,
        "edge_bottom": edge_bottom,
    }


def inclusion_boundary(geom: GapGeometry, which: int) -> Curve:
    """Full closed boundary of inclusion 1 or 2, normal pointing into it."""
    if which not in (1, 2):
        raise ValueError(f"inclusion index must be 1 or 2, got {which}")
    cx = geom.L1 if which == 2 else -geom.L1
    arc = _ellipse_arc(cx, geom.half_width, geom.half_height, 0.0, 2.0 * np.pi)
    return Curve(segments=(arc,))


# ---------------------------------------------------------------------------
# exact rectangle tests used by the cell quadrature
# ---------------------------------------------------------------------------


def _arc_antideriv(t):
    """Antiderivative of sqrt(1 - t^2) on [-1, 1], odd in t."""
    t = np.clip(t, -1.0, 1.0)
    return 0.5 * (t * np.sqrt(np.clip((1.0 - t) * (1.0 + t), 0.0, None)) + np.arcsin(t))


def _rect_inclusion_area(geom: GapGeometry, x1, x2, y1, y2, center_x: float):
    """Exact area of [x1,x2]x[y1,y2] intersected with one inclusion.

    Built from vertical-slab integrals whose terms are local to the
    rectangle, so slivers at the gap (areas many orders below the cell
    scale) come out without large-term cancellation.
    """
    A = geom.half_width
    B = geom.half_height
    x_lo = center_x - A
    x_hi = center_x + A

    y1c = np.clip(np.asarray(y1, dtype=float), -B, B)
    y2c = np.clip(np.asarray(y2, dtype=float), -B, B)

    def chord_integral(lo, hi):
        # integral of the full chord length 2 A sqrt(1-(y/B)^2) over [lo, hi]
        return 2.0 * A * B * (_arc_antideriv(hi / B) - _arc_antideriv(lo / B))

    def left_integral(x):
        """T(x): area of the inclusion part left of the line u = x, in the y-window."""
        x = np.asarray(x, dtype=float)
        dL = (x - x_lo) / A
        dR = (x_hi - x) / A
        rad = B * np.sqrt(np.clip(dL * dR, 0.0, None))
        lo = np.clip(y1c, -rad, rad)
        hi = np.clip(y2c, -rad, rad)
        half = A * B * (_arc_antideriv(hi / B) - _arc_antideriv(lo / B))
        partial = (x - center_x) * (hi - lo) + half
        # x right of the center: full chords outside |y| <= rad, partial inside
        right_case = partial + chord_integral(y1c, y2c) - 2.0 * half
        value = np.where(x <= center_x, partial, right_case)
        value = np.where(dL <= 0.0, 0.0, value)
        value = np.where(dR <= 0.0, chord_integral(y1c, y2c), value)
        return np.clip(value, 0.0, None)

    return np.clip(left_integral(x2) - left_integral(x1), 0.0, None)


def rect_matrix_area(geom: GapGeometry, x1, x2, y1, y2):
    """Exact matrix-region area of axis-aligned rectangles inside the cell."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    total = (x2 - x1) * (y2 - y1)
    cut1 = _rect_inclusion_area(geom, x1, x2, y1, y2, -geom.L1)
    cut2 = _rect_inclusion_area(geom, x1, x2, y1, y2, geom.L1)
    return np.clip(total - cut1 - cut2, 0.0, None)


def _rect_vs_inclusion(geom: GapGeometry, x1, x2, y1, y2, center_x: float):
    """Per-rectangle code vs one inclusion: 0 disjoint, 1 contained, 2 partial.

    Exact for axis-aligned rectangles because the axis-aligned scaling onto
    the unit disk maps rectangles to rectangles.
    """
    A = geom.half_width
    B = geom.half_height
    u1 = (x1 - center_x) / A
    u2 = (x2 - center_x) / A
    v1 = y1 / B
    v2 = y2 / B
    # farthest corner from the center decides containment
    umax = np.maximum(np.abs(u1), np.abs(u2))
    vmax = np.maximum(np.abs(v1), np.abs(v2))
    inside = umax * umax + vmax * vmax <= 1.0
    # nearest point of the rectangle to the center decides disjointness
    unear = np.where((u1 <= 0.0) & (u2 >= 0.0), 0.0, np.minimum(np.abs(u1), np.abs(u2)))
    vnear = np.where((v1 <= 0.0) & (v2 >= 0.0), 0.0, np.minimum(np.abs(v1), np.abs(v2)))
    disjoint = unear * unear + vnear * vnear >= 1.0
    code = np.full(np.shape(inside), 2, dtype=np.int8)
    code[disjoint] = 0
    code[inside] = 1
    return code


def rect_classify(geom: GapGeometry, x1, x2, y1, y2) -> np.ndarray:
    """Classify rectangles: 0 pure matrix, 1 in D1, 2 in D2, 3 straddling."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    c1 = _rect_vs_inclusion(geom, x1, x2, y1, y2, -geom.L1)
    c2 = _rect_vs_inclusion(geom, x1, x2, y1, y2, geom.L1)
    code = np.zeros(np.shape(c1), dtype=np.int8)
    code[(c1 == 2) | (c2 == 2)] = 3
    code[c1 == 1] = 1
    code[c2 == 1] = 2
    return code
