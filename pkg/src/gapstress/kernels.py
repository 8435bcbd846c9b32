"""Free-space elasticity kernels and the paired singular test fields.

The Kelvin matrix here is normalized so the Lame operator applied to a
column gives +delta times that basis vector; the traction flux of a column
over any contour enclosing the pole, taken with the outward normal, is the
corresponding unit vector.  Gradients are hand-derived closed forms; finite
differences appear only in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elasticity import LameMaterial, Matrix2, SymTensor2, derived_constants, stress_from_gradient
from .geometry import GapGeometry

__all__ = [
    "POLE_EXCLUSION_RADIUS",
    "KERNEL_NAMES",
    "KernelContext",
    "kelvin_matrix",
    "kernel_displacement",
    "kernel_gradient",
    "singular_displacement",
    "singular_gradient",
    "singular_stress",
]

POLE_EXCLUSION_RADIUS = 1e-12

KERNEL_NAMES = ("kelvin1", "kelvin2", "radial", "rotational")


def _split(x) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError(f"points must have trailing dimension 2, got shape {pts.shape}")
    return pts[..., 0], pts[..., 1]


def _guarded_r2(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    r2 = x1 * x1 + x2 * x2
    if np.any(r2 < POLE_EXCLUSION_RADIUS * POLE_EXCLUSION_RADIUS):
        raise ValueError("kernel evaluated within the pole exclusion radius")
    return r2


def kelvin_matrix(x, mat: LameMaterial) -> Matrix2:
    """Kelvin matrix G_ij(x) = alpha1 delta_ij ln|x| - alpha2 x_i x_j / |x|^2."""
    x1, x2 = _split(x)
    r2 = _guarded_r2(x1, x2)
    cst = derived_constants(mat)
    logr = 0.5 * np.log(r2)
    return Matrix2(
        cst.alpha1 * logr - cst.alpha2 * x1 * x1 / r2,
        -cst.alpha2 * x1 * x2 / r2,
        -cst.alpha2 * x1 * x2 / r2,
        cst.alpha1 * logr - cst.alpha2 * x2 * x2 / r2,
    )


def kernel_displacement(which: str, x, mat: LameMaterial) -> np.ndarray:
    """Displacement of one nucleus of strain; shape (..., 2)."""
    x1, x2 = _split(x)
    r2 = _guarded_r2(x1, x2)
    if which == "kelvin1":
        g = kelvin_matrix(x, mat)
        return np.stack((g.a11, g.a21), axis=-1)
    if which == "kelvin2":
        g = kelvin_matrix(x, mat)
        return np.stack((g.a12, g.a22), axis=-1)
    if which == "radial":
        return np.stack((x1 / r2, x2 / r2), axis=-1)
    if which == "rotational":
        return np.stack((-x2 / r2, x1 / r2), axis=-1)
    raise ValueError(f"unknown kernel {which!r}, expected one of {KERNEL_NAMES}")


def kernel_gradient(which: str, x, mat: LameMaterial) -> Matrix2:
    """Closed-form displacement gradient of one nucleus; entry (i, j) is d_j u_i."""
    x1, x2 = _split(x)
    r2 = _guarded_r2(x1, x2)
    r4 = r2 * r2
    if which in ("kelvin1", "kelvin2"):
        cst = derived_constants(mat)
        a1, a2 = cst.alpha1, cst.alpha2
        if which == "kelvin1":
            d11 = a1 * x1 / r2 - a2 * (2.0 * x1 / r2 - 2.0 * x1 ** 3 / r4)
            d12 = a1 * x2 / r2 + 2.0 * a2 * x1 * x1 * x2 / r4
            d21 = -a2 * (x2 / r2 - 2.0 * x1 * x1 * x2 / r4)
            d22 = -a2 * (x1 / r2 - 2.0 * x1 * x2 * x2 / r4)
        else:
            d11 = -a2 * (x2 / r2 - 2.0 * x1 * x1 * x2 / r4)
            d12 = -a2 * (x1 / r2 - 2.0 * x1 * x2 * x2 / r4)
            d21 = a1 * x1 / r2 + 2.0 * a2 * x1 * x2 * x2 / r4
            d22 = a1 * x2 / r2 - a2 * (2.0 * x2 / r2 - 2.0 * x2 ** 3 / r4)
        return Matrix2(d11, d12, d21, d22)
    if which == "radial":
        return Matrix2(
            1.0 / r2 - 2.0 * x1 * x1 / r4,
            -2.0 * x1 * x2 / r4,
            -2.0 * x1 * x2 / r4,
            1.0 / r2 - 2.0 * x2 * x2 / r4,
        )
    if which == "rotational":
        return Matrix2(
            2.0 * x1 * x2 / r4,
            -1.0 / r2 + 2.0 * x2 * x2 / r4,
            1.0 / r2 - 2.0 * x1 * x1 / r4,
            -2.0 * x1 * x2 / r4,
        )
    raise ValueError(f"unknown kernel {which!r}, expected one of {KERNEL_NAMES}")


@dataclass(frozen=True)
class KernelContext:
    """Material plus the two singular points of one gap configuration."""

    material: LameMaterial
    a: float
    alpha2: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise ValueError(f"pole offset must be positive, got a={self.a}")
        object.__setattr__(self, "alpha2", derived_constants(self.material).alpha2)

    @classmethod
    def from_geometry(cls, geom: GapGeometry, mat: LameMaterial) -> "KernelContext":
        return cls(material=mat, a=geom.a)

    @property
    def p1(self) -> np.ndarray:
        return np.array([-self.a, 0.0])

    @property
    def p2(self) -> np.ndarray:
        return np.array([self.a, 0.0])


def _check_j(j: int) -> None:
    if j not in (1, 2):
        raise ValueError(f"loading index j must be 1 or 2, got {j}")


def singular_displacement(ctx: KernelContext, j: int, x) -> np.ndarray:
    """The singular test field q_j built from four nuclei of strain.

    q_1 pairs opposite horizontal point forces at p1, p2 with two centers of
    dilatation; q_2 pairs vertical point forces with two centers of rotation.
    Both vanish at the origin and decay like sqrt(eps) away from the gap.
    """
    _check_j(j)
    pts = np.asarray(x, dtype=float)
    mat = ctx.material
    d1 = pts - ctx.p1
    d2 = pts - ctx.p2
    kelvin = "kelvin1" if j == 1 else "kelvin2"
    nucleus = "radial" if j == 1 else "rotational"
    sign = 1.0 if j == 1 else -1.0
    out = kernel_displacement(kelvin, d1, mat) - kernel_displacement(kelvin, d2, mat)
    out += (sign * ctx.alpha2 * ctx.a) * (
        kernel_displacement(nucleus, d1, mat) + kernel_displacement(nucleus, d2, mat)
    )
    return out


def singular_gradient(ctx: KernelContext, j: int, x) -> Matrix2:
    """Closed-form displacement gradient of q_j."""
    _check_j(j)
    pts = np.asarray(x, dtype=float)
    mat = ctx.material
    d1 = pts - ctx.p1
    d2 = pts - ctx.p2
    kelvin = "kelvin1" if j == 1 else "kelvin2"
    nucleus = "radial" if j == 1 else "rotational"
    sign = 1.0 if j == 1 else -1.0
    gk1 = kernel_gradient(kelvin, d1, mat)
    gk2 = kernel_gradient(kelvin, d2, mat)
    gn1 = kernel_gradient(nucleus, d1, mat)
    gn2 = kernel_gradient(nucleus, d2, mat)
    c = sign * ctx.alpha2 * ctx.a
    return Matrix2(
        gk1.a11 - gk2.a11 + c * (gn1.a11 + gn2.a11),
        gk1.a12 - gk2.a12 + c * (gn1.a12 + gn2.a12),
        gk1.a21 - gk2.a21 + c * (gn1.a21 + gn2.a21),
        gk1.a22 - gk2.a22 + c * (gn1.a22 + gn2.a22),
    )


def singular_stress(ctx: KernelContext, j: int, x) -> SymTensor2:
    """Stress of q_j; divergence-free away from the two poles."""
    return stress_from_gradient(singular_gradient(ctx, j, x), ctx.material)
