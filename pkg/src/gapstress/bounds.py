"""Primal and dual test fields for the two gap energies.

The primal side evaluates the stiffness form on a Keller-type profile that
interpolates the boundary loading across the gap.  The dual side assembles a
statically admissible stress from the scaled singular pair field plus an
explicit divergence-free correction that cancels the traction on the
horizontal cell edges.  Evaluating the two variational functionals brackets
each energy from above and below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .elasticity import (
    LameMaterial,
    Matrix2,
    SymTensor2,
    compliance_contract,
    compliance_energy,
    energy_density,
)
from .geometry import (
    GapGeometry,
    Region,
    boundary_curves,
    gap_halfwidth,
    gap_halfwidth_deriv,
    inclusion_boundary,
    region_classify,
)
from .kernels import KernelContext, singular_displacement, singular_stress
from .quadrature import (
    QuadratureSpec,
    cumulative_line_table,
    integrate_cell,
    integrate_path,
)

__all__ = [
    "KellerProfile",
    "DualStress",
    "BoundResult",
    "Diagnostics",
    "StressField",
    "m_constant",
    "keller_test_gradient",
    "primal_upper",
    "build_dual_stress",
    "dual_lower",
    "flux_identity_check",
    "energy_identity_check",
]

StressField = Callable[[np.ndarray], Matrix2]

_E2 = np.array([0.0, 1.0])


def m_constant(geom: GapGeometry, mat: LameMaterial, j: int) -> float:
    """Load constant m_j of the dual construction; m_j/sqrt(eps) is the
    leading coefficient of both bounds."""
    if j == 1:
        return np.pi * (mat.lam + 2.0 * mat.mu) / np.sqrt(geom.kappa0)
    if j == 2:
        return np.pi * mat.mu / np.sqrt(geom.kappa0)
    raise ValueError(f"j must be 1 or 2, got {j}")


# ---------------------------------------------------------------------------
# primal side
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KellerProfile:
    """Scalar profile interpolating 0 on the left inclusion to 1 on the right.

    The half-width X(y) equals the true gap half-width for |y| <= L and
    continues tangentially (capped at the cell half-width) beyond, which
    keeps |X'| bounded and the extension energy O(1) uniformly in eps.  By
    convexity the inclusion boundaries stay inside the clamped plateaus, so
    psi is exactly 0 on the left boundary and 1 on the right one.
    """

    geom: GapGeometry
    f_edge: float = field(init=False)
    fprime_edge: float = field(init=False)

    def __post_init__(self) -> None:
        L = np.asarray([self.geom.L])
        object.__setattr__(self, "f_edge", float(gap_halfwidth(self.geom, L)[0]))
        object.__setattr__(self, "fprime_edge", float(gap_halfwidth_deriv(self.geom, L)[0]))

    def halfwidth(self, y) -> np.ndarray:
        ay = np.abs(np.asarray(y, dtype=float))
        L = self.geom.L
        inner = gap_halfwidth(self.geom, np.minimum(ay, L))
        outer = self.f_edge + self.fprime_edge * (ay - L)
        return np.where(ay <= L, inner, np.minimum(outer, self.geom.L1))

    def halfwidth_deriv(self, y) -> np.ndarray:
        yy = np.asarray(y, dtype=float)
        ay = np.abs(yy)
        L = self.geom.L
        inner = gap_halfwidth_deriv(self.geom, np.minimum(ay, L))
        outer = np.where(self.f_edge + self.fprime_edge * (ay - L) < self.geom.L1,
                         self.fprime_edge, 0.0)
        return np.sign(yy) * np.where(ay <= L, inner, outer)

    def psi(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        X = self.halfwidth(pts[..., 1])
        return np.clip((pts[..., 0] + X) / (2.0 * X), 0.0, 1.0)

    def grad_psi(self, points: np.ndarray) -> np.ndarray:
        """Gradient of psi, shape (..., 2); zero in the clamped plateaus."""
        pts = np.asarray(points, dtype=float)
        x = pts[..., 0]
        X = self.halfwidth(pts[..., 1])
        Xp = self.halfwidth_deriv(pts[..., 1])
        in_band = np.abs(x) < X
        gx = np.where(in_band, 1.0 / (2.0 * X), 0.0)
        gy = np.where(in_band, -x * Xp / (2.0 * X * X), 0.0)
        return np.stack((gx, gy), axis=-1)


def keller_test_gradient(prof: KellerProfile, j: int, points: np.ndarray) -> Matrix2:
    """Displacement gradient of the vector test field psi * e_j."""
    g = prof.grad_psi(points)
    zero = np.zeros_like(g[..., 0])
    if j == 1:
        return Matrix2(g[..., 0], g[..., 1], zero, zero)
    if j == 2:
        return Matrix2(zero, zero, g[..., 0], g[..., 1])
    raise ValueError(f"j must be 1 or 2, got {j}")


@dataclass(frozen=True)
class Diagnostics:
    asymmetry_max: float = 0.0
    bc_residual: float = 0.0
    div_residual: float = 0.0


@dataclass(frozen=True)
class BoundResult:
    j: int
    kind: str
    value: float
    quadrature_err: float
    diagnostics: Diagnostics
    converged: bool = True
    terms: Mapping[str, float] | None = None


def primal_upper(geom: GapGeometry, mat: LameMaterial, j: int,
                 spec: QuadratureSpec | None = None) -> BoundResult:
    """Stiffness form on the Keller test field: an upper value for the
    corresponding gap energy up to the reported quadrature error."""
    if spec is None:
        spec = QuadratureSpec.for_cell()
    prof = KellerProfile(geom)

    def integrand(pts: np.ndarray) -> np.ndarray:
        return energy_density(keller_test_gradient(prof, j, pts), mat)

    res = integrate_cell(geom, integrand, spec)
    return BoundResult(
        j=j,
        kind="upper",
        value=float(res.value),
        quadrature_err=res.err_estimate,
        diagnostics=Diagnostics(),
        converged=res.converged,
    )


# ---------------------------------------------------------------------------
# dual side
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GTable:
    """Cumulative integral of the edge traction jump, with exact slopes.

    Nodes carry the exact integrand values, so the cubic Hermite
    interpolant's derivative reproduces the integrand to interpolation
    accuracy; that keeps the finite-difference divergence of the correction
    field at the interpolation-error level instead of the spline-knot level.
    """

    nodes: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    err_estimate: float
    spline: CubicHermiteSpline

    def __call__(self, x) -> np.ndarray:
        return self.spline(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class DualStress:
    j: int
    m_j: float
    sigma_S: StressField
    sigma_c: StressField
    sigma_total: StressField
    G_cache: GTable
    diagnostics: Diagnostics


def _edge_traction_gap(sig_S_sym: Callable[[np.ndarray], SymTensor2],
                       L2: float) -> Callable[[np.ndarray], np.ndarray]:
    def fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        top = sig_S_sym(np.stack((x, np.full_like(x, L2)), axis=-1))
        bot = sig_S_sym(np.stack((x, np.full_like(x, -L2)), axis=-1))
        jump11 = top.apply(_E2) - bot.apply(_E2)
        return jump11 / (2.0 * L2)
    return fn


def build_dual_stress(geom: GapGeometry, mat: LameMaterial, j: int,
                      spec: QuadratureSpec | None = None) -> DualStress:
    """Assemble the admissible dual stress for load j.

    The singular part is the pair field scaled by m_j/sqrt(eps).  The
    correction has first column G(x) (the tabulated cumulative traction
    jump across the horizontal edges) and second column F(x, y), the linear
    interpolant in y of minus the edge tractions, so that the total traction
    vanishes identically on y = +-L2 and each row stays divergence free.
    """
    mj = m_constant(geom, mat, j)
    scale = mj / np.sqrt(geom.eps)
    ctx = KernelContext.from_geometry(geom, mat)
    L1, L2 = geom.L1, geom.L2

    def sig_S_sym(pts: np.ndarray) -> SymTensor2:
        s = singular_stress(ctx, j, pts)
        return SymTensor2(scale * s.a11, scale * s.a12, scale * s.a22)

    def sigma_S(pts: np.ndarray) -> Matrix2:
        return sig_S_sym(pts).as_matrix()

    gap_fn = _edge_traction_gap(sig_S_sym, L2)
    tab_tol = 1e-10 if spec is None else min(1e-10, spec.rel_tol)
    nodes, values, slopes, tab_err = cumulative_line_table(
        gap_fn, -L1, L1, anchor=0.0, rel_tol=tab_tol, max_width=L1 / 128.0)
    spline = CubicHermiteSpline(nodes, values, slopes)
    gtab = GTable(nodes=nodes, values=values, slopes=slopes,
                  err_estimate=tab_err, spline=spline)

    def sigma_c(pts: np.ndarray) -> Matrix2:
        pts = np.asarray(pts, dtype=float)
        x = pts[..., 0]
        y = pts[..., 1]
        G = spline(x)
        top = sig_S_sym(np.stack((x, np.full_like(x, L2)), axis=-1)).apply(_E2)
        bot = sig_S_sym(np.stack((x, np.full_like(x, -L2)), axis=-1)).apply(_E2)
        wt_top = ((y + L2) / (2.0 * L2))[..., None]
        wt_bot = ((L2 - y) / (2.0 * L2))[..., None]
        F = -(wt_top * top + wt_bot * bot)
        return Matrix2(G[..., 0], F[..., 0], G[..., 1], F[..., 1])

    def sigma_total(pts: np.ndarray) -> Matrix2:
        s = sig_S_sym(pts)
        c = sigma_c(pts)
        return Matrix2(s.a11 + c.a11, s.a12 + c.a12, s.a12 + c.a21, s.a22 + c.a22)

    diag = _dual_diagnostics(geom, sigma_total, sigma_c, ctx)
    return DualStress(j=j, m_j=mj, sigma_S=sigma_S, sigma_c=sigma_c,
                      sigma_total=sigma_total, G_cache=gtab, diagnostics=diag)


def _dual_diagnostics(geom: GapGeometry, sigma_total: StressField,
                      sigma_c: StressField, ctx: KernelContext) -> Diagnostics:
    L1, L2 = geom.L1, geom.L2

    # traction on the horizontal edges, built to cancel exactly
    xs = np.linspace(-L1, L1, 100)
    bc = 0.0
    for ysign in (L2, -L2):
        pts = np.stack((xs, np.full_like(xs, ysign)), axis=-1)
        s = sigma_total(pts)
        tr = np.stack((s.a12, s.a22), axis=-1)
        bc = max(bc, float(np.abs(tr).max()))

    # matrix sample grid for divergence and asymmetry checks
    gx, gy = np.meshgrid(np.linspace(-L1 * 0.995, L1 * 0.995, 41),
                         np.linspace(-L2 * 0.995, L2 * 0.995, 41), indexing="ij")
    pts = np.stack((gx.ravel(), gy.ravel()), axis=-1)
    pts = pts[region_classify(geom, pts) == int(Region.MATRIX)]

    sc = sigma_c(pts)
    asym = float(np.abs(sc.a12 - sc.a21).max())

    # central differences with a step tied to the distance from the poles,
    # which keeps truncation and rounding both far below the target
    d1 = np.linalg.norm(pts - ctx.p1, axis=-1)
    d2 = np.linalg.norm(pts - ctx.p2, axis=-1)
    h = 6e-6 * np.minimum(d1, d2)
    ex = np.stack((h, np.zeros_like(h)), axis=-1)
    ey = np.stack((np.zeros_like(h), h), axis=-1)
    sxp, sxm = sigma_total(pts + ex), sigma_total(pts - ex)
    syp, sym_ = sigma_total(pts + ey), sigma_total(pts - ey)
    inv2h = 1.0 / (2.0 * h)
    d_col1_dx = np.stack(((sxp.a11 - sxm.a11) * inv2h, (sxp.a21 - sxm.a21) * inv2h), axis=-1)
    d_col2_dy = np.stack(((syp.a12 - sym_.a12) * inv2h, (syp.a22 - sym_.a22) * inv2h), axis=-1)
    resid = np.abs(d_col1_dx + d_col2_dy).max(axis=-1)
    # normalize by the local derivative magnitude across both rows; a single
    # row's terms can vanish together on symmetry lines, where a rowwise
    # ratio would just compare rounding noise with itself
    scale = (np.abs(d_col1_dx) + np.abs(d_col2_dy)).max(axis=-1)
    scale = np.maximum(scale, 1e-30 * float(scale.max()) + 1e-300)
    div = float((resid / scale).max())
    return Diagnostics(asymmetry_max=asym, bc_residual=bc, div_residual=div)


def dual_lower(geom: GapGeometry, mat: LameMaterial, j: int,
               spec: QuadratureSpec | None = None,
               path_spec: QuadratureSpec | None = None,
               dual: DualStress | None = None) -> BoundResult:
    """Dual functional on the assembled stress: a lower value for the energy.

    The returned terms decompose the value exactly: ``I`` is the functional
    on the singular part alone, ``II`` on the correction alone, and
    ``cross`` is minus twice the compliance pairing between them.
    """
    if spec is None:
        spec = QuadratureSpec.for_cell()
    if path_spec is None:
        path_spec = QuadratureSpec.for_path()
    if dual is None:
        dual = build_dual_stress(geom, mat, j, spec)

    q_ss = integrate_cell(geom, lambda p: compliance_energy(dual.sigma_S(p), mat), spec)
    q_cc = integrate_cell(geom, lambda p: compliance_energy(dual.sigma_c(p), mat), spec)
    q_sc = integrate_cell(
        geom, lambda p: compliance_contract(dual.sigma_S(p), dual.sigma_c(p), mat), spec)

    gamma_plus = boundary_curves(geom)["gamma_plus"]

    def traction_j(field: StressField):
        def fn(p: np.ndarray, n: np.ndarray) -> np.ndarray:
            return field(p).apply(n)[..., j - 1]
        return fn

    lin_s = integrate_path(gamma_plus, traction_j(dual.sigma_S), path_spec)
    lin_c = integrate_path(gamma_plus, traction_j(dual.sigma_c), path_spec)

    term_i = -q_ss.value + 2.0 * lin_s.value
    term_ii = -q_cc.value + 2.0 * lin_c.value
    cross = -2.0 * q_sc.value
    value = term_i + term_ii + cross
    qerr = (q_ss.err_estimate + q_cc.err_estimate + 2.0 * q_sc.err_estimate
            + 2.0 * lin_s.err_estimate + 2.0 * lin_c.err_estimate
            + dual.G_cache.err_estimate)
    converged = all(r.converged for r in (q_ss, q_cc, q_sc, lin_s, lin_c))
    return BoundResult(
        j=j,
        kind="lower",
        value=float(value),
        quadrature_err=float(qerr),
        diagnostics=dual.diagnostics,
        converged=converged,
        terms={
            "I": float(term_i),
            "II": float(term_ii),
            "cross": float(cross),
            "quad_singular": float(q_ss.value),
            "quad_correction": float(q_cc.value),
            "quad_cross": float(q_sc.value),
            "boundary_singular": float(lin_s.value),
            "boundary_correction": float(lin_c.value),
        },
    )


# ---------------------------------------------------------------------------
# identity checks on the singular pair field
# ---------------------------------------------------------------------------


def flux_identity_check(geom: GapGeometry, mat: LameMaterial, i: int, j: int,
                        k: int, spec: QuadratureSpec | None = None) -> float:
    """Traction flux of the pair field q_j through one inclusion boundary.

    The normal points out of the matrix region (into the inclusion); the
    exact value is (-1)^i * delta_jk.
    """
    if spec is None:
        spec = QuadratureSpec.for_path()
    ctx = KernelContext.from_geometry(geom, mat)
    curve = inclusion_boundary(geom, i)

    def fn(p: np.ndarray, n: np.ndarray) -> np.ndarray:
        return singular_stress(ctx, j, p).apply(n)[..., k - 1]

    return float(integrate_path(curve, fn, spec).value)


def energy_identity_check(geom: GapGeometry, mat: LameMaterial, j: int,
                          spec: QuadratureSpec | None = None) -> float:
    """Work integral of the pair field over both inclusion boundaries.

    Approximates the matrix energy of q_j; the normalized combination
    m_j * result / sqrt(eps) tends to 1 as the gap closes.
    """
    if spec is None:
        spec = QuadratureSpec.for_path()
    ctx = KernelContext.from_geometry(geom, mat)
    total = 0.0
    for i in (1, 2):
        curve = inclusion_boundary(geom, i)

        def fn(p: np.ndarray, n: np.ndarray) -> np.ndarray:
            tr = singular_stress(ctx, j, p).apply(n)
            u = singular_displacement(ctx, j, p)
            return np.einsum("...k,...k->...", tr, u)

        total += integrate_path(curve, fn, spec).value
    return float(total)
