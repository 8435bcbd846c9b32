"""Primal and dual energy bounds on the gap cell."""
from __future__ import annotations

import math

import numpy as np
import pytest

from gapstress import (
    KellerProfile,
    LameMaterial,
    Region,
    build_dual_stress,
    dual_lower,
    energy_identity_check,
    flux_identity_check,
    keller_test_gradient,
    m_constant,
    primal_upper,
    region_classify,
)

from conftest import CELL_COARSE, CELL_FAST, PATH_FAST, UNIT, disk_geometry


def test_m_constants_unit_disk():
    g = disk_geometry(1e-3)
    assert m_constant(g, UNIT, 1) == pytest.approx(3.0 * math.pi, rel=1e-14)
    assert m_constant(g, UNIT, 2) == pytest.approx(math.pi, rel=1e-14)
    with pytest.raises(ValueError):
        m_constant(g, UNIT, 3)


def test_m_constant_curvature_scaling():
    g1 = disk_geometry(1e-3, r0=1.0, L2=1.5)
    g2 = disk_geometry(1e-3, r0=2.0, L2=3.0)
    assert m_constant(g2, UNIT, 2) / m_constant(g1, UNIT, 2) == pytest.approx(
        math.sqrt(2.0), rel=1e-14
    )


class TestKellerProfile:
    def test_center_gradient(self):
        g = disk_geometry(0.01)
        prof = KellerProfile(g)
        grad = prof.grad_psi(np.array([[0.0, 0.0]]))
        assert grad[0, 0] == pytest.approx(1.0 / g.eps, rel=1e-13)
        assert grad[0, 1] == pytest.approx(0.0, abs=1e-13)
        assert prof.psi(np.array([[0.0, 0.0]]))[0] == pytest.approx(0.5, rel=1e-13)

    def test_plateaus(self):
        g = disk_geometry(0.01)
        prof = KellerProfile(g)
        pts = np.array([[0.9, 0.0], [-0.9, 0.0], [0.9, 1.2], [-0.9, -1.2]])
        psi = prof.psi(pts)
        assert psi[0] == 1.0 and psi[2] == 1.0
        assert psi[1] == 0.0 and psi[3] == 0.0
        assert np.all(prof.grad_psi(pts) == 0.0)

    def test_profile_range_and_continuity(self):
        g = disk_geometry(0.01)
        prof = KellerProfile(g)
        y = np.linspace(-g.L2 * 0.999, g.L2 * 0.999, 4001)
        X = prof.halfwidth(y)
        assert np.all(X >= g.eps / 2.0 - 1e-15)
        assert np.all(X <= g.L1 + 1e-15)
        jumps = np.abs(np.diff(X))
        assert jumps.max() <= 2.0 * (y[1] - y[0])

    def test_psi_bounded(self):
        g = disk_geometry(0.01)
        prof = KellerProfile(g)
        rng = np.random.default_rng(2)
        pts = rng.uniform([-g.L1, -g.L2], [g.L1, g.L2], size=(2000, 2))
        psi = prof.psi(pts)
        assert np.all(psi >= 0.0) and np.all(psi <= 1.0)

    def test_test_gradient_rows(self):
        g = disk_geometry(0.01)
        prof = KellerProfile(g)
        pts = np.array([[0.0, 0.1], [0.001, -0.2]])
        g1 = keller_test_gradient(prof, 1, pts)
        assert np.all(g1.a21 == 0.0) and np.all(g1.a22 == 0.0)
        g2 = keller_test_gradient(prof, 2, pts)
        assert np.all(g2.a11 == 0.0) and np.all(g2.a12 == 0.0)
        assert np.array_equal(g1.a11, g2.a21)


@pytest.mark.parametrize("j,band", [(1, (0.90, 1.02)), (2, (0.95, 1.05))])
def test_primal_upper_near_flux_constant(j, band):
    g = disk_geometry(1e-3)
    res = primal_upper(g, UNIT, j, spec=CELL_FAST)
    scaled = res.value * math.sqrt(g.eps) / m_constant(g, UNIT, j)
    assert band[0] <= scaled <= band[1]
    assert res.converged
    assert res.quadrature_err <= 1e-3 * res.value


def test_primal_upper_decreases_as_gap_opens():
    v_wide = primal_upper(disk_geometry(1e-2), UNIT, 1, spec=CELL_FAST).value
    v_narrow = primal_upper(disk_geometry(1e-3), UNIT, 1, spec=CELL_FAST).value
    assert v_wide < v_narrow


def test_primal_upper_curvature_scaling():
    # halving the gap curvature raises the scaled bound by sqrt(2)
    eps = 1e-3
    v1 = primal_upper(disk_geometry(eps, r0=1.0, L2=3.0), UNIT, 2, spec=CELL_FAST).value
    v2 = primal_upper(disk_geometry(eps, r0=2.0, L2=3.0), UNIT, 2, spec=CELL_FAST).value
    assert v2 / v1 == pytest.approx(math.sqrt(2.0), rel=0.04)


def test_primal_upper_j2_lambda_dependence_fades():
    # the leading j=2 coefficient is a shear quantity; the lambda imprint is
    # a subleading effect and must shrink with the gap
    gaps = {}
    for eps in (1e-3, 1e-4):
        vals = [
            primal_upper(disk_geometry(eps), LameMaterial(lam=lam, mu=1.0), 2, spec=CELL_FAST).value
            * math.sqrt(eps)
            for lam in (1.0, 5.0)
        ]
        gaps[eps] = abs(vals[1] - vals[0])
        for v in vals:
            assert v == pytest.approx(math.pi, rel=0.05)
    assert gaps[1e-4] < 0.5 * gaps[1e-3]


@pytest.mark.parametrize("j", [1, 2])
def test_dual_stress_construction(j):
    g = disk_geometry(1e-3)
    dual = build_dual_stress(g, UNIT, j)
    assert dual.diagnostics.bc_residual <= 1e-12
    assert 0.0 < dual.diagnostics.asymmetry_max < 1.0
    assert dual.diagnostics.div_residual <= 1e-6

    # correction field is built divergence free: d1 G + d2 F = 0
    rng = np.random.default_rng(7)
    pts = rng.uniform([-g.L1 * 0.9, -g.L2 * 0.9], [g.L1 * 0.9, g.L2 * 0.9], size=(200, 2))
    pts = pts[region_classify(g, pts) == Region.MATRIX][:60]
    h = 1e-6
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    px, mx = dual.sigma_c(pts + ex), dual.sigma_c(pts - ex)
    py, my = dual.sigma_c(pts + ey), dual.sigma_c(pts - ey)
    r1 = (px.a11 - mx.a11) / (2 * h) + (py.a12 - my.a12) / (2 * h)
    r2 = (px.a21 - mx.a21) / (2 * h) + (py.a22 - my.a22) / (2 * h)
    scale = max(
        np.abs(dual.sigma_c(pts).a11).max(), np.abs(dual.sigma_c(pts).a12).max(), 1e-12
    )
    assert np.abs(r1).max() <= 1e-4 * scale
    assert np.abs(r2).max() <= 1e-4 * scale


def test_dual_stress_cancels_edge_traction():
    g = disk_geometry(1e-3)
    dual = build_dual_stress(g, UNIT, 1)
    x = np.linspace(-g.L1, g.L1, 101)
    for ysign in (g.L2, -g.L2):
        pts = np.stack((x, np.full_like(x, ysign)), axis=-1)
        tot = dual.sigma_total(pts)
        traction = np.stack((tot.a12, tot.a22), axis=-1)
        sing = dual.sigma_S(pts)
        scale = max(np.abs(sing.a12).max(), np.abs(sing.a22).max())
        assert np.abs(traction).max() <= 1e-10 * scale


def test_dual_correction_magnitude_stable_across_sweep():
    maxima = []
    for eps in (1e-2, 1e-3, 1e-4, 1e-5):
        g = disk_geometry(eps)
        dual = build_dual_stress(g, UNIT, 1)
        grid = np.stack(
            np.meshgrid(
                np.linspace(-g.L1 * 0.98, g.L1 * 0.98, 41),
                np.linspace(-g.L2 * 0.98, g.L2 * 0.98, 41),
            ),
            axis=-1,
        ).reshape(-1, 2)
        grid = grid[region_classify(g, grid) == Region.MATRIX]
        sc = dual.sigma_c(grid)
        maxima.append(
            max(np.abs(sc.a11).max(), np.abs(sc.a12).max(), np.abs(sc.a21).max(), np.abs(sc.a22).max())
        )
    assert max(maxima) / min(maxima) <= 2.0


@pytest.mark.parametrize("j,lo", [(1, 0.90), (2, 0.95)])
def test_dual_lower_near_flux_constant(j, lo):
    g = disk_geometry(1e-3)
    res = dual_lower(g, UNIT, j, spec=CELL_COARSE, path_spec=PATH_FAST)
    scaled = res.value * math.sqrt(g.eps) / m_constant(g, UNIT, j)
    assert lo <= scaled <= 1.02
    assert res.converged


@pytest.mark.parametrize("j", [1, 2])
def test_bounds_sandwich(j):
    g = disk_geometry(1e-3)
    up = primal_upper(g, UNIT, j, spec=CELL_FAST)
    lo = dual_lower(g, UNIT, j, spec=CELL_COARSE, path_spec=PATH_FAST)
    assert lo.value - lo.quadrature_err <= up.value + up.quadrature_err
    assert lo.value <= up.value


@pytest.mark.parametrize("j", [1, 2])
def test_dual_term_decomposition(j):
    g = disk_geometry(1e-3)
    res = dual_lower(g, UNIT, j, spec=CELL_COARSE, path_spec=PATH_FAST)
    t = res.terms
    total = t["I"] + t["II"] + t["cross"]
    assert res.value == pytest.approx(total, rel=1e-12)
    m = m_constant(g, UNIT, j)
    assert t["I"] * math.sqrt(g.eps) / m == pytest.approx(1.0, abs=0.1)
    # the correction contribution stays O(1) while I grows like 1/sqrt(eps)
    assert abs(t["II"]) <= 0.05 * abs(t["I"])
    assert abs(t["cross"]) <= 0.05 * abs(t["I"])


@pytest.mark.parametrize(
    "i,j,k,expected",
    [
        (2, 1, 1, 1.0),
        (2, 2, 2, 1.0),
        (1, 1, 1, -1.0),
        (1, 2, 2, -1.0),
        (2, 1, 2, 0.0),
        (1, 2, 1, 0.0),
    ],
)
def test_flux_identity(i, j, k, expected):
    g = disk_geometry(1e-3)
    got = flux_identity_check(g, UNIT, i, j, k)
    assert got == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("j", [1, 2])
def test_energy_identity_normalization(j):
    g = disk_geometry(1e-3)
    raw = energy_identity_check(g, UNIT, j)
    assert raw > 0.0
    normalized = m_constant(g, UNIT, j) * raw / math.sqrt(g.eps)
    assert normalized == pytest.approx(1.0, abs=0.1)
