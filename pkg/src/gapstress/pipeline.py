"""Sweep orchestration: effective moduli, asymptotic comparison, CSV output.

A sweep evaluates both bounds for each (eps, j), converts the two gap
energies into effective-modulus intervals, and fits the bound series against
c1/sqrt(eps) + c0 to compare the fitted constants with the closed-form
leading coefficients.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    Diagnostics,
    build_dual_stress,
    dual_lower,
    m_constant,
    primal_upper,
)
from .elasticity import LameMaterial, derived_constants
from .geometry import Disk, Ellipse, GapGeometry, InclusionShape, make_gap_geometry
from .quadrature import QuadratureSpec

__all__ = [
    "ConfigError",
    "VerificationError",
    "RunConfig",
    "SweepRow",
    "SeriesFit",
    "CSV_HEADER",
    "parse_config",
    "effective_moduli",
    "fk_asymptotic",
    "compute_sweep_row",
    "sweep_and_fit",
    "rows_to_csv",
    "write_csv",
    "run_verify",
]

CSV_HEADER = ("eps,j,upper,lower,upper_scaled,lower_scaled,fk_constant,"
              "asymmetry_max,bc_residual,div_residual,quad_err")


class ConfigError(Exception):
    """Unusable run configuration (bad file, bad key, bad value)."""


class VerificationError(Exception):
    """One or more identity checks failed."""


@dataclass(frozen=True)
class RunConfig:
    material: LameMaterial
    shape: InclusionShape
    L2: float
    eps_list: tuple[float, ...]
    rel_tol_cell: float = 1e-6
    rel_tol_path: float = 1e-8
    out: str | None = None

    def __post_init__(self) -> None:
        if not self.eps_list:
            raise ConfigError("eps_list must not be empty")
        if any(e <= 0.0 for e in self.eps_list):
            raise ConfigError("every eps must be positive")
        ordered = tuple(sorted(set(self.eps_list), reverse=True))
        if ordered != tuple(self.eps_list):
            object.__setattr__(self, "eps_list", ordered)

    def cell_spec(self) -> QuadratureSpec:
        return QuadratureSpec.for_cell(rel_tol=self.rel_tol_cell)

    def path_spec(self) -> QuadratureSpec:
        return QuadratureSpec.for_path(rel_tol=self.rel_tol_path)


_REQUIRED_KEYS = {"lambda", "mu", "shape", "L2", "eps_list"}
_KNOWN_KEYS = _REQUIRED_KEYS | {"r0", "A", "B", "rel_tol_cell", "rel_tol_path", "out"}


def parse_config(path: str | Path) -> RunConfig:
    """Read a flat ``key = value`` file with # comments into a RunConfig."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        entries[key] = value

    missing = sorted(_REQUIRED_KEYS - entries.keys())
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")

    def as_float(key: str) -> float:
        try:
            return float(entries[key])
        except ValueError as exc:
            raise ConfigError(f"{path}: key {key!r} is not a number: {entries[key]!r}") from exc

    try:
        material = LameMaterial(lam=as_float("lambda"), mu=as_float("mu"))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    kind = entries["shape"].lower()
    try:
        if kind == "disk":
            if "r0" not in entries:
                raise ConfigError(f"{path}: shape=disk requires r0")
            shape: InclusionShape = Disk(r0=as_float("r0"))
        elif kind == "ellipse":
            if "A" not in entries or "B" not in entries:
                raise ConfigError(f"{path}: shape=ellipse requires A and B")
            shape = Ellipse(a=as_float("A"), b=as_float("B"))
        else:
            raise ConfigError(f"{path}: shape must be 'disk' or 'ellipse', got {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    eps_raw = entries["eps_list"].replace(",", " ").split()
    try:
        eps_list = tuple(float(tok) for tok in eps_raw)
    except ValueError as exc:
        raise ConfigError(f"{path}: eps_list is not a list of numbers") from exc

    cfg = RunConfig(
        material=material,
        shape=shape,
        L2=as_float("L2"),
        eps_list=eps_list,
        rel_tol_cell=as_float("rel_tol_cell") if "rel_tol_cell" in entries else 1e-6,
        rel_tol_path=as_float("rel_tol_path") if "rel_tol_path" in entries else 1e-8,
        out=entries.get("out"),
    )
    # build one geometry now so dimension errors surface as config errors
    try:
        make_gap_geometry(cfg.shape, cfg.eps_list[0], cfg.L2)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg


# ---------------------------------------------------------------------------
# moduli assembly
# ---------------------------------------------------------------------------


def effective_moduli(geom: GapGeometry, mat: LameMaterial,
                     e1_bounds: tuple[float, float],
                     e2_bounds: tuple[float, float]) -> dict[str, tuple[float, float]]:
    """Intervals for the effective extensional and shear moduli.

    E* carries the plane-strain prefactor times L1/L2; mu* only the aspect
    factor.  Bounds map monotonically, so intervals map to intervals.
    """
    dc = derived_constants(mat)
    aspect = geom.L1 / geom.L2
    ce = dc.prefactor * aspect
    return {
        "E_star": (ce * e1_bounds[0], ce * e1_bounds[1]),
        "mu_star": (aspect * e2_bounds[0], aspect * e2_bounds[1]),
    }


def fk_asymptotic(geom: GapGeometry, mat: LameMaterial) -> dict[str, float]:
    """Leading-order effective moduli of the dense-packing asymptotics."""
    dc = derived_constants(mat)
    aspect = geom.L1 / geom.L2
    lead = np.pi / (np.sqrt(geom.kappa0) * np.sqrt(geom.eps))
    return {
        "E_star_leading": dc.E * aspect * lead,
        "mu_star_leading": mat.mu * aspect * lead,
    }


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    eps: float
    j: int
    upper: float
    lower: float
    upper_scaled: float
    lower_scaled: float
    fk_constant: float
    modulus_interval: tuple[float, float]
    diagnostics: Diagnostics
    quad_err: float

    def csv_line(self) -> str:
        d = self.diagnostics
        vals = (self.eps, self.upper, self.lower, self.upper_scaled,
                self.lower_scaled, self.fk_constant, d.asymmetry_max,
                d.bc_residual, d.div_residual, self.quad_err)
        txt = [f"{vals[0]:.17g}", str(self.j)]
        txt += [f"{v:.17g}" for v in vals[1:]]
        return ",".join(txt)


def compute_sweep_row(cfg: RunConfig, eps: float, j: int) -> SweepRow:
    geom = make_gap_geometry(cfg.shape, eps, cfg.L2)
    cell_spec = cfg.cell_spec()
    path_spec = cfg.path_spec()
    up = primal_upper(geom, cfg.material, j, cell_spec)
    dual = build_dual_stress(geom, cfg.material, j, cell_spec)
    lo = dual_lower(geom, cfg.material, j, cell_spec, path_spec, dual)
    root = np.sqrt(eps)
    mj = m_constant(geom, cfg.material, j)
    interval_pair = effective_moduli(geom, cfg.material,
                                     (lo.value, up.value), (lo.value, up.value))
    key = "E_star" if j == 1 else "mu_star"
    return SweepRow(
        eps=eps,
        j=j,
        upper=up.value,
        lower=lo.value,
        upper_scaled=up.value * root,
        lower_scaled=lo.value * root,
        fk_constant=mj,
        modulus_interval=interval_pair[key],
        diagnostics=dual.diagnostics,
        quad_err=up.quadrature_err + lo.quadrature_err,
    )


def _row_worker(payload: tuple[RunConfig, float, int]) -> SweepRow:
    cfg, eps, j = payload
    return compute_sweep_row(cfg, eps, j)


@dataclass(frozen=True)
class SeriesFit:
    c1: float
    c0: float
    residual: float
    rel_dev: float


def _fit_series(eps: np.ndarray, values: np.ndarray, target: float) -> SeriesFit:
    design = np.stack((1.0 / np.sqrt(eps), np.ones_like(eps)), axis=-1)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = values - design @ coef
    rms = float(np.sqrt(np.mean(resid * resid)))
    c1 = float(coef[0])
    return SeriesFit(c1=c1, c0=float(coef[1]), residual=rms,
                     rel_dev=abs(c1 - target) / target)


def sweep_and_fit(cfg: RunConfig, workers: int = 1
                  ) -> tuple[list[SweepRow], dict[int, dict[str, SeriesFit]]]:
    """Compute all sweep rows (eps descending, j ascending) and fit both
    bound series per j against (1/sqrt(eps), 1)."""
    if len(cfg.eps_list) < 3:
        raise ConfigError("a sweep needs at least 3 gap widths for the fit")
    payloads = [(cfg, eps, j) for eps in cfg.eps_list for j in (1, 2)]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_worker, payloads))
    else:
        rows = [_row_worker(p) for p in payloads]

    fits: dict[int, dict[str, SeriesFit]] = {}
    for j in (1, 2):
        sel = [r for r in rows if r.j == j]
        eps = np.array([r.eps for r in sel])
        target = sel[0].fk_constant
        fits[j] = {
            "upper": _fit_series(eps, np.array([r.upper for r in sel]), target),
            "lower": _fit_series(eps, np.array([r.lower for r in sel]), target),
        }
    return rows, fits


def rows_to_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    lines += [r.csv_line() for r in rows]
    return "\n".join(lines) + "\n"


def write_csv(rows: list[SweepRow], path: str | Path) -> None:
    """Single-shot write so a failed sweep never leaves a partial file."""
    text = rows_to_csv(rows)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------


def run_verify(cfg: RunConfig, eps: float | None = None) -> list[str]:
    """Identity checks at one gap width; raises VerificationError on failure.

    Returns the per-check report lines (also useful for logging).  The flux
    identity is exact, the energy identity has an O(sqrt(eps)) correction,
    so its corridor is wider; the diagnostics thresholds match the dual
    construction guarantees.
    """
    from .bounds import energy_identity_check, flux_identity_check

    if eps is None:
        eps = cfg.eps_list[0]
    geom = make_gap_geometry(cfg.shape, eps, cfg.L2)
    path_spec = cfg.path_spec()
    lines: list[str] = []
    failures: list[str] = []

    def record(name: str, ok: bool, detail: str) -> None:
        status = "ok" if ok else "FAIL"
        lines.append(f"{status:4s} {name}: {detail}")
        if not ok:
            failures.append(name)

    for i in (1, 2):
        for j in (1, 2):
            for k in (1, 2):
                got = flux_identity_check(geom, cfg.material, i, j, k, path_spec)
                want = (-1.0) ** i * (1.0 if j == k else 0.0)
                err = abs(got - want)
                record(f"flux i={i} j={j} k={k}", err <= 1e-6,
                       f"value {got:+.9f}, expected {want:+.0f}, |err| {err:.2e}")

    for j in (1, 2):
        raw = energy_identity_check(geom, cfg.material, j, path_spec)
        mj = m_constant(geom, cfg.material, j)
        norm = mj * raw / np.sqrt(eps)
        record(f"energy identity j={j}", 0.9 <= norm <= 1.1 and raw > 0.0,
               f"normalized {norm:.6f} (raw {raw:.6e})")

    for j in (1, 2):
        dual = build_dual_stress(geom, cfg.material, j, cfg.cell_spec())
        d = dual.diagnostics
        record(f"edge traction j={j}", d.bc_residual <= cfg.rel_tol_path,
               f"max |sigma n| on y=+-L2 is {d.bc_residual:.2e}")
        record(f"divergence j={j}", d.div_residual <= 1e-5,
               f"relative residual {d.div_residual:.2e}")
        lines.append(f"info asymmetry j={j}: max |c12 - c21| = {d.asymmetry_max:.6f}")

    if failures:
        raise VerificationError(
            f"{len(failures)} verification check(s) failed: " + ", ".join(failures))
    return lines
