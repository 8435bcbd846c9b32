"""Variational bounds for effective elastic moduli of densely packed
stiff-inclusion composites, with the gap-singular field machinery needed to
evaluate them."""

from .elasticity import (
    DerivedConstants,
    LameMaterial,
    Matrix2,
    SymTensor2,
    compliance_apply,
    compliance_contract,
    compliance_energy,
    derived_constants,
    energy_density,
    stress_from_gradient,
)
from .geometry import (
    Curve,
    Disk,
    Ellipse,
    GapGeometry,
    InclusionShape,
    PathSegment,
    Region,
    boundary_curves,
    gap_halfwidth,
    gap_halfwidth_deriv,
    inclusion_boundary,
    make_gap_geometry,
    rect_classify,
    rect_matrix_area,
    region_classify,
)
from .kernels import (
    KERNEL_NAMES,
    POLE_EXCLUSION_RADIUS,
    KernelContext,
    kelvin_matrix,
    kernel_displacement,
    kernel_gradient,
    singular_displacement,
    singular_gradient,
    singular_stress,
)
from .quadrature import (
    IntegralResult,
    QuadratureError,
    QuadratureSpec,
    cumulative_line_table,
    integrate_cell,
    integrate_path,
)
from .bounds import (
    BoundResult,
    Diagnostics,
    DualStress,
    KellerProfile,
    StressField,
    build_dual_stress,
    dual_lower,
    energy_identity_check,
    flux_identity_check,
    keller_test_gradient,
    m_constant,
    primal_upper,
)
from .pipeline import (
    CSV_HEADER,
    ConfigError,
    RunConfig,
    SeriesFit,
    SweepRow,
    VerificationError,
    compute_sweep_row,
    effective_moduli,
    fk_asymptotic,
    parse_config,
    rows_to_csv,
    run_verify,
    sweep_and_fit,
    write_csv,
)

__version__ = "0.1.0"
