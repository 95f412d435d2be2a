"""Rational electromagnetic knots on the three-sphere cylinder.

Builds the complete fixed-spin family of finite-action vacuum Maxwell
solutions from mode coefficients, evaluates the fields in both the cylinder
and flat frames, computes the fifteen conformal Noether charges against
their analytic reference tables, and traces knotted field lines.
"""
from .geometry import (
    CylinderPoint,
    MinkowskiEvent,
    QuadratureGrid,
    S3Point,
    apply_invariant_derivative,
    conformal_factor,
    cylinder_to_minkowski,
    embed,
    invariant_vector_field,
    jacobian,
    minkowski_to_cylinder,
    one_forms_minkowski,
    one_forms_polar,
    s3_quadrature,
    tetrad_t0,
)
from .harmonics import (
    HarmonicTable,
    SpinIndex,
    adjoint_harmonic,
    clebsch_gordan,
    gram_matrix,
    harmonic,
    harmonic_table,
)
from .knotfield import (
    CoefficientFileError,
    MinkowskiField,
    ModeCoefficients,
    SphereFrameField,
    XCoefficients,
    basis_function,
    hopfian_rotated_coefficients,
    hopfian_tt_coefficients,
    maxwell_residual,
    minkowski_fields,
    minkowski_fields_t0,
    rs_vector,
    sphere_frame_fields,
    x_coefficients,
    z_field,
)
from .charges import (
    ChargeReport,
    ChargeSet,
    DensitySample,
    angular_momentum,
    boost,
    charge_report,
    charge_set,
    density_sample,
    dilatation,
    energy,
    energy_closed,
    flat_space_energy_p3,
    momentum,
    momentum_sesquilinear,
    monte_carlo_energy_p3,
    reference_charges,
    sct_scalar,
    sct_vector,
    spherical_components,
)
from .symalg import (
    CoefficientOperator,
    Table4Diff,
    derive_d_action,
    diff_operators,
    rotation_covariance_check,
    table4_operator,
)
from .fieldlines import (
    Polyline,
    TraceRequest,
    ZeroFieldError,
    polyline_to_csv,
    polyline_to_json,
    seed_grid,
    trace,
)

__version__ = "0.1.0"
