"""Affine arclength geometry of curves, geometric-inequality checks and weighted averaging operators."""

__version__ = "0.1.0"

from .boxes import IndicatorSet, box_union, overlap_volume
from .curves import (
    AffineImageCurve,
    BuiltinCurve,
    Curve,
    MonomialCurve,
    MonomialLikeCurve,
    Perturbation,
    PolynomialCurve,
    ReparamCurve,
    ReparamMap,
    affine_image,
    curve_from_dict,
    moment_curve,
    reparametrize,
)
from .errors import (
    AccuracyError,
    AffcurveError,
    ArityError,
    ComplexityError,
    DegenerateCurveError,
    DegenerateHullError,
    DomainError,
    InputError,
    OrderError,
    RangeError,
    ResolutionError,
    SingularTorsionError,
    UnsupportedOrderError,
    ZeroTorsionError,
)
from .geometry import (
    ArclengthParam,
    TorsionProfile,
    affine_density,
    check_nonvanishing,
    cumulative_arclength,
    jacobian_direct,
    jacobian_recursive,
    ratio_functions,
    torsion,
    torsion_profile,
    torsion_table,
)
from .gi import (
    ExpGainFit,
    GiReport,
    decompose_for_gi,
    elementary_exp_estimate,
    exp_gain_fit,
    exp_gain_ratios,
    gi_ratio,
    gi_ratios,
    gi_scan,
    operational_tau,
    tie_limit_probe,
)
from .hypotheses import (
    FunctionSamples,
    HypothesisReport,
    MonotoneReport,
    check_almost_log_concave,
    check_almost_monotone,
    check_B_log_concave,
    convex_hull_probe,
    hull_volume,
    monomial_B_exponent,
)
from .operators import (
    ExponentPair,
    RwtDiagnostics,
    WeightSpec,
    adjoint_pairing,
    apply_pointwise,
    knapp_pair,
    knapp_scales,
    pairing,
    rwt_diagnostics,
    rwt_ratio,
    xray_pairing,
)
from .poly import (
    DecompositionPiece,
    ExponentRegion,
    decompose,
    exponent_region,
    poly_torsion,
    real_parts_of_roots,
    roots_with_multiplicity,
    verify_comparability,
)
from .quadrature import QuadOpts, integrate_batch, quad
from .search import SearchReport, extremizer_search
from .xray import (
    InjectivityReport,
    XrayMapSpec,
    injectivity_probe,
    xray_gi_ratio,
    xray_gi_ratios,
    xray_jacobian,
    xray_jacobian_fd,
    xray_jacobian_matrix,
    xray_map,
    xray_rhs,
)
