"""Taylor expansion of the Gaussian heat kernel through Hermite projection
kernels, with the supporting special functions and a fast Gauss summation
engine built on the separable form of the expansion."""

from .caloric import (
    CaloricPolynomial,
    appell_conjugation_residual,
    appell_transform,
    caloric_table,
    heat_operator_apply,
    poly_eval,
    q_alpha,
    q_alpha_value,
)
from .fastsum import (
    MomentTable,
    choose_degree,
    compute_moments,
    direct_sum,
    evaluate_targets,
    fast_gauss_sum,
)
from .heat_kernel import (
    ExpansionResult,
    QuadSpec,
    SpaceTimePoint,
    appell_image_table,
    gaussian_backward,
    gaussian_forward,
    heat_representation_residual,
    proof_substitution_adaptive,
    proof_substitution_closed,
    proof_substitution_partial,
    spacetime_bump,
    taylor_adaptive,
    taylor_partial,
    taylor_terms,
    hermite_kernel_series,
)
from .hermite import (
    HermiteSequence,
    MultiIndex,
    graded_indices,
    hermite_function_sequence,
    hermite_function_table,
    hermite_poly_coeffs,
    multi_indices,
    phi_alpha,
)
from .laplace import (
    PolarQuadSpec,
    TestFunction,
    ZonalQuery,
    gamma_laplace,
    kelvin_conjugation_residual,
    kelvin_transform,
    laplace_representation_residual,
    laplace_series_partial,
    laplace_series_terms,
    radial_bump,
    zonal,
    zonal_kernel,
)
from .projection import (
    MehlerQuery,
    gauss_hermite,
    gram_matrix,
    hermite_operator_residual,
    mehler_adaptive,
    mehler_closed,
    mehler_partial,
    phi_k_kernel,
    phi_k_kernels,
    project_component,
)

__version__ = "0.1.0"
