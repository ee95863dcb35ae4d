"""Semi-inner-products of smooth norms and adjoint abelian operators."""

from .auerbach import AuerbachBasis, auerbach_search
from .checker import (
    Sampler,
    TheoremReport,
    adjoint_abelian_residual,
    check_direct_sum,
    check_isometry,
    check_transversal_normal,
    lemma_decomposition_residual,
    power_identity_residual,
    verify_theorem,
)
from .errors import DimensionMismatch, InvalidInput, NumericalFailure
from .geometry import (
    ellipse_fit_residual,
    lipschitz_scan,
    make_frame,
    ode_residual,
    section_point,
    uniform_continuity_probe,
)
from .norms import NormSpec, build_direct_sum, norm_eval, norm_gradient, parse_norm
from .sip import sip_axiom_report, sip_eval
from .spectral import SpectralData, component_of, spectral_decompose

__version__ = "0.1.0"
