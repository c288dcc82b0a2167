"""Approximation theory of linear dilated temporal convolutional networks.

Effective filters, tensorization and HOSVD of filters, the spectral and
memory complexity measures, optimal truncated approximants realized as
network weights, and checks of the forward and inverse rate bounds.
"""
from .sequence import (
    FunctionalKernel,
    VectorSeq,
    apply_functional,
    dilated_convolve,
    functional_error_norm,
    gaussian_mse,
    kernel_l2_distance,
    worst_case_input,
)
from .network import (
    ConvNetParams,
    effective_filter,
    forward,
    from_rank_one_terms,
    impulse_response,
)
from .tensor import (
    detensorize,
    fold,
    frobenius,
    mode_product,
    outer_product,
    tensorize,
    unfold,
)
from .hosvd import HosvdResult, Spectrum, hosvd, reconstruct, spectrum, svd, truncate
from .complexity import (
    ComplexityReport,
    DecayEnvelope,
    c1_estimate,
    c2_estimate,
    complexity_report,
    memory_tail,
    spectral_tail,
)
from .bounds import (
    BernsteinEstimate,
    JacksonPoint,
    bernstein_estimate,
    jackson_approximate,
    verify_bernstein,
    verify_jackson,
)
from .targets import TargetSpec, generate

__version__ = "0.1.0"
