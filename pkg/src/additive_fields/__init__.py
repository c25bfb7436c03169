"""Additive stationary Gaussian fields and their excursion-set geometry.

Exact circulant-embedding sampling of the 1D component processes,
excursion masks and nodal-domain rendering of the induced planar fields,
percolation-style crossing analysis with machine-checked geometric
certificates, and the extreme-value limit theory the studies verify
against.
"""

from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    AdditiveFieldError,
    CertificateViolation,
    ConfigError,
    DomainError,
    EmptyMask,
    EmptySamples,
    IntervalOutOfRange,
    InvalidGrid,
    IoFailure,
    MixedInputs,
    NonEmbeddable,
    OutOfBounds,
)
from .extremes import (
    ExtremeSummary,
    GumbelRef,
    cw_bounds,
    exp_variance_ratio,
    gumbel_cdf,
    gumbel_shift,
    ks_distance,
    l_T,
    limit_at,
    limit_supinf,
    local_extrema_ppp,
    rescaled_sup,
    summarize,
    tail_decay,
)
from .field import (
    AdditiveField,
    ExcursionMask,
    area_fraction,
    excursion_mask,
    field_value,
    mask_from_bits,
    render_pgm,
)
from .harness import (
    ResultRow,
    run_blocking_study,
    run_crossing_scan,
    run_experiment,
    run_gumbel_study,
    run_render,
    run_slice3d_study,
    run_window_scan,
    wilson_interval,
)
from .kernels import (
    DAMPED_COSINE,
    GAUSSIAN,
    Grid1D,
    KernelSpec,
    breman_margin,
    circulant_eigenvalues,
    eval_kernel,
    lambda2,
    tau_scaling,
)
from .percolation import (
    LEFTRIGHT,
    TOPBOTTOM,
    BlockingCertificate,
    ComponentLabels,
    certificate_block_AT,
    certificate_ladder_Sn,
    certificate_path_BTh,
    find_blocking_rectangle,
    has_crossing,
    label_components,
    verify_blocking,
)
from .sampler import ProcessPath, derive_seed, empirical_covariance, sample_path

__version__ = "0.1.0"
