"""vbcast: virtual broadcasting maps and their numerical toolkit.

Hermitian-preserving trace-preserving maps around the canonical virtual
broadcaster B(rho) = (1/2){rho (x) I, SWAP}: construction, axiom checks,
uniqueness certificates, diamond-norm bounds, Haar-moment machinery,
states over time, and quasi-probability sampling.
"""

__version__ = "0.1.0"

from .densemat import (  # noqa: F401
    Operator,
    Rng,
    eigh,
    haar_unitary,
    identity,
    kron,
    partial_trace,
    random_density,
    random_hermitian,
    random_pure,
    swap,
    trace_norm,
)
from .supermap import (  # noqa: F401
    AffineDecomposition,
    SuperMap,
    apply_left,
    apply_right,
    omega,
    random_channel,
)
from .broadcast import (  # noqa: F401
    AxiomReport,
    UniquenessCertificate,
    antisym,
    canonical_b,
    canonical_decomposition,
    check_axioms,
    classical_bcl,
    cloner,
    decoherence,
    family_b_lambda,
    verify_uniqueness,
)
from .diamond import (  # noqa: F401
    DiamondResult,
    SdpConfig,
    closest_channel_scan,
    diamond_lower_search,
    diamond_sdp,
    hptp_upper,
)
from .mcstats import (  # noqa: F401
    MatrixSamplingEstimate,
    MatrixWelford,
    SamplingEstimate,
)
from .hovm import (  # noqa: F401
    FiniteHOVM,
    MomentOperator,
    depolarizing_mp,
    exact_mp_map,
    mc_mp_apply,
    moment_operator,
    theorem3_weight,
    verify_theorem3,
)
from .sot import (  # noqa: F401
    SotAxiomReport,
    StateOverTime,
    check_postprocessing_equivalence,
    check_sot_axioms,
    star,
)
from .qsample import (  # noqa: F401
    QuasiSampler,
    estimate_expectation,
    estimate_with_trace,
    overhead,
    sampler_from_decomposition,
)
