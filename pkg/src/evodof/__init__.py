"""Two-user MISO broadcast channel with evolving CSIT: DoF regions,
multi-phase precoding schemes, and Monte Carlo exponent verification."""

from .quality import (
    ProfileError,
    ProfileSummary,
    QualityProfile,
    average_exponent,
    fractional_delay,
    load_profile,
    profile_from_dict,
    save_profile,
    summarize,
    validate_profile,
)
from .regions import (
    DofPoint,
    DofRegion,
    InfeasibleError,
    asymmetry_penalty,
    beta_threshold,
    contains,
    enumerate_vertices,
    outer_bound,
    region_asymmetric,
    region_imperfect_delayed,
    region_perfect_delayed,
    same_vertex_set,
    solve_max_delay,
    solve_min_quality,
)
from .schemes import (
    QuantizationLedger,
    SchemeConfig,
    SchemeError,
    SchemeKind,
    SlotAllocation,
    allocation,
    build_scheme,
    dof_finite,
    dof_limit,
    quantization_ledger,
    scheme_summary,
)
from .channel import (
    BlockRealization,
    quantize_interference,
    sample_block,
    sample_blocks,
)
from .measure import (
    ExponentMeasurement,
    rate_prelog_common,
    rate_prelog_mimo,
    rate_prelog_private,
    quantizer_residuals,
    term_exponents,
    transmit_power,
    verify_scheme,
)
from .lattice import (
    LatticeCodebook,
    build_codebook,
    decode_error_rate,
    min_coordinate_gap,
    min_product_distance,
    whitened_min_distance,
)

__version__ = "0.1.0"
