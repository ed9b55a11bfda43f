from .errors import InputError, LabError, MappingError, PreconditionError
from .iteration import (
    afps_extract,
    ar_bound,
    averaged_map,
    check_ar_soundness,
    orbit,
    residual_at,
    residuals_at,
    verify_identity3,
    verify_residual_monotonicity,
)
from .ledger import (
    LEDGER,
    lemma33_region_check,
    lemma41_chain_check,
    lemma_zn_param_check,
    przs_chain_check,
    sweep,
    thm21_constants_check,
)
from .mappings import (
    ZOO,
    apply,
    check_condition_C_lambda,
    check_condition_L_witness,
    check_nonexpansive,
    evaluate,
    get_map,
    rescale_map,
)
from .models import (
    BlockSequenceModel,
    ConditionReport,
    ConvexBody,
    EntailmentReport,
    Functional,
    MappingSpec,
    ModulusEstimate,
    NormKind,
    OrbitTrace,
    SpaceDescriptor,
    Vector,
)
from .moduli import (
    M_coefficient,
    R_modulus,
    RW_MW,
    eq43_cross_check,
    fixed_point_profile,
    james_constant,
    lemma41_equivalence,
    limit_norm,
    modulus_b,
    modulus_b1,
    modulus_d,
    nunc_witness,
)
from .space import (
    asymptotic_radius,
    body_diameter,
    contains,
    diameter,
    grid_points,
    norm,
    norming_functional,
    sample_body,
)
