"""Correlation properties of bipartite quantum states and their unitary-invariant versions."""

from .absolute import (
    AbsoluteVerdict,
    Property,
    absolutely_classical_cc,
    absolutely_classical_cq,
    absolutely_classical_qc,
    absolutely_local,
    absolutely_nonneg_cond_entropy,
    absolutely_ppt,
    absolutely_product,
    absolutely_separable_2xn,
    absolutely_unsteerable3,
    absolutely_unsteerable3_exact,
    absolutely_zero_discord,
    absolutely_zero_super_discord,
    falsify_absolute,
    necessary_family_step1,
)
from .criteria import (
    Classicality,
    CriterionVerdict,
    FanoBlochForm,
    chsh_max,
    classify_ccq,
    correlation_tensor,
    fano_bloch,
    is_ppt,
    is_product,
    is_separable_pure,
    kcbs_projectors,
    kcbs_value,
    product_conditions,
    steerable_three,
    steering_value,
    zero_discord_blocks,
    zero_discord_dakic,
    zero_super_discord,
)
from .discord import WeakMeasurementPair, discord_numeric, super_discord_at, weak_measure
from .entropy import (
    EntropyReport,
    conditional_entropy,
    entropy_report,
    mutual_information,
    shannon,
    von_neumann,
)
from .errors import *  # noqa: F401,F403
from .linalg import Spectrum, hermitian_eig, partial_trace, partial_transpose, tensor
from .report import (
    PropertyReport,
    ThresholdResult,
    absolute_hierarchy_audit,
    analyze,
    bisect_threshold,
    hierarchy_audit,
)
from .settings import DEFAULT_TOLERANCES, Tolerances, make_rng
from .states import (
    DensityMatrix,
    UnitaryMatrix,
    bell,
    bell_diagonal,
    cartan_core,
    conjugate,
    gisin,
    haar_unitary,
    load_state,
    make_density,
    maximally_mixed,
    pure_state,
    random_density,
    random_spectrum,
    werner,
    weyl,
)

__version__ = "0.1.0"
