"""Exact combinatorics of transfinite Schreier families, Tsirelson-type
implicit norms, and finite-horizon distortion witnesses."""

from .ordinals import ONE, OMEGA, Ordinal, ZERO, add, compare, finite, fundamental, omega_power
from .families import (
    A,
    BracketFamily,
    CardinalityFamily,
    EVENS,
    Family,
    IndexSequence,
    NATURALS,
    RelabeledFamily,
    S,
    SchreierFamily,
    construct_L,
    construct_L_bracket,
    construct_N,
    enumerate_maximal,
    family_mass,
    finset,
    member,
    member_exhaustive,
    spread_of,
    threshold_search,
    verify_bracket_inclusion,
    verify_union_property,
)
from .vectors import (
    Average,
    BlockSequence,
    Functional,
    SumNode,
    Unit,
    Vector,
    block_combine,
    evaluate,
    negate,
    validate_functional,
)
from .norms import (
    C0,
    C0Space,
    L1,
    L1Space,
    LpSpace,
    MixedSchreierSpace,
    NormResult,
    SchlumprechtSpace,
    T,
    TsirelsonSpace,
    generate_W,
    interval_norm,
    norm,
    norm_j,
)
from .constructions import (
    BudgetExhausted,
    ImprovedBlocking,
    PropertyPn,
    SccResult,
    build_l1_average,
    build_ris,
    build_schreier_functional,
    c0_to_l1_blocking,
    james_blocking_step,
    l1_to_c0_blocking,
    scc_basic,
    scc_on_blocks,
    two_norm_blocking,
)
from .analysis import (
    DistortionReport,
    DistortionWitness,
    IntervalNormSpec,
    SpreadingEstimate,
    alpha_index_diagnostic,
    distortion_witness,
    l1_lower_constant,
    ratio_bound_check,
    spreading_profile,
    standard_corpus,
    interval_distortion_experiment,
    predicted_interval_ratio,
)
from .reports import WitnessReport, to_jsonable

__version__ = "0.1.0"
