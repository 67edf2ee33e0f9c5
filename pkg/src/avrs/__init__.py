"""Minimax rate-distortion bounds and coding simulation for remote sources
observed through an adversarially jammed two-output channel."""

__version__ = "0.1.0"

from .errors import (
    AvrsError,
    ConfigurationError,
    EnumerationTooLargeError,
    InfeasibleDistortionError,
    NumericError,
    UsageError,
)
from .probability import (
    Alphabet,
    Channel,
    CondDistribution,
    Distribution,
    DistortionMatrix,
    JointDistribution,
    compose_joint,
    conditional_mutual_information,
    entropy,
    expected_distortion,
    marginal,
)
from .mtypes import (
    ConditionalType,
    SymbolVector,
    TypeTable,
    conditional_type,
    empirical_type,
    enumerate_cond_types,
    is_jointly_typical,
    is_typical,
    joint_type,
    valid_jammer_types,
)
from .model import (
    AuxiliaryPolicy,
    ProblemSpec,
    load_policy,
    load_problem_spec,
    save_policy,
    save_problem_spec,
)
from .games import BilinearGame, GameResult, solve_bilinear_game
from .bounds import (
    BoundReport,
    GridConfig,
    PerTypeRates,
    RateBoundSolver,
    compute_bound_report,
    d0,
    d1,
    per_type_rates,
    r_lower,
    r_upper,
)
from .adversary import (
    BlockJammer,
    DeterministicJammer,
    MemorylessJammer,
    deterministic_jammer_family,
    sample_jamming,
    worst_case_search,
)
from .coding import (
    Codebook,
    CodebookFamily,
    CodingParams,
    SessionConfig,
    build_codebook,
    codeword,
    decode,
    encode,
    max_distortion_estimate,
    reconstruct,
    simulate_session,
)
from .derandomize import (
    Ensemble,
    StochasticEncoderCode,
    bernstein_bound,
    build_stochastic_code,
    certify_ensemble,
    sample_ensemble,
    union_bound,
)
