"""Fixed-length task encoding: constructions, information measures, and oracles."""

from .costs import CostFn, cost_converse_bound, cost_decomposition, cost_moment, costs_from_dict, load_costs
from .encoders import (
    MomentBounds,
    SideInfoEncoder,
    TaskEncoder,
    build_encoder,
    build_mismatched_encoder,
    build_side_info_encoder,
    moment,
    optimal_moment_bounds,
    side_info_moment,
)
from .lossy import LossyCodec, build_lossy_codec, greedy_type_cover, lossy_moment, max_fidelity_gap
from .measures import (
    Distortion,
    OrderParam,
    VariationalConditional,
    VariationalEntropy,
    binary_entropy,
    binary_entropy_inv,
    binary_hamming_renyi_rd,
    conditional_renyi_entropy,
    conditional_variational_objective,
    kl_divergence,
    rate_distortion,
    renyi_divergence,
    renyi_entropy,
    renyi_rate_distortion,
    shannon_entropy,
    sundaresan_divergence,
    variational_conditional_entropy,
    variational_entropy,
    variational_objective,
)
from .oracle import (
    OracleResult,
    SideInfoOracleResult,
    exact_min_moment,
    exact_min_moment_side_info,
    rgs_strings,
)
from .partitioning import Budget, Partition, build_budget_partition, partition_identity, subset_count_bound
from .probability import (
    Alphabet,
    Channel,
    ConvergenceError,
    EnumerationCapError,
    InfeasibleError,
    JointPmf,
    Pmf,
    ceiling_power_bound,
    compose_joint,
    condition_joint,
    joint_from_dict,
    load_joint,
    load_pmf,
    make_pmf,
    max_tuples,
    pmf_from_dict,
    product_pmf,
    tuple_alphabet,
)
from .universal import (
    BlockCodeParams,
    TypeDescriptor,
    UniversalEncoder,
    UniversalSideInfoEncoder,
    build_universal_encoder,
    build_universal_side_info_encoder,
    enumerate_types,
    multinomial,
    rank_in_class,
    universal_moment_bound,
    universal_penalty,
    unrank_in_class,
)

__version__ = "0.1.0"
