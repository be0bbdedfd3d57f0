"""Degree-penalized contact processes and branching random walks on random
graphs: exact event-driven simulation, structural algorithms, and the
analytic predictors they are checked against."""

from .brw import (
    BRWResult,
    GBRWResult,
    coupled_cp_brw,
    martingale_drift,
    martingale_series,
    simulate_brw,
    simulate_gbrw,
)
from .cp import (
    SurvivalReport,
    infestation_status,
    infestation_threshold,
    simulate_cp,
    star_survival_experiment,
    star_survival_trend,
    two_state_occupation,
)
from .degrees import (
    DegreePMF,
    binomial_pmf,
    binomial_thinning_pmf,
    check_weak_power_law,
    delta_pmf,
    explicit_pmf,
    hash_transform,
    iid_degree_sequence,
    power_law_pmf,
    size_biased,
    stretched_heavy_pmf,
    uniform_pmf,
)
from .genealogy import (
    BoundReport,
    alpha_star,
    count_nonbacktracking,
    erase_first,
    erase_k,
    erlang_tail,
    expected_occupancy,
    extinction_series,
    overall_fast_bound,
    preimages,
    surplus_path_bound_check,
    tau,
    verify_backtrack_bounds,
    z_weight,
    zeta_weights,
)
from .graphical import GraphicalRep, build_graphical_rep, run_cp_from_rep, thin_rep
from .graphs import (
    AttackResult,
    MultiGraph,
    StarRow,
    build_configuration_model,
    build_star,
    build_star_row,
    complete_graph,
    cycle_graph,
    path_graph,
    random_regular_multigraph,
    read_degree_sequence,
    read_graph,
    targeted_attack,
    write_degree_sequence,
    write_graph,
)
from .penalty import PenaltySpec, infection_rate
from .renorm import (
    ClusterResult,
    ConeConfig,
    op_cluster,
    peierls_bound,
    peierls_partial_sums,
    renorm_compare,
    survival_curve,
    survival_estimate,
)
from .structure import (
    ExplorationOutput,
    FixedPointReport,
    attack_threshold,
    core_after_attack_experiment,
    delta_k_good_check,
    eta_zeta_min,
    explore_neighborhood,
    generation_moment_mc,
    h_h1,
    hk_exponent,
    jl_fixed_point,
    k_core,
    m_embedding_search,
    surplus_count,
)
from .trees import LazyTree, build_sst, sample_gw_tree

__version__ = "0.1.0"
