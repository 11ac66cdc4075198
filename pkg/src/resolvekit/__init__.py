"""resolvekit: resolving sets and landmark embeddings for block-model graphs.

Find small vertex sets whose distance (or adjacency) vectors uniquely
identify every vertex of a graph, with a solver that allocates picks per
community so random selections resolve sampled block-model graphs with a
chosen failure probability, plus baselines, probabilistic bound
calculators and a reproducible benchmark harness.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateCommunityError,
    InfeasibleError,
    MalformedInputError,
    NoResolvingSetError,
    OracleExhaustedError,
    ResolvekitError,
    SizeCapError,
    UnreachableDistanceError,
)
from .graph import (
    UNREACHABLE,
    DistanceMatrix,
    EdgeListReport,
    Graph,
    ModifiedAdjacency,
    all_pairs_distances,
    build_graph,
    count_pairs_distance_gt2,
    diameter,
    modified_adjacency,
    read_edge_list,
    write_edge_list,
)
from .lattice import (
    Allocation,
    downward,
    level,
    level_points,
    level_size,
    next_point,
    precedes,
    revlex_key,
    upward,
)
from .sbm import (
    CollisionBound,
    LabeledGraph,
    LongPairsResult,
    SbmParams,
    diam2_condition,
    diam_gt2_condition,
    dump_params,
    er_any_set_size,
    er_beta_upper,
    estimate_params,
    expected_collisions,
    expected_long_pairs,
    load_params,
    pair_agreement_prob,
    read_labels,
    sample,
    scale_communities,
    write_labels,
)
from .mine import MineSolution, backward_greedy, exhaustive_min, forward_greedy, mine
from .presets import PRESETS, get_preset, preset_names
from .resolve import (
    BruteForceResult,
    Embedding,
    ResolvingTarget,
    TargetKind,
    adjacency_target,
    brute_force_beta,
    distance_target,
    embed,
    greedy_baseline,
    ich,
    is_resolving,
    modified_adjacency_target,
    preorder_baseline,
    random_baseline,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    LongPathReport,
    config_hash,
    derive_seed,
    emit_tables,
    load_table_csv,
    long_path_fraction,
    run_experiment,
    write_report_files,
)
