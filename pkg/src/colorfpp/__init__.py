"""First-passage percolation on i.i.d. random colorings of Z^d.

Simulation and estimation toolkit: 0/1 passage times on colored boxes,
hop-constrained k-short times, color and Bernoulli cluster decompositions,
greedy lattice animals, directional seminorm estimation, asymptotic-shape
polytopes, and coupled continuity sweeps in the coloring law.
"""

__version__ = "0.1.0"

from .coloring import (
    ColorField,
    ColoringLaw,
    LawRegionParams,
    UniformField,
    color_from_uniform,
    couple_fields,
    disagreement_bound,
    disagreement_exact,
    is_in_region,
    sample_color_field,
    sample_uniform_field,
)
from .clusters import (
    BernoulliField,
    ClusterDecomposition,
    TruncatedDecomposition,
    chain_inequality_check,
    cluster_tail_estimate,
    decompose_clusters,
    marginal_domination_check,
    sample_bernoulli_field,
    truncate_colors,
)
from .estimation import (
    EstimatorConfig,
    KShortSeminormEstimate,
    Positivity,
    SeminormEstimate,
    ShapeBall,
    build_shape_ball,
    continuity_sweep,
    estimate_mu,
    estimate_mu_k,
    hausdorff_distance,
    positivity_classify,
    shape_theorem_check,
)
from .gla import (
    AnimalWeightSeries,
    SiteWeightField,
    WeightModel,
    deviation_frequency,
    estimate_W_limit,
    exact_animal_max,
    heuristic_animal_max,
)
from .lattice import (
    LatticeBox,
    LatticePath,
    enumerate_self_avoiding_paths,
    is_self_avoiding,
    nearest_site,
    neighbors,
)
from .passage import (
    KShortResult,
    PassageResult,
    ReachedSet,
    edge_time,
    extract_route,
    k_short_passage_time,
    k_short_passage_times,
    passage_times_from,
    point_passage_time,
    reached_set,
)
