"""Jittered sampling point sets and their discrepancy.

A numpy library for generating stratified ("jittered") and reference point
sets in the unit cube, computing star and L2 discrepancies exactly, and
running reproducible Monte Carlo studies of the probabilistic bounds that
govern them.
"""

from .core import (
    AnchoredBox,
    DimensionMismatchError,
    PointSet,
    bracket,
    count_closed,
    count_open,
    read_pointset,
    volume_anchored,
    write_pointset,
)
from .partition import (
    Box,
    Cell,
    CoverageGapError,
    MeasureMismatchError,
    OverlapError,
    Partition,
    PartitionError,
    box_partition_from_spec,
    cell_anchored_overlap,
    grid_partition,
    random_box_partition,
    randomized_fine_grid_partition,
    read_partition,
    sample_cell,
    write_partition,
)
from .generators import (
    first_primes,
    gen_grid,
    gen_hammersley,
    gen_jittered,
    gen_partition_jittered,
    gen_uniform,
    radical_inverse,
)
from .discrepancy import (
    DiscrepancyResult,
    EnumerationBudgetError,
    compute_star,
    critical_grid,
    expected_l2sq_partition,
    expected_l2sq_random,
    l2_bruteforce,
    l2_star,
    pointwise_count_variance,
    resolve_method,
    star_1d_exact,
    star_exact_bb,
    star_exact_grid,
    star_heuristic_lower,
)
from . import bounds
from .experiments import (
    REFERENCE_MEAN_STAR,
    ExperimentConfig,
    ExperimentReport,
    default_config,
    run_dkw_tails,
    run_experiment,
    run_hammersley_compare,
    run_kolmogorov,
    run_moment_bound,
    run_partition_principle,
    run_scaling,
    run_table1,
)
from .seeding import stable_seed, substream

__version__ = "0.1.0"
