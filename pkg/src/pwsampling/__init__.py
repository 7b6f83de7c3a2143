"""Poincare and Plancherel-Polya constants, sampling sets and frame
reconstruction for bandlimited signals on weighted graphs."""

from .graph import (
    GraphParseError,
    WeightedGraph,
    apply_laplacian,
    cycle_graph,
    load_graph,
    lp_norm,
    path_graph,
    random_connected_graph,
    star_graph,
    weighted_gradient_norm,
    wheel_graph,
)
from .partition import (
    InadmissiblePartitionError,
    Partition,
    SubsetChain,
    build_closure_partition,
    chain_constants,
    partition_constants,
    pruned_chain,
)
from .sampling import FrameBounds, frame_bounds, frame_reconstruct, plancherel_polya_check, sampling_bounds
from .shannon import integer_constants, shannon_demo
from .spectral import PWProjector, decompose, spectral_geometry_report

__version__ = "0.1.0"
