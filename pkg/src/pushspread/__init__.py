"""Push rumor spreading on random regular graphs and spectral expanders."""

from ._backend import BACKEND
from .bounds import chernoff_tail, lemma1_tail, talagrand_tail
from .config_model import (
    CloneMatching,
    expected_stats,
    matching_stats,
    project,
    sample_matching,
    sample_multigraph,
    sample_simple_regular,
)
from .errors import (
    CapacityError,
    DivergenceError,
    DomainError,
    InputError,
    SamplingError,
    StateError,
)
from .experiment import ExperimentSpec, compare_trajectory, sweep
from .graph import (
    Graph,
    bfs_layers,
    complete_graph,
    edges_between,
    edges_within,
    load_fixture,
    petersen_graph,
    read_graph,
    write_graph,
)
from .push import ProtocolTrace, run_incremental, run_static
from .spectral import mixing_check, paley_graph, spectrum, typicality_check, variance_bound_check
from .theory import TheoryParams, c_d, f_of, g_ratio, integrate, predict_T

__version__ = "0.1.0"
