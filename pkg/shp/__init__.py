from .__about__ import __author__, __version__
from .base import (
    CyclicGraphError,
    DataFormatError,
    NumericError,
    SHPError,
    StabilityError,
    UnknownEventTypeError,
    ValidationError,
    ZeroIntensityError,
)
from .config import (
    FitConfig,
    Generator,
    MuInit,
    SearchConfig,
    SimConfig,
    SweepSpec,
    SweptParameter,
    load_config,
)
from .estimator import (
    FamilyFit,
    FitResult,
    Responsibilities,
    fit,
    fit_family,
    fit_graph,
    mm_step,
    responsibilities,
)
from .evaluation import (
    CellRecord,
    DispersionReport,
    ExperimentReport,
    GapSummary,
    MetricReport,
    bivariate_gap,
    bivariate_gap_curve,
    compare_graphs,
    dispersion_check,
    run_resolution_sweep,
    run_sweep,
    structural_hamming_distance,
)
from .events import BinnedCounts, ContinuousSequence, EventRecord, bin_events
from .graph import CausalGraph, is_acyclic, topological_order
from .likelihood import (
    IntensityMatrix,
    LagState,
    intensity,
    local_score,
    log_likelihood,
    penalized_score,
)
from .params import SHPParams
from .search import (
    ScoreCache,
    SearchResult,
    hill_climb,
    neighborhood,
    score_cache_lookup,
    threshold_graph,
    threshold_search,
)
from .simulator import (
    SimulatedDataset,
    random_dag,
    sample_params,
    simulate,
    simulate_continuous,
    simulate_dataset,
    simulate_discrete,
    simulate_instantaneous_pair,
)

__all__ = [
    '__author__',
    '__version__',
    'SHPError',
    'ValidationError',
    'UnknownEventTypeError',
    'CyclicGraphError',
    'DataFormatError',
    'NumericError',
    'ZeroIntensityError',
    'StabilityError',
    'SimConfig',
    'FitConfig',
    'SearchConfig',
    'SweepSpec',
    'SweptParameter',
    'Generator',
    'MuInit',
    'load_config',
    'EventRecord',
    'ContinuousSequence',
    'BinnedCounts',
    'bin_events',
    'CausalGraph',
    'is_acyclic',
    'topological_order',
    'SHPParams',
    'IntensityMatrix',
    'LagState',
    'intensity',
    'log_likelihood',
    'penalized_score',
    'local_score',
    'FitResult',
    'FamilyFit',
    'Responsibilities',
    'responsibilities',
    'mm_step',
    'fit',
    'fit_graph',
    'fit_family',
    'SimulatedDataset',
    'random_dag',
    'sample_params',
    'simulate',
    'simulate_continuous',
    'simulate_discrete',
    'simulate_instantaneous_pair',
    'simulate_dataset',
    'SearchResult',
    'ScoreCache',
    'neighborhood',
    'score_cache_lookup',
    'hill_climb',
    'threshold_graph',
    'threshold_search',
    'MetricReport',
    'compare_graphs',
    'structural_hamming_distance',
    'GapSummary',
    'bivariate_gap',
    'bivariate_gap_curve',
    'DispersionReport',
    'dispersion_check',
    'CellRecord',
    'ExperimentReport',
    'run_sweep',
    'run_resolution_sweep',
]
