"""Market states from the correlation structure of return series."""

from .cluster import ClusterConfig, ClusterNode, build_tree, cut_to_states, kmeans_bisect, state_timeline
from .corr import CorrelationWindow, WindowSpec, average_matrix, correlation_windows, pearson_matrix, rolling_windows
from .ingest import PriceSeries, ReturnPanel, ReturnSeries, align_universe, compute_returns, parse_price_table
from .normalize import LocalNormConfig, local_normalize, normalize_panel
from .similarity import SimilarityMatrix, largest_eigenvalue, similarity_matrix, zeta, zeta_alt
from .states import SectorMap, coefficient_histogram, diff_to_overall, sector_sort, state_average
from .synth import RegimeSpec, Segment, generate_regime_panel

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig", "ClusterNode", "build_tree", "cut_to_states", "kmeans_bisect", "state_timeline",
    "CorrelationWindow", "WindowSpec", "average_matrix", "correlation_windows", "pearson_matrix", "rolling_windows",
    "PriceSeries", "ReturnPanel", "ReturnSeries", "align_universe", "compute_returns", "parse_price_table",
    "LocalNormConfig", "local_normalize", "normalize_panel",
    "SimilarityMatrix", "largest_eigenvalue", "similarity_matrix", "zeta", "zeta_alt",
    "SectorMap", "coefficient_histogram", "diff_to_overall", "sector_sort", "state_average",
    "RegimeSpec", "Segment", "generate_regime_panel",
]
