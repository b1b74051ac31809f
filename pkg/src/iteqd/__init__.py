"""Quality-diversity archive search with map-prior Bayesian-optimization
adaptation, plus a planar-arm damage-recovery testbed and gait descriptors."""

__version__ = "0.1.0"

from .archive import (
    ArchiveGrid,
    ArchiveStats,
    Elite,
    EmptyArchiveError,
    GridSpec,
    InsertOutcome,
    cell_index,
    load_archive,
    save_archive,
)
from .gp import GpState, KernelParams, Observation, fit, matern52, posterior, posterior_batch
from .map_elites import (
    DiscreteMutation,
    MapElitesConfig,
    PolynomialMutation,
    mutate_discrete,
    mutate_polynomial,
    run_map_elites,
    run_random_sampling,
)
from .adapt import AdaptConfig, AdaptOutcome, TrialRecord, adapt, arm_adapt_config, stop_check, ucb_select

__all__ = [
    "ArchiveGrid",
    "ArchiveStats",
    "Elite",
    "EmptyArchiveError",
    "GridSpec",
    "InsertOutcome",
    "cell_index",
    "load_archive",
    "save_archive",
    "GpState",
    "KernelParams",
    "Observation",
    "fit",
    "matern52",
    "posterior",
    "posterior_batch",
    "DiscreteMutation",
    "MapElitesConfig",
    "PolynomialMutation",
    "mutate_discrete",
    "mutate_polynomial",
    "run_map_elites",
    "run_random_sampling",
    "AdaptConfig",
    "AdaptOutcome",
    "TrialRecord",
    "adapt",
    "arm_adapt_config",
    "stop_check",
    "ucb_select",
    "__version__",
]
