"""Query-driven multi-term inverted index: simulator and analysis toolkit."""

from mtindex._core import (
    PopularityVector,
    SystemConfig,
    canonicalize_key,
    classify,
    clean_query_log,
    compute_subset_keys,
    count_list_entries,
    derive_considered_tags,
    estimate_storage_bytes,
    fit_power_law,
    generate_synthetic,
    result_overlap,
    run_simulation,
    tr_bound_check,
)

__all__ = [
    "PopularityVector",
    "SystemConfig",
    "canonicalize_key",
    "classify",
    "clean_query_log",
    "compute_subset_keys",
    "count_list_entries",
    "derive_considered_tags",
    "estimate_storage_bytes",
    "fit_power_law",
    "generate_synthetic",
    "result_overlap",
    "run_simulation",
    "tr_bound_check",
]

__version__ = "0.1.0"
