from .common import ColoringReport, ColoringResult, solve_residual, verify_coloring
from .defective import BucketState, bucket_once, defective_coloring, defective_schedule
from .frugal import (PartialFrugal, complete_with_lll, frugal_coloring, frugal_progress_step, frugal_schedule,
                     sample_partial_frugal)
from .listcol import (ColorChoiceGraph, ListState, check_pruning, complete_list_coloring, list_coloring,
                      private_colors, prune_once, random_lists)

__all__ = [
    "BucketState", "ColorChoiceGraph", "ColoringReport", "ColoringResult", "ListState", "PartialFrugal",
    "bucket_once", "check_pruning", "complete_list_coloring", "complete_with_lll", "defective_coloring",
    "defective_schedule", "frugal_coloring", "frugal_progress_step", "frugal_schedule", "list_coloring",
    "private_colors", "prune_once", "random_lists", "sample_partial_frugal", "solve_residual",
    "verify_coloring",
]
