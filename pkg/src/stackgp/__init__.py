"""Stack-evaluated genetic programming for symbolic regression and binary
classification."""

__version__ = "0.1.0"

from .data import Dataset, LabeledDataset, load_csv, pagie_grid, pagie_value, train_test_split
from .engine import (
    EngineConfig,
    FitResult,
    GenerationStats,
    fit,
    large_scale_config,
    pagie_config,
    predict_classification,
    predict_regression,
    score,
)
from .fitness import Metric, rank_vector, raw_fitness, row_loss
from .interpreter import eval_batch, eval_row
from .program import Node, Program, const, depth, func, subtree_span, validate_prefix, var
