from .bootstrap import BootstrapPlan, DegenerateSplit, Split, bootstrap_plan
from .experiment import run_experiment
from .metrics import SingleClassEval, auc
from .models import (GRIDS, KINDS, GridSpec, Model, SingleClassTraining, TooFewSamples, grid_search,
                     train)
from .selection import SelectionResult, autospearman, spearman_matrix, vif

__all__ = [
    "BootstrapPlan", "DegenerateSplit", "Split", "bootstrap_plan", "run_experiment", "SingleClassEval",
    "auc", "GRIDS", "KINDS", "GridSpec", "Model", "SingleClassTraining", "TooFewSamples", "grid_search",
    "train", "SelectionResult", "autospearman", "spearman_matrix", "vif",
]
