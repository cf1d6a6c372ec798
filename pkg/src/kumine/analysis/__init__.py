from .importance import PartitionError, dimension_importance
from .shap import DimensionMismatch, ShapMatrix, explain, sampling_shap, tree_shap
from .skesd import RankTable, scott_knott_esd
from .stats import (BaselineAtCeiling, EffectSize, EmptyInput, LengthMismatch, WilcoxonResult,
                    cliffs_delta, magnitude, normalized_auc_improvement, wilcoxon_signed_rank)

__all__ = [
    "PartitionError", "dimension_importance", "DimensionMismatch", "ShapMatrix", "explain",
    "sampling_shap", "tree_shap", "RankTable", "scott_knott_esd", "BaselineAtCeiling", "EffectSize",
    "EmptyInput", "LengthMismatch", "WilcoxonResult", "cliffs_delta", "magnitude",
    "normalized_auc_improvement", "wilcoxon_signed_rank",
]
