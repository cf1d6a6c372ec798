"""Group attributions by feature dimension and rank the dimensions."""

from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from .shap import ShapMatrix
from .skesd import RankTable, scott_knott_esd


class PartitionError(ValueError):
    pass


def dimension_importance(shap: ShapMatrix, dimension_map: Mapping[str, Sequence[str]],
                         alpha: float = 0.05, negligible: float = 0.147
                         ) -> tuple[dict[str, np.ndarray], RankTable]:
    """Per record and dimension, the sum of |phi| over the dimension's columns.

    ``dimension_map`` names the columns of each dimension. A dimension may list no
    columns (all dropped by selection); it then gets a constant zero distribution.
    """
    cols = list(shap.columns)
    pos = {c: i for i, c in enumerate(cols)}
    seen: dict[str, str] = {}
    for dim, members in dimension_map.items():
        for c in members:
            if c not in pos:
                raise PartitionError(f"column {c!r} of {dim} is not among the explained columns")
            if c in seen:
                raise PartitionError(f"column {c!r} belongs to both {seen[c]} and {dim}")
            seen[c] = dim
    missing = [c for c in cols if c not in seen]
    if missing:
        raise PartitionError(f"columns without a dimension: {', '.join(missing)}")
    magnitude = np.abs(shap.values)
    dists = {dim: magnitude[:, [pos[c] for c in members]].sum(axis=1) if members
             else np.zeros(magnitude.shape[0])
             for dim, members in dimension_map.items()}
    return dists, scott_knott_esd(dists, alpha, negligible)
