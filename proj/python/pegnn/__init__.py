"""Positional-encoder GNN toolkit for geographic point regression.

Thin wrapper over the C++ core. The heavy lifting (autodiff, kNN graphs,
message passing, Moran's I, training) happens in the `_core` extension.
"""

from ._core import (
    __version__,
    knn_edges,
    local_moran,
    metrics,
    sinusoidal_features,
    spatial_variance_grid,
    split_indices,
    synth_dataset,
    train,
)

__all__ = [
    "__version__",
    "knn_edges",
    "local_moran",
    "metrics",
    "sinusoidal_features",
    "spatial_variance_grid",
    "split_indices",
    "synth_dataset",
    "train",
]
