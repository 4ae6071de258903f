"""Point cloud upsampling: surface sampling, Chamfer/EMD metrics and trained networks."""

from ._pcup import (
    Error,
    Network,
    accuracy,
    chamfer_gradient,
    chamfer_loss,
    chamfer_sum,
    coverage,
    emd,
    make_synthetic,
    normalize_model,
    read_obj,
    read_ply,
    sample_surface,
    subsample,
    synthetic_families,
    vertex_curvatures,
    write_ply,
)

__all__ = [
    "Error",
    "Network",
    "accuracy",
    "chamfer_gradient",
    "chamfer_loss",
    "chamfer_sum",
    "coverage",
    "emd",
    "make_synthetic",
    "normalize_model",
    "read_obj",
    "read_ply",
    "sample_surface",
    "subsample",
    "synthetic_families",
    "vertex_curvatures",
    "write_ply",
]
