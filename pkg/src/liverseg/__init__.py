"""Liver segmentation study toolkit.

Building blocks for CT segmentation experiments: NIfTI volume I/O, the
slice-slab preprocessing pipeline, deterministic learning-rate scheduler
simulation with early stopping, volumetric overlap and surface-distance
metrics, a k-fold experiment harness with mean/std table reporting, and
marching-cubes mesh export to Wavefront OBJ.
"""

from .experiment import (
    FoldSpec,
    aggregate,
    kfold_split,
    read_convergence_log,
    render_table,
    test_record_ids,
    write_convergence_log,
)
from .mesh_export import TriMesh, export_obj, marching_cubes, mesh_all_labels
from .metrics import (
    MetricReport,
    SurfaceDistanceBag,
    asd,
    bce,
    dice,
    evaluate_case,
    extract_surface,
    hd95,
    iou,
    msd,
    reports_to_csv,
    rmsd,
    rvd,
    surface_distances,
)
from .preprocess import (
    PreprocessConfig,
    Slab,
    clahe,
    clip,
    normalize,
    reorient,
    rescale,
    run_pipeline,
    standardize_range,
    to_slabs,
)
from .schedulers import (
    EarlyStopConfig,
    EarlyStopping,
    OneCycleConfig,
    OneCycleScheduler,
    PlateauConfig,
    PlateauScheduler,
    TrajectoryRow,
    one_cycle_lr_at,
    simulate_schedule,
)
from .volume import LabelVolume, Volume
from .volume_io import read_labels, read_volume, write_volume

__all__ = [
    "Volume", "LabelVolume", "read_volume", "read_labels", "write_volume",
    "PreprocessConfig", "Slab", "reorient", "rescale", "clip",
    "standardize_range", "clahe", "normalize", "to_slabs", "run_pipeline",
    "OneCycleConfig", "PlateauConfig", "EarlyStopConfig", "OneCycleScheduler",
    "PlateauScheduler", "EarlyStopping", "TrajectoryRow", "one_cycle_lr_at",
    "simulate_schedule",
    "MetricReport", "SurfaceDistanceBag", "dice", "iou", "rvd",
    "extract_surface", "surface_distances", "asd", "rmsd", "msd", "hd95",
    "bce", "evaluate_case", "reports_to_csv",
    "FoldSpec", "kfold_split", "test_record_ids", "aggregate", "render_table",
    "write_convergence_log", "read_convergence_log",
    "TriMesh", "marching_cubes", "mesh_all_labels", "export_obj",
]
__version__ = "0.1.0"
