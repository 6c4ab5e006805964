"""Ensemble fusion, post-processing and lesion-wise evaluation for
multi-class segmentation volumes.

Volumes are numpy arrays: labels and masks are (nx, ny, nz) uint8,
probabilities are (nx, ny, nz, C) float32 with channels last. Any layout or
castable dtype is accepted on input.
"""

from fuseval._core import (
    FusevalError,
    __version__,
    argmax_labels,
    basnet_hybrid_loss,
    blob_loss,
    ce_dice_loss,
    connected_components,
    dice_score,
    dilate,
    erode,
    evaluate_case,
    fuse,
    fuse_to_labels,
    hd95,
    lesion_wise,
    ms_ssim,
    normalize,
    one_hot,
    postprocess,
    read_labels,
    read_probs,
    write_labels,
    write_probs,
)

__all__ = [
    "FusevalError",
    "__version__",
    "argmax_labels",
    "basnet_hybrid_loss",
    "blob_loss",
    "ce_dice_loss",
    "connected_components",
    "dice_score",
    "dilate",
    "erode",
    "evaluate_case",
    "fuse",
    "fuse_to_labels",
    "hd95",
    "lesion_wise",
    "ms_ssim",
    "normalize",
    "one_hot",
    "postprocess",
    "read_labels",
    "read_probs",
    "write_labels",
    "write_probs",
]
