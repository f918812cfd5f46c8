"""Per-view 2D operations: mask downsampling, latent blending, painting, morphology.

Multi-view features are ``(V, H, W, C)`` float32 arrays; mask stacks are
``(V, H, W)`` float32 arrays with values in [0, 1] where 1 marks editable
pixels. Masks may be soft (fractional) or binary; operations state which
they require.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DataError, DimensionError, DomainError, PreconditionError
from .grid import ColorSpec

DOWNSAMPLE_MODES = ("area_soft", "nearest_binary")
MORPH_OPS = ("dilate", "erode")

_STRUCT_2D_8CONN = ndimage.generate_binary_structure(2, 2)


class MultiViewFeature:
    """Stack of per-view feature maps (images or latents), ``(V, H, W, C)``."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim != 4:
            raise DimensionError(
                f"multi-view features need a (V, H, W, C) array, got shape {arr.shape}"
            )
        if min(arr.shape) < 1:
            raise DimensionError(f"all feature dimensions must be >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("multi-view features contain non-finite values")
        self.data = arr

    @property
    def n_views(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    def copy(self) -> "MultiViewFeature":
        return MultiViewFeature(self.data.copy())

    def __repr__(self):
        v, h, w, c = self.data.shape
        return f"MultiViewFeature(V={v}, H={h}, W={w}, C={c})"


class MaskStack2D:
    """Per-view masks, ``(V, H, W)`` floats in [0, 1]."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim != 3:
            raise DimensionError(f"mask stack needs a (V, H, W) array, got shape {arr.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise DomainError("mask values must lie in [0, 1]")
        self.data = arr

    @property
    def n_views(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def is_binary(self) -> bool:
        return bool(np.isin(self.data, (0.0, 1.0)).all())

    def copy(self) -> "MaskStack2D":
        return MaskStack2D(self.data.copy())


def binarize(mask: MaskStack2D, threshold: float = 0.5) -> MaskStack2D:
    """Threshold a soft mask stack to {0, 1}; values >= threshold are set."""
    return MaskStack2D((mask.data >= threshold).astype(np.float32))


def downsample_mask(mask: MaskStack2D, h: int, w: int, mode: str = "area_soft",
                    allow_resample: bool = False) -> MaskStack2D:
    """Shrink masks to the working feature resolution.

    ``area_soft`` block-averages, producing fractional coverage values; it
    requires the source size to be an integer multiple of the target unless
    ``allow_resample`` permits a box-filter resize. ``nearest_binary`` picks
    the nearest source pixel, so binary masks stay binary.
    """
    if mode not in DOWNSAMPLE_MODES:
        raise DomainError(f"mode must be one of {DOWNSAMPLE_MODES}, got {mode!r}")
    src_h, src_w = mask.height, mask.width
    if h < 1 or w < 1 or h > src_h or w > src_w:
        raise DomainError(
            f"target size {h}x{w} must be within the source size {src_h}x{src_w}"
        )
    if mode == "nearest_binary":
        rows = np.minimum(((np.arange(h) + 0.5) * src_h / h).astype(np.int64), src_h - 1)
        cols = np.minimum(((np.arange(w) + 0.5) * src_w / w).astype(np.int64), src_w - 1)
        return MaskStack2D(mask.data[:, rows][:, :, cols])

    if src_h % h or src_w % w:
        if not allow_resample:
            raise DimensionError(
                f"area_soft needs integer scale factors ({src_h}x{src_w} -> {h}x{w}); "
                "pass allow_resample=True for a box-filter resize"
            )
        from PIL import Image

        views = [
            np.asarray(
                Image.fromarray(view, mode="F").resize((w, h), Image.BOX),
                dtype=np.float32,
            )
            for view in mask.data
        ]
        return MaskStack2D(np.clip(np.stack(views), 0.0, 1.0))

    fh, fw = src_h // h, src_w // w
    blocks = mask.data.reshape(mask.n_views, h, fh, w, fw)
    return MaskStack2D(blocks.mean(axis=(2, 4), dtype=np.float64).astype(np.float32))


def blend_features(edited: MultiViewFeature, original: MultiViewFeature,
                   mask: MaskStack2D) -> MultiViewFeature:
    """Per-pixel convex combination: mask picks edited, its complement original.

    The mask broadcasts across channels; soft masks blend fractionally.
    """
    if edited.data.shape != original.data.shape:
        raise DimensionError(
            f"feature shapes differ: {edited.data.shape} vs {original.data.shape}"
        )
    if mask.data.shape != edited.data.shape[:3]:
        raise DimensionError(
            f"mask shape {mask.data.shape} does not match views {edited.data.shape[:3]}"
        )
    m = mask.data[..., None]
    return MultiViewFeature(m * edited.data + (1.0 - m) * original.data)


def paint_masks(images: MultiViewFeature, masks: MaskStack2D, color: ColorSpec) -> MultiViewFeature:
    """Replace masked pixels with a flat marker color.

    Masks must be binary; binarize soft masks first (threshold 0.5).
    Unmasked pixels are bit-identical to the input.
    """
    if images.channels != 3:
        raise DimensionError(f"painting needs C=3 images, got C={images.channels}")
    if images.data.shape[:3] != masks.data.shape:
        raise DimensionError(
            f"mask shape {masks.data.shape} does not match images {images.data.shape[:3]}"
        )
    if not masks.is_binary:
        raise PreconditionError("paint_masks needs binary masks; binarize first")
    out = images.data.copy()
    out[masks.data == 1.0] = color.as_array()
    return MultiViewFeature(out)


def morph2d(mask: MaskStack2D, d: int, op: str = "dilate") -> MaskStack2D:
    """8-connected morphological dilation or erosion, ``|d|`` iterations per view.

    Negative ``d`` flips the operation (a negative dilation is an erosion
    and vice versa). ``d=0`` is the identity. Masks must be binary.
    """
    if op not in MORPH_OPS:
        raise DomainError(f"op must be one of {MORPH_OPS}, got {op!r}")
    if not mask.is_binary:
        raise PreconditionError("morph2d needs binary masks; binarize first")
    if d < 0:
        op = "erode" if op == "dilate" else "dilate"
        d = -d
    if d == 0:
        return mask.copy()
    fn = ndimage.binary_dilation if op == "dilate" else ndimage.binary_erosion
    out = np.stack(
        [fn(view > 0.5, structure=_STRUCT_2D_8CONN, iterations=d) for view in mask.data]
    )
    return MaskStack2D(out.astype(np.float32))
