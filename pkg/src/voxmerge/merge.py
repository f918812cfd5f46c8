"""Merging of edited and original voxel feature grids.

Two strategies are provided. ``copy_paste_merge`` nullifies the voxels of
the region being removed and overwrites the voxels of the region being
inserted with the edited grid's features. ``average_merge`` additionally
blends the two grids inside a boundary shell (the dilated insertion mask
XOR the insertion mask itself), which removes the seams and gaps the plain
copy-paste tends to leave at region boundaries.

The blend step deliberately reads the grid state *after* nullification and
overwrite, so shell voxels that were nullified blend the empty feature
with the edited feature. Set ``blend_from_pristine`` to blend against the
untouched original instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DataError, DimensionError, DomainError
from .grid import CONNECTIVITIES, Mask3D, VoxelGrid, dilate3d

DEFAULT_THETA = 0.5
DEFAULT_DILATION = 2


@dataclass
class MergeConfig:
    """Parameters shared by the merge strategies.

    ``empty_feature`` is the vector written into nullified voxels; ``None``
    means all zeros. ``theta`` weights the original grid inside the blend
    shell (0.5 averages the two grids). ``dilation`` and ``connectivity``
    shape the shell.
    """

    dilation: int = DEFAULT_DILATION
    theta: float = DEFAULT_THETA
    connectivity: int = 26
    empty_feature: np.ndarray | None = None
    blend_from_pristine: bool = False

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"theta must be in [0, 1], got {self.theta}")
        if self.dilation < 0:
            raise DomainError(f"dilation must be >= 0, got {self.dilation}")
        if self.connectivity not in CONNECTIVITIES:
            raise DomainError(
                f"connectivity must be one of {CONNECTIVITIES}, got {self.connectivity}"
            )
        if self.empty_feature is not None:
            self.empty_feature = np.asarray(self.empty_feature, dtype=np.float32).ravel()

    def resolved_empty(self, channels: int) -> np.ndarray:
        if self.empty_feature is None:
            return np.zeros(channels, dtype=np.float32)
        if self.empty_feature.shape[0] != channels:
            raise DimensionError(
                f"empty feature has {self.empty_feature.shape[0]} components, "
                f"grids have F={channels}"
            )
        return self.empty_feature


def corner_empty_feature(grid: VoxelGrid) -> np.ndarray:
    """Mean feature of the grid's 8 corner voxels.

    Corners are assumed to lie in empty space, so this vector decodes to
    "nothing there" even for decoders where the zero vector does not.
    """
    a = grid.resolution - 1
    corners = grid.data[np.ix_([0, a], [0, a], [0, a])].reshape(-1, grid.channels)
    return corners.mean(axis=0).astype(np.float32)


def _check_merge_inputs(original, edited, mask_original, mask_edited):
    if original.resolution != edited.resolution or original.channels != edited.channels:
        raise DimensionError(
            f"grids disagree: (A={original.resolution}, F={original.channels}) vs "
            f"(A={edited.resolution}, F={edited.channels})"
        )
    for name, mask in (("original", mask_original), ("edited", mask_edited)):
        if mask.resolution != original.resolution:
            raise DimensionError(
                f"{name} mask resolution {mask.resolution} does not match grids "
                f"(A={original.resolution})"
            )


def copy_paste_merge(
    original: VoxelGrid,
    edited: VoxelGrid,
    mask_original: Mask3D,
    mask_edited: Mask3D,
    config: MergeConfig | None = None,
) -> VoxelGrid:
    """Nullify the removal region, then overwrite the insertion region.

    Voxels outside both masks are bit-identical to ``original``. Where the
    masks overlap the overwrite wins.
    """
    config = config or MergeConfig()
    _check_merge_inputs(original, edited, mask_original, mask_edited)
    empty = config.resolved_empty(original.channels)
    out = original.data.copy()
    out[mask_original.bits] = empty
    sel = mask_edited.bits
    out[sel] = edited.data[sel]
    return VoxelGrid(out)


def blend_shell(mask_edited: Mask3D, config: MergeConfig) -> Mask3D:
    """The boundary shell: dilated insertion mask XOR the insertion mask."""
    grown = dilate3d(mask_edited, config.dilation, config.connectivity)
    return Mask3D(np.logical_xor(mask_edited.bits, grown.bits))


def average_merge(
    original: VoxelGrid,
    edited: VoxelGrid,
    mask_original: Mask3D,
    mask_edited: Mask3D,
    config: MergeConfig | None = None,
) -> VoxelGrid:
    """Copy-paste merge plus linear blending inside the boundary shell.

    Inside the shell the output is ``theta * current + (1 - theta) * edited``
    where ``current`` is the grid state after nullification and overwrite
    (or the pristine original when ``blend_from_pristine`` is set). Voxels
    outside the dilated insertion mask and the removal mask are bit-identical
    to ``original``; voxels inside the insertion mask are bit-identical to
    ``edited``.
    """
    config = config or MergeConfig()
    _check_merge_inputs(original, edited, mask_original, mask_edited)
    empty = config.resolved_empty(original.channels)

    out = original.data.copy()
    out[mask_original.bits] = empty
    sel = mask_edited.bits
    out[sel] = edited.data[sel]

    shell = blend_shell(mask_edited, config).bits
    base = original.data if config.blend_from_pristine else out
    theta = np.float32(config.theta)
    out[shell] = theta * base[shell] + (np.float32(1.0) - theta) * edited.data[shell]
    return VoxelGrid(out)


def average_merge_inplace(
    original: VoxelGrid,
    edited: VoxelGrid,
    mask_original: Mask3D,
    mask_edited: Mask3D,
    config: MergeConfig | None = None,
    slab_depth: int = 16,
) -> VoxelGrid:
    """``average_merge`` that mutates ``original`` instead of copying it.

    Work proceeds in z slabs so temporaries stay a small fraction of the
    grid payload. The caller must not alias ``original`` elsewhere while
    the call runs; ``blend_from_pristine`` is unsupported here because the
    pristine state is destroyed as the merge progresses.
    """
    config = config or MergeConfig()
    if config.blend_from_pristine:
        raise DomainError("blend_from_pristine requires the functional average_merge")
    _check_merge_inputs(original, edited, mask_original, mask_edited)
    empty = config.resolved_empty(original.channels)
    shell = blend_shell(mask_edited, config).bits
    theta = np.float32(config.theta)
    one_minus = np.float32(1.0) - theta

    a = original.resolution
    data = original.data
    for z0 in range(0, a, max(1, slab_depth)):
        z1 = min(z0 + max(1, slab_depth), a)
        view = data[:, :, z0:z1]
        edit_view = edited.data[:, :, z0:z1]
        view[mask_original.bits[:, :, z0:z1]] = empty
        sel = mask_edited.bits[:, :, z0:z1]
        view[sel] = edit_view[sel]
        k = shell[:, :, z0:z1]
        view[k] = theta * view[k] + one_minus * edit_view[k]
    if not np.isfinite(data).all():
        raise DataError("merge produced non-finite values")
    return original


def average_merge_streamed(
    original: VoxelGrid,
    edited_slabs: Iterable[tuple[int, int, np.ndarray]],
    mask_original: Mask3D,
    mask_edited: Mask3D,
    config: MergeConfig | None = None,
) -> VoxelGrid:
    """In-place merge fed by z slabs of the edited grid.

    ``edited_slabs`` yields ``(z0, z1, array)`` with arrays of shape
    ``(A, A, z1 - z0, F)``, e.g. from :func:`voxmerge.io.iter_grid_slabs`.
    Together with that reader the peak footprint is one resident grid plus
    a single slab. Slabs must cover the full z range exactly once.
    """
    config = config or MergeConfig()
    if config.blend_from_pristine:
        raise DomainError("blend_from_pristine requires the functional average_merge")
    empty = config.resolved_empty(original.channels)
    shell = blend_shell(mask_edited, config).bits
    theta = np.float32(config.theta)
    one_minus = np.float32(1.0) - theta

    a = original.resolution
    if mask_original.resolution != a or mask_edited.resolution != a:
        raise DimensionError("mask resolution does not match the grid")
    covered = 0
    data = original.data
    for z0, z1, slab in edited_slabs:
        if z0 != covered:
            raise DimensionError(f"slabs out of order: expected z0={covered}, got {z0}")
        if slab.shape != (a, a, z1 - z0, original.channels):
            raise DimensionError(
                f"slab shape {slab.shape} does not match (A, A, {z1 - z0}, F)"
            )
        view = data[:, :, z0:z1]
        view[mask_original.bits[:, :, z0:z1]] = empty
        sel = mask_edited.bits[:, :, z0:z1]
        view[sel] = slab[sel]
        k = shell[:, :, z0:z1]
        view[k] = theta * view[k] + one_minus * slab[k]
        covered = z1
    if covered != a:
        raise DimensionError(f"slabs covered z < {covered}, grid has A={a}")
    if not np.isfinite(data).all():
        raise DataError("merge produced non-finite values")
    return original
