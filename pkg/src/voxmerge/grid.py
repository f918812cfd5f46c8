"""Core volumetric types and 3D mask operations.

Conventions used throughout the toolkit:

* A :class:`VoxelGrid` is a dense cubic volume of feature vectors stored as
  a ``(A, A, A, F)`` float32 array indexed ``data[ix, iy, iz, channel]``.
* The grid spans the axis-aligned cube ``[-1, 1]^3``. Voxel ``(ix, iy, iz)``
  has its center at ``(-1 + (2*ix + 1)/A, -1 + (2*iy + 1)/A, -1 + (2*iz + 1)/A)``.
* A :class:`Mask3D` is a ``(A, A, A)`` boolean array with the same spatial
  indexing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DataError, DimensionError, DomainError

CONNECTIVITIES = (6, 26)

# scipy structuring elements: face neighbors vs the full 3x3x3 cube
_STRUCTS_3D = {
    6: ndimage.generate_binary_structure(3, 1),
    26: ndimage.generate_binary_structure(3, 3),
}


def voxel_centers(resolution: int) -> np.ndarray:
    """Per-axis voxel center coordinates in [-1, 1], shape ``(A,)``."""
    return (2.0 * np.arange(resolution) + 1.0) / resolution - 1.0


class VoxelGrid:
    """Dense cubic feature volume over ``[-1, 1]^3``.

    ``data`` has shape ``(A, A, A, F)`` and dtype float32; axis order is
    ``(x, y, z, channel)``. All values must be finite.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim != 4:
            raise DimensionError(
                f"voxel grid needs a 4-d (A, A, A, F) array, got shape {arr.shape}"
            )
        a = arr.shape[0]
        if arr.shape[1] != a or arr.shape[2] != a:
            raise DimensionError(f"voxel grid must be cubic, got shape {arr.shape}")
        if a < 1 or arr.shape[3] < 1:
            raise DimensionError(f"voxel grid needs A >= 1 and F >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("voxel grid contains non-finite values")
        self.data = arr

    @property
    def resolution(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.data.copy())

    def centers(self) -> np.ndarray:
        """Voxel center coordinates, shape ``(A, A, A, 3)``."""
        c = voxel_centers(self.resolution)
        x, y, z = np.meshgrid(c, c, c, indexing="ij")
        return np.stack([x, y, z], axis=-1)

    def __repr__(self):
        return f"VoxelGrid(A={self.resolution}, F={self.channels})"


class Mask3D:
    """Boolean cubic volume with the same spatial layout as :class:`VoxelGrid`."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.dtype != np.bool_:
            arr = arr.astype(bool)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[1] != arr.shape[2]:
            raise DimensionError(f"mask needs a cubic (A, A, A) array, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionError("mask needs A >= 1")
        self.bits = arr

    @classmethod
    def empty(cls, resolution: int) -> "Mask3D":
        return cls(np.zeros((resolution,) * 3, dtype=bool))

    @property
    def resolution(self) -> int:
        return self.bits.shape[0]

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())

    def copy(self) -> "Mask3D":
        return Mask3D(self.bits.copy())

    def __repr__(self):
        return f"Mask3D(A={self.resolution}, set={self.popcount})"


@dataclass(frozen=True)
class ColorSpec:
    """Target color plus a Euclidean RGB decision threshold.

    ``rgb`` components live in [0, 1]; ``threshold`` is a distance in the
    same unit cube and must be non-negative.
    """

    rgb: tuple[float, float, float] = (0.0, 1.0, 0.0)
    threshold: float = 0.3

    def __post_init__(self):
        if len(self.rgb) != 3:
            raise DimensionError(f"color needs 3 components, got {len(self.rgb)}")
        for c in self.rgb:
            if not 0.0 <= c <= 1.0:
                raise DomainError(f"color component {c} outside [0, 1]")
        if self.threshold < 0.0:
            raise DomainError(f"color threshold must be >= 0, got {self.threshold}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rgb, dtype=np.float32)


def extract_color_mask(colors: VoxelGrid, spec: ColorSpec) -> Mask3D:
    """Threshold a color field against a target color.

    A voxel is selected iff the Euclidean distance between its stored RGB
    value and ``spec.rgb`` is at most ``spec.threshold``. This is how 2D
    segmentations painted in a marker color are recovered as a 3D mask
    after reconstruction.
    """
    if colors.channels != 3:
        raise DimensionError(
            f"color mask extraction needs a 3-channel grid, got F={colors.channels}"
        )
    diff = colors.data - spec.as_array()
    dist_sq = np.einsum("...c,...c->...", diff, diff)
    return Mask3D(dist_sq <= np.float32(spec.threshold) ** 2)


def dilate3d(mask: Mask3D, iterations: int, connectivity: int = 26) -> Mask3D:
    """Morphological dilation, ``iterations`` applications of the structuring element.

    ``connectivity`` selects the element: 6 grows across faces only, 26
    across the full 3x3x3 neighborhood. ``iterations=0`` is the identity.
    """
    if iterations < 0:
        raise DomainError(f"dilation count must be >= 0, got {iterations}")
    if connectivity not in _STRUCTS_3D:
        raise DomainError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity}")
    if iterations == 0:
        return mask.copy()
    grown = ndimage.binary_dilation(
        mask.bits, structure=_STRUCTS_3D[connectivity], iterations=iterations
    )
    return Mask3D(grown)


def mask_xor(a: Mask3D, b: Mask3D) -> Mask3D:
    """Per-voxel exclusive or; both masks must share the resolution."""
    if a.resolution != b.resolution:
        raise DimensionError(
            f"mask resolutions differ: {a.resolution} vs {b.resolution}"
        )
    return Mask3D(np.logical_xor(a.bits, b.bits))
