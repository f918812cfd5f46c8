"""Triplane feature sets and their interpolation onto voxel grids.

Each of the three axis-aligned planes (XY, XZ, YZ) is an ``(R, R, F')``
array over ``[-1, 1]^2``. Plane pixel ``(i, j)`` sits at
``(-1 + 2*i/(R-1), -1 + 2*j/(R-1))``, so the extreme coordinates -1 and 1
coincide with the outermost pixel centers and bilinear interpolation
reproduces linear functions at every voxel center regardless of the voxel
resolution. Coordinates outside [-1, 1] clamp to the plane edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .grid import VoxelGrid, voxel_centers

AGGREGATION_MODES = ("concat", "sum", "mean")


@dataclass
class TriplaneSet:
    """Three feature planes plus the rule for combining their samples."""

    plane_xy: np.ndarray
    plane_xz: np.ndarray
    plane_yz: np.ndarray
    mode: str = "concat"

    def __post_init__(self):
        self.plane_xy = np.asarray(self.plane_xy, dtype=np.float32)
        self.plane_xz = np.asarray(self.plane_xz, dtype=np.float32)
        self.plane_yz = np.asarray(self.plane_yz, dtype=np.float32)
        shape = self.plane_xy.shape
        if len(shape) != 3 or shape[0] != shape[1]:
            raise DimensionError(f"planes need shape (R, R, F'), got {shape}")
        if self.plane_xz.shape != shape or self.plane_yz.shape != shape:
            raise DimensionError(
                "all three planes must share one shape, got "
                f"{shape}, {self.plane_xz.shape}, {self.plane_yz.shape}"
            )
        if shape[0] < 2:
            raise DomainError("plane resolution must be >= 2 for bilinear sampling")
        if self.mode not in AGGREGATION_MODES:
            raise DomainError(f"aggregation mode must be one of {AGGREGATION_MODES}")

    @property
    def plane_resolution(self) -> int:
        return self.plane_xy.shape[0]

    @property
    def plane_channels(self) -> int:
        return self.plane_xy.shape[2]

    @property
    def output_channels(self) -> int:
        f = self.plane_channels
        return 3 * f if self.mode == "concat" else f


def bilinear_plane_sample(plane: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample an ``(R, R, C)`` plane at normalized coordinates.

    ``u`` indexes the first plane axis and ``v`` the second; both are arrays
    of coordinates in [-1, 1] (values outside clamp to the edge). Returns an
    array of shape ``u.shape + (C,)``.
    """
    r = plane.shape[0]
    gu = np.clip((np.asarray(u, dtype=np.float64) + 1.0) * 0.5 * (r - 1), 0.0, r - 1)
    gv = np.clip((np.asarray(v, dtype=np.float64) + 1.0) * 0.5 * (r - 1), 0.0, r - 1)
    iu0 = np.minimum(gu.astype(np.int64), r - 2)
    iv0 = np.minimum(gv.astype(np.int64), r - 2)
    fu = (gu - iu0)[..., None]
    fv = (gv - iv0)[..., None]
    p00 = plane[iu0, iv0]
    p01 = plane[iu0, iv0 + 1]
    p10 = plane[iu0 + 1, iv0]
    p11 = plane[iu0 + 1, iv0 + 1]
    top = p00 * (1.0 - fv) + p01 * fv
    bot = p10 * (1.0 - fv) + p11 * fv
    return top * (1.0 - fu) + bot * fu


def sample_triplane(triplanes: TriplaneSet, resolution: int) -> VoxelGrid:
    """Interpolate triplane features at every voxel center of a cubic grid.

    The XY plane is sampled at (x, y), XZ at (x, z), YZ at (y, z); the three
    samples are combined per ``triplanes.mode`` (concatenated in that plane
    order, summed, or averaged).
    """
    if resolution < 1:
        raise DomainError(f"grid resolution must be >= 1, got {resolution}")
    a = resolution
    c = voxel_centers(a)
    ci, cj = np.meshgrid(c, c, indexing="ij")

    # each plane only varies over two axes; sample once and broadcast the third
    f_xy = bilinear_plane_sample(triplanes.plane_xy, ci, cj)[:, :, None, :]
    f_xz = bilinear_plane_sample(triplanes.plane_xz, ci, cj)[:, None, :, :]
    f_yz = bilinear_plane_sample(triplanes.plane_yz, ci, cj)[None, :, :, :]

    fp = triplanes.plane_channels
    if triplanes.mode == "concat":
        out = np.empty((a, a, a, 3 * fp), dtype=np.float32)
        out[..., :fp] = f_xy
        out[..., fp : 2 * fp] = f_xz
        out[..., 2 * fp :] = f_yz
    else:
        total = f_xy + f_xz + f_yz
        out = (total / 3.0 if triplanes.mode == "mean" else total).astype(np.float32)
    return VoxelGrid(out)
