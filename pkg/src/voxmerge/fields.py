"""Decoding voxel features into geometry (SDF) and color fields.

The neural decoders that produce real feature grids live upstream; this
module pins down their contract: a decoder maps an F-vector to a scalar
signed distance and an RGB triple in [0, 1]. The built-in
:class:`ChannelDecoder` simply reads those values from fixed channels,
which is also the layout the synthetic scene generator writes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DataError, DimensionError
from .grid import VoxelGrid


@dataclass(frozen=True)
class ChannelDecoder:
    """Reads SDF and RGB directly from grid channels."""

    sdf_channel: int = 0
    rgb_channels: tuple[int, int, int] = (1, 2, 3)

    def decode(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        f = features.shape[-1]
        needed = max(self.sdf_channel, *self.rgb_channels)
        if needed >= f:
            raise DimensionError(
                f"channel decoder needs channel {needed}, grid has F={f}"
            )
        sdf = features[..., self.sdf_channel]
        rgb = features[..., list(self.rgb_channels)]
        return sdf, np.clip(rgb, 0.0, 1.0)


@dataclass(frozen=True)
class CallableDecoder:
    """Adapts a vectorized ``(..., F) -> ((...), (..., 3))`` callable."""

    fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

    def decode(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sdf, rgb = self.fn(features)
        return np.asarray(sdf), np.clip(np.asarray(rgb), 0.0, 1.0)


def decode_fields(grid: VoxelGrid, decoder=None) -> tuple[VoxelGrid, VoxelGrid]:
    """Apply a decoder per voxel, returning (sdf grid F=1, rgb grid F=3)."""
    decoder = decoder or ChannelDecoder()
    sdf, rgb = decoder.decode(grid.data)
    a = grid.resolution
    if sdf.shape != (a, a, a):
        raise DimensionError(f"decoder returned sdf shape {sdf.shape}, expected {(a, a, a)}")
    if rgb.shape != (a, a, a, 3):
        raise DimensionError(
            f"decoder returned rgb shape {rgb.shape}, expected {(a, a, a, 3)}"
        )
    if not (np.isfinite(sdf).all() and np.isfinite(rgb).all()):
        raise DataError("decoder produced non-finite field values")
    # copy so the field grids never alias the feature grid's buffer
    return (
        VoxelGrid(np.ascontiguousarray(sdf[..., None], dtype=np.float32)),
        VoxelGrid(np.ascontiguousarray(rgb, dtype=np.float32)),
    )
