"""Analytic CSG scenes: exact ground truth for merge and chamfer testing.

A scene is a union of labeled primitives (spheres, boxes, axis-aligned
cylinders), each with a color. Rasterization evaluates the exact union SDF
at voxel centers (channel 0), writes the color of the nearest primitive
inside the union (channels 1..3, zero outside), and zero-pads any further
channels, matching the built-in channel decoder layout. Each primitive
also yields the mask of voxels it occupies.

``make_edit_pair`` composes two scenes differing by one replaced primitive
into the grids and masks a merge consumes, optionally corrupting one
untouched region with deterministic noise to mimic collateral damage from
an upstream 2D edit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, SchemaError
from .grid import Mask3D, VoxelGrid, voxel_centers

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class Sphere:
    label: str
    center: tuple[float, float, float]
    radius: float
    rgb: tuple[float, float, float] = (0.8, 0.8, 0.8)

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError(f"sphere {self.label!r}: radius must be > 0")

    def sdf(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - np.asarray(self.center), axis=-1) - self.radius


@dataclass(frozen=True)
class Box:
    label: str
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    rgb: tuple[float, float, float] = (0.8, 0.8, 0.8)

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise DomainError(f"box {self.label!r}: half extents must be > 0")

    def sdf(self, points: np.ndarray) -> np.ndarray:
        q = np.abs(points - np.asarray(self.center)) - np.asarray(self.half_extents)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(q.max(axis=-1), 0.0)
        return outside + inside


@dataclass(frozen=True)
class Cylinder:
    label: str
    center: tuple[float, float, float]
    radius: float
    half_height: float
    axis: str = "z"
    rgb: tuple[float, float, float] = (0.8, 0.8, 0.8)

    def __post_init__(self):
        if self.radius <= 0 or self.half_height <= 0:
            raise DomainError(f"cylinder {self.label!r}: radius and half height must be > 0")
        if self.axis not in AXES:
            raise DomainError(f"cylinder {self.label!r}: axis must be one of {AXES}")

    def sdf(self, points: np.ndarray) -> np.ndarray:
        rel = points - np.asarray(self.center)
        ax = AXES.index(self.axis)
        perp = np.delete(rel, ax, axis=-1)
        d_radial = np.linalg.norm(perp, axis=-1) - self.radius
        d_axial = np.abs(rel[..., ax]) - self.half_height
        d = np.stack([d_radial, d_axial], axis=-1)
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=-1)
        inside = np.minimum(d.max(axis=-1), 0.0)
        return outside + inside


Primitive = Sphere | Box | Cylinder

_SHAPE_NAMES = {"sphere": Sphere, "box": Box, "cylinder": Cylinder}


@dataclass
class SceneSpec:
    """Union of labeled primitives; labels must be unique."""

    primitives: list[Primitive]

    def __post_init__(self):
        if not self.primitives:
            raise DomainError("a scene needs at least one primitive")
        labels = [p.label for p in self.primitives]
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate primitive labels in {labels}")

    def labels(self) -> list[str]:
        return [p.label for p in self.primitives]

    def __getitem__(self, label: str) -> Primitive:
        for p in self.primitives:
            if p.label == label:
                return p
        raise KeyError(label)


def scene_from_dict(doc: dict) -> SceneSpec:
    """Parse the scene JSON schema: {"primitives": [{"shape": ..., ...}, ...]}."""
    if not isinstance(doc, dict) or "primitives" not in doc:
        raise SchemaError('scene document needs a "primitives" list')
    prims = []
    for i, entry in enumerate(doc["primitives"]):
        entry = dict(entry)
        shape = entry.pop("shape", None)
        if shape not in _SHAPE_NAMES:
            raise SchemaError(
                f"primitive {i}: shape must be one of {sorted(_SHAPE_NAMES)}, got {shape!r}"
            )
        for key in ("center", "half_extents", "rgb"):
            if key in entry:
                entry[key] = tuple(float(v) for v in entry[key])
        try:
            prims.append(_SHAPE_NAMES[shape](**entry))
        except TypeError as exc:
            raise SchemaError(f"primitive {i}: {exc}") from exc
    return SceneSpec(prims)


def scene_to_dict(scene: SceneSpec) -> dict:
    out = []
    for p in scene.primitives:
        entry = {"shape": type(p).__name__.lower(), "label": p.label, "rgb": list(p.rgb),
                 "center": list(p.center)}
        if isinstance(p, Sphere):
            entry["radius"] = p.radius
        elif isinstance(p, Box):
            entry["half_extents"] = list(p.half_extents)
        else:
            entry.update(radius=p.radius, half_height=p.half_height, axis=p.axis)
        out.append(entry)
    return {"primitives": out}


def rasterize(scene: SceneSpec, resolution: int, channels: int = 4
              ) -> tuple[VoxelGrid, dict[str, Mask3D]]:
    """Evaluate the scene on a cubic grid.

    Returns the feature grid (exact union SDF, nearest-primitive color
    inside the union, zero padding) and one occupancy mask per label.
    """
    if channels < 4:
        raise DimensionError(f"channel-decoder layout needs F >= 4, got {channels}")
    if resolution < 1:
        raise DomainError(f"resolution must be >= 1, got {resolution}")
    c = voxel_centers(resolution)
    x, y, z = np.meshgrid(c, c, c, indexing="ij")
    points = np.stack([x, y, z], axis=-1)

    union = None
    nearest = None
    masks: dict[str, Mask3D] = {}
    for idx, prim in enumerate(scene.primitives):
        d = prim.sdf(points)
        masks[prim.label] = Mask3D(d <= 0.0)
        if union is None:
            union = d
            nearest = np.zeros(d.shape, dtype=np.int64)
        else:
            closer = d < union
            union = np.where(closer, d, union)
            nearest[closer] = idx

    data = np.zeros((resolution,) * 3 + (channels,), dtype=np.float32)
    data[..., 0] = union
    palette = np.asarray([p.rgb for p in scene.primitives], dtype=np.float32)
    inside = union <= 0.0
    data[..., 1:4][inside] = palette[nearest[inside]]
    return VoxelGrid(data), masks


@dataclass
class EditPair:
    """Everything a merge consumes, plus the uncorrupted ground truth."""

    original: VoxelGrid
    edited: VoxelGrid
    mask_original: Mask3D
    mask_edited: Mask3D
    truth: VoxelGrid
    removed_label: str | None
    added_label: str | None


def make_edit_pair(original_scene: SceneSpec, edited_scene: SceneSpec,
                   corrupt_region: str | None = None, resolution: int = 64,
                   channels: int = 4, seed: int = 42,
                   noise_amplitude: float = 0.3) -> EditPair:
    """Rasterize an original/edited scene pair into merge inputs.

    The scenes must be identical or differ by exactly one replaced
    primitive (one label removed, one added). ``corrupt_region`` names an
    untouched primitive whose voxels receive additive uniform noise on all
    channels in the edited grid, simulating damage outside the intended
    edit; it must not overlap either edit mask. The truth grid is the
    edited scene without corruption.
    """
    orig_labels = set(original_scene.labels())
    edit_labels = set(edited_scene.labels())
    removed = sorted(orig_labels - edit_labels)
    added = sorted(edit_labels - orig_labels)
    if len(removed) > 1 or len(added) > 1 or (len(removed) != len(added)):
        raise DomainError(
            f"scenes must differ by exactly one replaced primitive, got "
            f"removed={removed}, added={added}"
        )
    for label in sorted(orig_labels & edit_labels):
        if original_scene[label] != edited_scene[label]:
            raise DomainError(f"shared primitive {label!r} differs between the scenes")

    grid_original, masks_original = rasterize(original_scene, resolution, channels)
    grid_truth, masks_edited = rasterize(edited_scene, resolution, channels)

    a = resolution
    mask_removed = masks_original[removed[0]] if removed else Mask3D.empty(a)
    mask_added = masks_edited[added[0]] if added else Mask3D.empty(a)

    edited_data = grid_truth.data.copy()
    if corrupt_region is not None:
        if corrupt_region not in (orig_labels & edit_labels):
            raise DomainError(
                f"corrupt region {corrupt_region!r} must name an untouched primitive"
            )
        corrupt = masks_edited[corrupt_region].bits
        if (corrupt & (mask_removed.bits | mask_added.bits)).any():
            raise DomainError(
                f"corrupt region {corrupt_region!r} overlaps the edit masks"
            )
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-noise_amplitude, noise_amplitude,
                            size=(int(corrupt.sum()), channels))
        edited_data[corrupt] += noise.astype(np.float32)

    return EditPair(
        original=grid_original,
        edited=VoxelGrid(edited_data),
        mask_original=mask_removed,
        mask_edited=mask_added,
        truth=grid_truth,
        removed_label=removed[0] if removed else None,
        added_label=added[0] if added else None,
    )
