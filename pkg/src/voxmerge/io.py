"""File formats: VXG volumes, mask containers, embeddings JSON, PLY meshes, PNGs.

The VXG container is a 20-byte little-endian header followed by a raw
payload::

    bytes 0..3   magic "VXGF"
    bytes 4..7   version, u32 (currently 1)
    bytes 8..11  resolution A, u32
    bytes 12..15 channels F, u32
    byte  16     dtype: 0 = float32, 1 = uint8
    bytes 17..19 reserved, must be 0

The payload holds A^3 * F values ordered channel-fastest, then x, then y,
then z ascending. Masks reuse the container with F=1 and dtype=1 (nonzero
means set). Readers validate the header and the exact payload length
before allocating anything, so a hostile header cannot trigger a large
allocation.
"""

from __future__ import annotations

import json
import os
import struct
from typing import Iterator

import numpy as np

from .errors import DataError, FormatError, SchemaError
from .grid import Mask3D, VoxelGrid
from .mesh import TexturedMesh
from .metrics import EmbeddingSet
from .multiview import MaskStack2D, MultiViewFeature

VXG_MAGIC = b"VXGF"
VXG_VERSION = 1
_HEADER = struct.Struct("<4sIIIB3s")
HEADER_SIZE = _HEADER.size  # 20

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("u1")}


def _read_header(raw: bytes, path) -> tuple[int, int, int]:
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"{path}: truncated header, {len(raw)} bytes", offset=0)
    magic, version, a, f, dtype, reserved = _HEADER.unpack_from(raw)
    if magic != VXG_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {VXG_MAGIC!r}", offset=0)
    if version != VXG_VERSION:
        raise FormatError(f"{path}: unsupported version {version}", offset=4)
    if a < 1:
        raise FormatError(f"{path}: resolution must be >= 1, got {a}", offset=8)
    if f < 1:
        raise FormatError(f"{path}: channel count must be >= 1, got {f}", offset=12)
    if dtype not in _DTYPES:
        raise FormatError(f"{path}: unknown dtype code {dtype}", offset=16)
    if reserved != b"\x00\x00\x00":
        raise FormatError(f"{path}: reserved bytes must be zero", offset=17)
    return a, f, dtype


def _check_payload_size(path, a: int, f: int, dtype: int) -> int:
    # plain python ints: no overflow, and no allocation happens until the
    # declared size has been checked against the actual file size
    expected = a * a * a * f * _DTYPES[dtype].itemsize
    actual = os.path.getsize(path) - HEADER_SIZE
    if actual != expected:
        raise FormatError(
            f"{path}: payload is {actual} bytes, header declares {expected}",
            offset=HEADER_SIZE,
        )
    return expected


def _file_order(data: np.ndarray) -> np.ndarray:
    # in-memory axes are (x, y, z, c); the file stores (z, y, x, c) C-order
    return np.ascontiguousarray(data.transpose(2, 1, 0, 3))


def _memory_order(payload: np.ndarray, a: int, f: int) -> np.ndarray:
    return np.ascontiguousarray(payload.reshape(a, a, a, f).transpose(2, 1, 0, 3))


def write_grid(grid: VoxelGrid, path) -> None:
    header = _HEADER.pack(VXG_MAGIC, VXG_VERSION, grid.resolution, grid.channels, 0,
                          b"\x00\x00\x00")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_file_order(grid.data).tobytes())


def read_grid(path) -> VoxelGrid:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
        a, f, dtype = _read_header(raw, path)
        if dtype != 0:
            raise FormatError(
                f"{path}: grids need dtype 0 (float32); use read_mask for dtype 1",
                offset=16,
            )
        _check_payload_size(path, a, f, dtype)
        payload = np.frombuffer(fh.read(), dtype=_DTYPES[0])
    return VoxelGrid(_memory_order(payload, a, f))


def write_mask(mask: Mask3D, path) -> None:
    header = _HEADER.pack(VXG_MAGIC, VXG_VERSION, mask.resolution, 1, 1, b"\x00\x00\x00")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_file_order(mask.bits[..., None].astype(np.uint8)).tobytes())


def read_mask(path) -> Mask3D:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
        a, f, dtype = _read_header(raw, path)
        if dtype != 1 or f != 1:
            raise FormatError(
                f"{path}: masks need dtype 1 and F=1, got dtype {dtype}, F={f}",
                offset=12,
            )
        _check_payload_size(path, a, f, dtype)
        payload = np.frombuffer(fh.read(), dtype=_DTYPES[1])
    return Mask3D(_memory_order(payload, a, 1)[..., 0] != 0)


def iter_grid_slabs(path, slab_depth: int = 16) -> Iterator[tuple[int, int, np.ndarray]]:
    """Stream a float32 grid as z slabs ``(z0, z1, array (A, A, dz, F))``.

    Peak memory is one slab, which is what lets the in-place merge run at
    roughly one resident grid.
    """
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
        a, f, dtype = _read_header(raw, path)
        if dtype != 0:
            raise FormatError(f"{path}: slab streaming needs dtype 0", offset=16)
        _check_payload_size(path, a, f, dtype)
        slab_depth = max(1, slab_depth)
        plane_bytes = a * a * f * _DTYPES[0].itemsize
        for z0 in range(0, a, slab_depth):
            z1 = min(z0 + slab_depth, a)
            buf = fh.read(plane_bytes * (z1 - z0))
            slab = np.frombuffer(buf, dtype=_DTYPES[0]).reshape(z1 - z0, a, a, f)
            yield z0, z1, np.ascontiguousarray(slab.transpose(2, 1, 0, 3))


# -- embeddings ---------------------------------------------------------------

_EMBEDDING_KEYS = ("image_input", "image_edited", "text_input", "text_edited",
                   "text_word", "text_generic")


def read_embeddings(path) -> EmbeddingSet:
    """Load the embeddings JSON document and normalize it into an EmbeddingSet."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    missing = [k for k in _EMBEDDING_KEYS if k not in doc]
    if missing:
        raise SchemaError(f"{path}: missing keys {missing}")
    arrays = {}
    for key in _EMBEDDING_KEYS:
        try:
            arrays[key] = np.asarray(doc[key], dtype=np.float64)
        except ValueError as exc:
            raise SchemaError(f"{path}: key {key!r} is ragged or non-numeric") from exc
    for key in ("image_input", "image_edited"):
        if arrays[key].ndim != 2:
            raise SchemaError(f"{path}: {key} must be a matrix (N x D)")
    d = arrays["image_input"].shape[1] if arrays["image_input"].ndim == 2 else None
    for key in _EMBEDDING_KEYS[2:]:
        if arrays[key].ndim != 1:
            raise SchemaError(f"{path}: {key} must be a flat vector")
        if arrays[key].shape[0] != d:
            raise SchemaError(
                f"{path}: {key} has dimension {arrays[key].shape[0]}, images have D={d}"
            )
    if arrays["image_edited"].shape != arrays["image_input"].shape:
        raise SchemaError(
            f"{path}: image_edited shape {arrays['image_edited'].shape} does not match "
            f"image_input {arrays['image_input'].shape}"
        )
    try:
        return EmbeddingSet(**arrays)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_embeddings(embeddings: EmbeddingSet, path) -> None:
    doc = {
        "image_input": embeddings.image_input.tolist(),
        "image_edited": embeddings.image_edited.tolist(),
        "text_input": embeddings.text_input.tolist(),
        "text_edited": embeddings.text_edited.tolist(),
        "text_word": embeddings.text_word.tolist(),
        "text_generic": embeddings.text_generic.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


# -- PLY meshes ---------------------------------------------------------------

_PLY_VERTEX = np.dtype(
    [("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("red", "u1"), ("green", "u1"),
     ("blue", "u1")]
)
_PLY_FACE = np.dtype([("count", "u1"), ("i0", "<i4"), ("i1", "<i4"), ("i2", "<i4")])


def write_mesh_ply(mesh: TexturedMesh, path) -> None:
    """Binary little-endian PLY with per-vertex 8-bit colors.

    Colorless meshes are written white.
    """
    n, m = mesh.n_vertices, mesh.n_faces
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {n}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        f"element face {m}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    verts = np.empty(n, dtype=_PLY_VERTEX)
    verts["x"], verts["y"], verts["z"] = mesh.vertices.T
    if mesh.colors is None:
        rgb = np.full((n, 3), 255, dtype=np.uint8)
    else:
        rgb = np.round(np.clip(mesh.colors, 0.0, 1.0) * 255.0).astype(np.uint8)
    verts["red"], verts["green"], verts["blue"] = rgb.T

    faces = np.empty(m, dtype=_PLY_FACE)
    faces["count"] = 3
    faces["i0"], faces["i1"], faces["i2"] = mesh.faces.T

    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(verts.tobytes())
        fh.write(faces.tobytes())


def read_mesh_ply(path) -> TexturedMesh:
    """Read the PLY layout produced by :func:`write_mesh_ply`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply\n") or end < 0:
        raise FormatError(f"{path}: not a PLY file", offset=0)
    header_lines = blob[:end].decode("ascii", errors="replace").splitlines()
    if "format binary_little_endian 1.0" not in header_lines:
        raise FormatError(f"{path}: only binary little-endian PLY is supported")
    n = m = None
    for line in header_lines:
        if line.startswith("element vertex "):
            n = int(line.split()[-1])
        elif line.startswith("element face "):
            m = int(line.split()[-1])
    if n is None or m is None:
        raise FormatError(f"{path}: missing vertex or face element")
    body = blob[end + len(b"end_header\n"):]
    need = n * _PLY_VERTEX.itemsize + m * _PLY_FACE.itemsize
    if len(body) != need:
        raise FormatError(
            f"{path}: body is {len(body)} bytes, header declares {need}",
            offset=end + len(b"end_header\n"),
        )
    verts = np.frombuffer(body[: n * _PLY_VERTEX.itemsize], dtype=_PLY_VERTEX)
    faces = np.frombuffer(body[n * _PLY_VERTEX.itemsize:], dtype=_PLY_FACE)
    if m and (faces["count"] != 3).any():
        raise FormatError(f"{path}: only triangle faces are supported")
    positions = np.stack([verts["x"], verts["y"], verts["z"]], axis=1)
    colors = np.stack([verts["red"], verts["green"], verts["blue"]], axis=1) / 255.0
    tris = np.stack([faces["i0"], faces["i1"], faces["i2"]], axis=1)
    return TexturedMesh(positions, tris.astype(np.int32), colors.astype(np.float32))


# -- PNG images and 2D masks --------------------------------------------------


def read_image_stack(paths) -> MultiViewFeature:
    """Load per-view RGB(A) PNGs as a float stack in [0, 1]."""
    from PIL import Image

    views = []
    for p in paths:
        with Image.open(p) as img:
            arr = np.asarray(img.convert("RGBA" if img.mode == "RGBA" else "RGB"))
        views.append(arr.astype(np.float32) / 255.0)
    shapes = {v.shape for v in views}
    if len(shapes) != 1:
        raise FormatError(f"views disagree in size/channels: {sorted(shapes)}")
    return MultiViewFeature(np.stack(views))


def write_image_stack(images: MultiViewFeature, paths) -> None:
    from PIL import Image

    paths = list(paths)
    if len(paths) != images.n_views:
        raise FormatError(f"{images.n_views} views but {len(paths)} output paths")
    for view, p in zip(images.data, paths):
        arr = np.round(np.clip(view, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(arr).save(p, format="PNG")


def read_mask_stack(paths, threshold: int = 128) -> MaskStack2D:
    """Load grayscale PNGs as binary masks; pixels >= threshold are set."""
    from PIL import Image

    views = []
    for p in paths:
        with Image.open(p) as img:
            arr = np.asarray(img.convert("L"))
        views.append((arr >= threshold).astype(np.float32))
    shapes = {v.shape for v in views}
    if len(shapes) != 1:
        raise FormatError(f"mask views disagree in size: {sorted(shapes)}")
    return MaskStack2D(np.stack(views))


def write_mask_stack(masks: MaskStack2D, paths) -> None:
    from PIL import Image

    paths = list(paths)
    if len(paths) != masks.n_views:
        raise FormatError(f"{masks.n_views} views but {len(paths)} output paths")
    for view, p in zip(masks.data, paths):
        arr = np.round(np.clip(view, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(p, format="PNG")
