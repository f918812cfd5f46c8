import json
import struct
import tracemalloc

import numpy as np
import pytest

from voxmerge import (
    DataError,
    EmbeddingSet,
    FormatError,
    Mask3D,
    SchemaError,
    TexturedMesh,
    VoxelGrid,
)
from voxmerge.io import (
    HEADER_SIZE,
    iter_grid_slabs,
    read_embeddings,
    read_grid,
    read_image_stack,
    read_mask,
    read_mask_stack,
    read_mesh_ply,
    write_embeddings,
    write_grid,
    write_image_stack,
    write_mask,
    write_mask_stack,
    write_mesh_ply,
)
from voxmerge.multiview import MaskStack2D, MultiViewFeature

from oracles import read_ply_reference


def random_grid(rng, a=8, f=4):
    return VoxelGrid(rng.standard_normal((a, a, a, f)).astype(np.float32))


class TestVxgGrid:
    def test_roundtrip_values_and_bytes(self, tmp_path):
        rng = np.random.default_rng(0)
        grid = random_grid(rng)
        path = tmp_path / "g.vxg"
        write_grid(grid, path)
        again = read_grid(path)
        assert np.array_equal(again.data, grid.data)
        second = tmp_path / "g2.vxg"
        write_grid(again, second)
        assert path.read_bytes() == second.read_bytes()

    def test_payload_layout_is_channel_fastest_then_xyz(self, tmp_path):
        a, f = 2, 3
        data = np.arange(a * a * a * f, dtype=np.float32).reshape(a, a, a, f)
        path = tmp_path / "g.vxg"
        write_grid(VoxelGrid(data), path)
        payload = np.frombuffer(path.read_bytes()[HEADER_SIZE:], dtype="<f4")
        flat = 0
        for iz in range(a):
            for iy in range(a):
                for ix in range(a):
                    for c in range(f):
                        assert payload[flat] == data[ix, iy, iz, c]
                        flat += 1

    def test_truncated_payload_reports_sizes(self, tmp_path):
        rng = np.random.default_rng(1)
        path = tmp_path / "g.vxg"
        write_grid(random_grid(rng), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-7])
        with pytest.raises(FormatError) as err:
            read_grid(path)
        assert "8185" in str(err.value) and "8192" in str(err.value)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "g.vxg"
        write_grid(random_grid(np.random.default_rng(2)), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as err:
            read_grid(path)
        assert err.value.offset == 0

    def test_bad_version_and_reserved(self, tmp_path):
        path = tmp_path / "g.vxg"
        write_grid(random_grid(np.random.default_rng(3)), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as err:
            read_grid(path)
        assert err.value.offset == 4

        write_grid(random_grid(np.random.default_rng(3)), path)
        blob = bytearray(path.read_bytes())
        blob[17] = 1
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError) as err:
            read_grid(path)
        assert err.value.offset == 17

    def test_hostile_header_rejected_without_allocation(self, tmp_path):
        # header declares a ~4 TB payload over a tiny file
        path = tmp_path / "huge.vxg"
        header = struct.pack("<4sIIIB3s", b"VXGF", 1, 10_000, 1, 0, b"\x00\x00\x00")
        path.write_bytes(header + b"\x00" * 64)
        tracemalloc.start()
        tracemalloc.reset_peak()
        with pytest.raises(FormatError):
            read_grid(path)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert peak < 1_000_000

    def test_nan_payload_rejected(self, tmp_path):
        path = tmp_path / "g.vxg"
        grid = random_grid(np.random.default_rng(4), a=4, f=1)
        write_grid(grid, path)
        blob = bytearray(path.read_bytes())
        blob[HEADER_SIZE : HEADER_SIZE + 4] = struct.pack("<f", float("nan"))
        path.write_bytes(bytes(blob))
        with pytest.raises(DataError):
            read_grid(path)

    def test_streamed_slabs_match_full_read(self, tmp_path):
        rng = np.random.default_rng(5)
        grid = random_grid(rng, a=9, f=3)
        path = tmp_path / "g.vxg"
        write_grid(grid, path)
        rebuilt = np.empty_like(grid.data)
        covered = 0
        for z0, z1, slab in iter_grid_slabs(path, slab_depth=4):
            rebuilt[:, :, z0:z1] = slab
            covered = z1
        assert covered == 9
        assert np.array_equal(rebuilt, grid.data)


class TestMask:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(6)
        mask = Mask3D(rng.random((6, 6, 6)) < 0.4)
        path = tmp_path / "m.msk"
        write_mask(mask, path)
        again = read_mask(path)
        assert np.array_equal(again.bits, mask.bits)
        second = tmp_path / "m2.msk"
        write_mask(again, second)
        assert path.read_bytes() == second.read_bytes()

    def test_nonzero_payload_counts_as_set(self, tmp_path):
        # hand-built container with values 0 and 255
        a = 2
        payload = np.array([0, 255, 0, 255, 255, 0, 0, 255], dtype=np.uint8)
        header = struct.pack("<4sIIIB3s", b"VXGF", 1, a, 1, 1, b"\x00\x00\x00")
        path = tmp_path / "m.msk"
        path.write_bytes(header + payload.tobytes())
        mask = read_mask(path)
        assert mask.popcount == 4

    def test_grid_reader_rejects_mask_dtype(self, tmp_path):
        mask = Mask3D(np.ones((3, 3, 3), bool))
        path = tmp_path / "m.msk"
        write_mask(mask, path)
        with pytest.raises(FormatError):
            read_grid(path)


class TestEmbeddingsJson:
    def make_set(self, rng, n=4, d=8):
        return EmbeddingSet(
            image_input=rng.standard_normal((n, d)),
            image_edited=rng.standard_normal((n, d)),
            text_input=rng.standard_normal(d),
            text_edited=rng.standard_normal(d),
            text_word=rng.standard_normal(d),
            text_generic=rng.standard_normal(d),
        )

    def test_roundtrip_identity(self, tmp_path):
        e = self.make_set(np.random.default_rng(7))
        path = tmp_path / "e.json"
        write_embeddings(e, path)
        again = read_embeddings(path)
        assert np.array_equal(again.image_input, e.image_input)
        assert np.array_equal(again.image_edited, e.image_edited)
        assert np.array_equal(again.text_word, e.text_word)

    def test_dimension_mismatch_is_schema_error(self, tmp_path):
        rng = np.random.default_rng(8)
        doc = {
            "image_input": rng.standard_normal((3, 512)).tolist(),
            "image_edited": rng.standard_normal((3, 512)).tolist(),
            "text_input": rng.standard_normal(512).tolist(),
            "text_edited": rng.standard_normal(511).tolist(),
            "text_word": rng.standard_normal(512).tolist(),
            "text_generic": rng.standard_normal(512).tolist(),
        }
        path = tmp_path / "e.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError) as err:
            read_embeddings(path)
        assert "text_edited" in str(err.value)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "e.json"
        path.write_text(json.dumps({"image_input": [[1.0]]}))
        with pytest.raises(SchemaError):
            read_embeddings(path)

    def test_ragged_rows(self, tmp_path):
        doc = {
            "image_input": [[1.0, 0.0], [1.0]],
            "image_edited": [[1.0, 0.0], [0.0, 1.0]],
            "text_input": [1.0, 0.0],
            "text_edited": [0.0, 1.0],
            "text_word": [1.0, 0.0],
            "text_generic": [0.0, 1.0],
        }
        path = tmp_path / "e.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            read_embeddings(path)


class TestPly:
    def single_triangle(self):
        verts = np.array([[0, 0, 0], [0.5, 0, 0], [0, 0.5, 0]], np.float32)
        colors = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]], np.float32)
        return TexturedMesh(verts, np.array([[0, 1, 2]], np.int32), colors)

    def test_reference_parser_reads_our_file(self, tmp_path):
        path = tmp_path / "t.ply"
        write_mesh_ply(self.single_triangle(), path)
        vertices, colors, faces = read_ply_reference(path)
        assert len(vertices) == 3
        assert faces == [(0, 1, 2)]
        assert colors[0] == (255, 0, 0)

    def test_roundtrip_identity_on_quantized_colors(self, tmp_path):
        rng = np.random.default_rng(9)
        verts = rng.standard_normal((10, 3)).astype(np.float32)
        colors = (rng.integers(0, 256, (10, 3)) / 255.0).astype(np.float32)
        faces = rng.integers(0, 10, (6, 3)).astype(np.int32)
        mesh = TexturedMesh(verts, faces, colors)
        path = tmp_path / "m.ply"
        write_mesh_ply(mesh, path)
        again = read_mesh_ply(path)
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.faces, mesh.faces)
        assert np.allclose(again.colors, mesh.colors, atol=1e-6)
        second = tmp_path / "m2.ply"
        write_mesh_ply(again, second)
        assert path.read_bytes() == second.read_bytes()

    def test_colorless_mesh_written_white(self, tmp_path):
        mesh = TexturedMesh(
            np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], np.float32),
            np.array([[0, 1, 2]], np.int32),
        )
        path = tmp_path / "w.ply"
        write_mesh_ply(mesh, path)
        _, colors, _ = read_ply_reference(path)
        assert colors == [(255, 255, 255)] * 3

    def test_truncated_body(self, tmp_path):
        path = tmp_path / "t.ply"
        write_mesh_ply(self.single_triangle(), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-3])
        with pytest.raises(FormatError):
            read_mesh_ply(path)


class TestPng:
    def test_image_stack_roundtrip(self, tmp_path):
        rng = np.random.default_rng(10)
        quantized = rng.integers(0, 256, (2, 6, 5, 3)).astype(np.float32) / 255.0
        images = MultiViewFeature(quantized)
        paths = [tmp_path / "v0.png", tmp_path / "v1.png"]
        write_image_stack(images, paths)
        again = read_image_stack(paths)
        assert np.allclose(again.data, images.data, atol=1e-6)

    def test_mask_stack_threshold(self, tmp_path):
        data = np.zeros((1, 4, 4), np.float32)
        data[0, :2] = 1.0
        paths = [tmp_path / "m.png"]
        write_mask_stack(MaskStack2D(data), paths)
        again = read_mask_stack(paths)
        assert np.array_equal(again.data, data)
