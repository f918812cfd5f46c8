"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report. Tolerances are pinned here and nowhere else.
"""

import json
import struct
import time
import tracemalloc
from contextlib import contextmanager

import numpy as np
import pytest

from voxmerge import (
    EmbeddingSet,
    Mask3D,
    MergeConfig,
    MultiViewFeature,
    MaskStack2D,
    PointCloud,
    TexturedMesh,
    VoxelGrid,
    average_merge,
    average_merge_inplace,
    blend_features,
    blend_shell,
    chamfer,
    copy_paste_merge,
    corner_empty_feature,
    decode_fields,
    dilate3d,
    direction_score,
    downsample_mask,
    make_edit_pair,
    marching_cubes,
    prompt_diff,
    sample_surface,
    voxel_centers,
)
from voxmerge.cli import main as cli_main
from voxmerge.io import (
    read_embeddings,
    read_grid,
    read_mask,
    read_mesh_ply,
    write_embeddings,
    write_grid,
    write_mask,
    write_mesh_ply,
)
from voxmerge.metrics import all_scores
from voxmerge.prompts import PromptPair

from oracles import merge_reference
from scenes import edited_scene, original_scene


@contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"\n[acceptance] criterion {number} ({title}): FAIL")
        raise
    print(f"\n[acceptance] criterion {number} ({title}): PASS")


def mesh_points(grid, n=10000, seed=0):
    sdf, _ = decode_fields(grid)
    return sample_surface(marching_cubes(sdf, 0.0), n, seed=seed)


def test_criterion_01_merge_oracle_equivalence():
    with criterion(1, "merge matches brute-force reference on 200 random instances"):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        for index in range(200):
            a = int(rng.integers(2, 9))
            f = int(rng.integers(1, 5))
            original = VoxelGrid(rng.standard_normal((a, a, a, f)).astype(np.float32))
            edited = VoxelGrid(rng.standard_normal((a, a, a, f)).astype(np.float32))
            mask_original = Mask3D(rng.random((a, a, a)) < 0.25)
            mask_edited = Mask3D(rng.random((a, a, a)) < 0.25)
            config = MergeConfig(
                dilation=int(rng.choice([0, 1, 2])),
                theta=float(rng.choice([0.0, 0.5, 1.0])),
                connectivity=int(rng.choice([6, 26])),
                empty_feature=rng.standard_normal(f).astype(np.float32),
            )
            got = average_merge(original, edited, mask_original, mask_edited, config)
            want = merge_reference(
                original.data, edited.data, mask_original.bits, mask_edited.bits,
                config.dilation, config.theta, config.connectivity,
                config.empty_feature,
            )
            worst = np.abs(got.data.astype(np.float64) - want).max()
            assert worst <= 1e-6, f"instance {index}: max component error {worst}"
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"200 instances took {elapsed:.2f}s"


def test_criterion_02_preservation_guarantee():
    with criterion(2, "voxels outside the dilated/removal masks are bit-identical"):
        for corrupt in (None, "anchor"):
            for resolution in (16, 32):
                pair = make_edit_pair(original_scene(), edited_scene(), corrupt,
                                      resolution=resolution)
                for dilation in (0, 1, 2):
                    for connectivity in (6, 26):
                        config = MergeConfig(
                            dilation=dilation, theta=0.5, connectivity=connectivity,
                            empty_feature=corner_empty_feature(pair.original),
                        )
                        out = average_merge(pair.original, pair.edited,
                                            pair.mask_original, pair.mask_edited,
                                            config)
                        grown = dilate3d(pair.mask_edited, dilation, connectivity)
                        protected = ~(grown.bits | pair.mask_original.bits)
                        assert np.array_equal(
                            out.data[protected], pair.original.data[protected]
                        ), f"corrupt={corrupt} A={resolution} d={dilation} conn={connectivity}"


def test_criterion_03_chamfer_ablation_ordering():
    with criterion(3, "chamfer ordering raw > copy-paste >= average, 10x margin"):
        pair = make_edit_pair(original_scene(), edited_scene(), "anchor", resolution=64)
        config = MergeConfig(dilation=2, theta=0.5,
                             empty_feature=corner_empty_feature(pair.original))
        truth_points = mesh_points(pair.truth)

        def cd(grid):
            return chamfer(mesh_points(grid), truth_points) * 1e3

        cd_raw = cd(pair.edited)
        cd_copy = cd(copy_paste_merge(pair.original, pair.edited, pair.mask_original,
                                      pair.mask_edited, config))
        cd_average = cd(average_merge(pair.original, pair.edited, pair.mask_original,
                                      pair.mask_edited, config))
        print(f"    no-merge {cd_raw:.3f} > copy-paste {cd_copy:.3f} "
              f">= average {cd_average:.3f}")
        assert cd_raw > cd_copy
        assert cd_raw >= 10.0 * cd_copy, f"margin {cd_raw / cd_copy:.2f}x < 10x"
        assert cd_copy >= cd_average


def max_adjacent_jump(data, region):
    worst = 0.0
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        touching = region[tuple(lo)] | region[tuple(hi)]
        diff = np.abs(
            data[tuple(lo)].astype(np.float64) - data[tuple(hi)].astype(np.float64)
        ).max(axis=-1)
        if touching.any():
            worst = max(worst, float(diff[touching].max()))
    return worst


def test_criterion_04_boundary_smoothness():
    with criterion(4, "average merge has smaller feature jumps across the shell"):
        pair = make_edit_pair(original_scene(), edited_scene(), resolution=48)
        offset = VoxelGrid(pair.edited.data + np.float32(0.5))
        config = MergeConfig(dilation=2, theta=0.5,
                             empty_feature=corner_empty_feature(pair.original))
        shell = blend_shell(pair.mask_edited, config).bits
        copied = copy_paste_merge(pair.original, offset, pair.mask_original,
                                  pair.mask_edited, config)
        averaged = average_merge(pair.original, offset, pair.mask_original,
                                 pair.mask_edited, config)
        jump_copy = max_adjacent_jump(copied.data, shell)
        jump_average = max_adjacent_jump(averaged.data, shell)
        print(f"    max jump: copy-paste {jump_copy:.4f}, average {jump_average:.4f}")
        assert jump_average < jump_copy


def test_criterion_05_metrics_algebra(tmp_path, capsys):
    with criterion(5, "metric identities, hand fixtures, and the x100 reporting"):
        rng = np.random.default_rng(99)
        for _ in range(100):
            e = EmbeddingSet(
                image_input=rng.standard_normal((70, 512)),
                image_edited=rng.standard_normal((70, 512)),
                text_input=rng.standard_normal(512),
                text_edited=rng.standard_normal(512),
                text_word=rng.standard_normal(512),
                text_generic=rng.standard_normal(512),
            )
            a = direction_score(e, "dir")
            b = direction_score(e, "dir_avg")
            assert abs(a.score - b.score) <= 1e-6
            assert a.reported == a.score * 100.0

        images = rng.standard_normal((70, 512))
        identity = EmbeddingSet(
            image_input=images,
            image_edited=images.copy(),
            text_input=rng.standard_normal(512),
            text_edited=rng.standard_normal(512),
            text_word=np.abs(rng.standard_normal(512)),
            text_generic=np.abs(rng.standard_normal(512)),
        )
        for name, result in all_scores(identity).items():
            assert result.score == 0.0, name

        hand = EmbeddingSet(
            image_input=np.array([[1.0, 0.0]]),
            image_edited=np.array([[0.0, 1.0]]),
            text_input=np.array([1.0, 0.0]),
            text_edited=np.array([0.0, 1.0]),
            text_word=np.array([0.0, 1.0]),
            text_generic=np.array([1.0, 0.0]),
        )
        assert direction_score(hand, "dir").score == pytest.approx(2.0, abs=1e-9)
        assert direction_score(hand, "dir_cos").score == pytest.approx(1.0, abs=1e-9)
        ratio = EmbeddingSet(
            image_input=np.array([[0.2, np.sqrt(1 - 0.04)]]),
            image_edited=np.array([[0.1, np.sqrt(1 - 0.01)]]),
            text_input=np.array([1.0, 0.0]),
            text_edited=np.array([0.0, 1.0]),
            text_word=np.array([1.0, 0.0]),
            text_generic=np.array([1.0, 0.0]),
        )
        from voxmerge import diff_score

        assert diff_score(ratio, "edit").score == pytest.approx(0.5, abs=1e-9)

        # the CLI reports score * 100 with two decimals
        path = tmp_path / "identity.json"
        write_embeddings(identity, path)
        assert cli_main(["metrics", str(path)]) == 0
        out = capsys.readouterr().out
        values = [line.split()[1] for line in out.splitlines() if line.strip()]
        assert values == ["0.00"] * 6


def test_criterion_06_marching_cubes_fidelity():
    with criterion(6, "sphere extraction residuals, chamfer bound, and runtime"):
        rng = np.random.default_rng(1)
        raw = rng.standard_normal((10000, 3))
        analytic = PointCloud(0.5 * raw / np.linalg.norm(raw, axis=1, keepdims=True))
        for a in (32, 64, 128):
            c = voxel_centers(a)
            x, y, z = np.meshgrid(c, c, c, indexing="ij")
            sdf = (np.sqrt(x * x + y * y + z * z) - 0.5)[..., None].astype(np.float32)
            start = time.perf_counter()
            mesh = marching_cubes(VoxelGrid(sdf), 0.0)
            elapsed = time.perf_counter() - start
            residual = np.abs(
                np.linalg.norm(mesh.vertices.astype(np.float64), axis=1) - 0.5
            ).max()
            assert residual <= 2.0 * np.sqrt(3.0) / a, f"A={a}: residual {residual}"
            sampled = sample_surface(mesh, 10000, seed=0)
            reported = chamfer(sampled, analytic) * 1e3
            bound = (2.0 / a) ** 2 * 1e3
            print(f"    A={a}: residual {residual:.5f}, chamfer {reported:.4f} "
                  f"< {bound:.4f}, extract {elapsed:.2f}s")
            assert reported < bound
            if a == 128:
                assert elapsed < 5.0, f"A=128 extraction took {elapsed:.2f}s"


def test_criterion_07_merge_performance_and_memory():
    with criterion(7, "A=128 F=40 merge fits the time and memory budgets"):
        a, f = 128, 40
        payload = a * a * a * f * 4
        rng = np.random.default_rng(3)
        original = VoxelGrid(rng.standard_normal((a, a, a, f), dtype=np.float32))
        edited = VoxelGrid(rng.standard_normal((a, a, a, f), dtype=np.float32))
        c = voxel_centers(a)
        x, y, z = np.meshgrid(c, c, c, indexing="ij")
        mask_original = Mask3D(np.sqrt((x + 0.4) ** 2 + y * y + z * z) <= 0.3)
        mask_edited = Mask3D(np.sqrt((x + 0.4) ** 2 + y * y + z * z) <= 0.25)
        config = MergeConfig(dilation=2, theta=0.5)

        tracemalloc.start()
        tracemalloc.reset_peak()
        start = time.perf_counter()
        merged = average_merge(original, edited, mask_original, mask_edited, config)
        elapsed = time.perf_counter() - start
        _, functional_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert merged.resolution == a
        print(f"    functional: {elapsed:.2f}s, peak {functional_peak / payload:.2f}x payload")
        assert elapsed < 10.0
        assert functional_peak < 3 * payload

        scratch = original.copy()
        tracemalloc.start()
        tracemalloc.reset_peak()
        average_merge_inplace(scratch, edited, mask_original, mask_edited, config)
        _, inplace_peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        print(f"    in-place: peak {inplace_peak / payload:.2f}x payload")
        assert inplace_peak < 1.5 * payload


def test_criterion_08_format_roundtrips(tmp_path):
    with criterion(8, "50 randomized write/read roundtrips are bit-exact"):
        rng = np.random.default_rng(8)
        count = 0
        for i in range(20):  # grids
            a = int(rng.integers(2, 9))
            f = int(rng.integers(1, 6))
            grid = VoxelGrid(rng.standard_normal((a, a, a, f)).astype(np.float32))
            p1, p2 = tmp_path / f"g{i}.vxg", tmp_path / f"g{i}b.vxg"
            write_grid(grid, p1)
            again = read_grid(p1)
            assert np.array_equal(again.data, grid.data)
            write_grid(again, p2)
            assert p1.read_bytes() == p2.read_bytes()
            count += 1
        for i in range(10):  # masks
            a = int(rng.integers(2, 9))
            mask = Mask3D(rng.random((a, a, a)) < rng.random())
            p1, p2 = tmp_path / f"m{i}.msk", tmp_path / f"m{i}b.msk"
            write_mask(mask, p1)
            again = read_mask(p1)
            assert np.array_equal(again.bits, mask.bits)
            write_mask(again, p2)
            assert p1.read_bytes() == p2.read_bytes()
            count += 1
        for i in range(10):  # meshes
            n = int(rng.integers(3, 30))
            m = int(rng.integers(1, 40))
            mesh = TexturedMesh(
                rng.standard_normal((n, 3)).astype(np.float32),
                rng.integers(0, n, (m, 3)).astype(np.int32),
                (rng.integers(0, 256, (n, 3)) / 255.0).astype(np.float32),
            )
            p1, p2 = tmp_path / f"t{i}.ply", tmp_path / f"t{i}b.ply"
            write_mesh_ply(mesh, p1)
            again = read_mesh_ply(p1)
            assert np.array_equal(again.vertices, mesh.vertices)
            assert np.array_equal(again.faces, mesh.faces)
            write_mesh_ply(again, p2)
            assert p1.read_bytes() == p2.read_bytes()
            count += 1
        for i in range(10):  # embeddings
            n, d = int(rng.integers(1, 8)), int(rng.integers(2, 16))
            e = EmbeddingSet(
                image_input=rng.standard_normal((n, d)),
                image_edited=rng.standard_normal((n, d)),
                text_input=rng.standard_normal(d),
                text_edited=rng.standard_normal(d),
                text_word=rng.standard_normal(d),
                text_generic=rng.standard_normal(d),
            )
            p1, p2 = tmp_path / f"e{i}.json", tmp_path / f"e{i}b.json"
            write_embeddings(e, p1)
            again = read_embeddings(p1)
            for field in ("image_input", "image_edited", "text_input", "text_edited",
                          "text_word", "text_generic"):
                assert np.array_equal(getattr(again, field), getattr(e, field))
            write_embeddings(again, p2)
            assert p1.read_bytes() == p2.read_bytes()
            count += 1
        assert count == 50

        # hostile header: giant declared payload over a tiny file
        hostile = tmp_path / "hostile.vxg"
        hostile.write_bytes(
            struct.pack("<4sIIIB3s", b"VXGF", 1, 2_000_000_000, 64, 0, b"\x00" * 3)
            + b"\x00" * 100
        )
        tracemalloc.start()
        tracemalloc.reset_peak()
        from voxmerge import FormatError

        with pytest.raises(FormatError):
            read_grid(hostile)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert peak < 1_000_000, f"hostile header caused {peak} bytes of allocation"


def test_criterion_09_latent_blending_closed_forms():
    with criterion(9, "mask blending and checkerboard downsampling are exact"):
        rng = np.random.default_rng(9)
        edited = MultiViewFeature(rng.random((4, 8, 8, 4)).astype(np.float32))
        original = MultiViewFeature(rng.random((4, 8, 8, 4)).astype(np.float32))

        ones = MaskStack2D(np.ones((4, 8, 8), np.float32))
        zeros = MaskStack2D(np.zeros((4, 8, 8), np.float32))
        half = MaskStack2D(np.full((4, 8, 8), 0.5, np.float32))

        assert np.array_equal(blend_features(edited, original, ones).data, edited.data)
        assert np.array_equal(blend_features(edited, original, zeros).data, original.data)
        two = MultiViewFeature(np.full((4, 8, 8, 4), 2.0, np.float32))
        zero = MultiViewFeature(np.zeros((4, 8, 8, 4), np.float32))
        assert np.array_equal(
            blend_features(two, zero, half).data,
            np.ones((4, 8, 8, 4), np.float32),
        )

        i, j = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
        board = MaskStack2D(((i + j) % 2).astype(np.float32)[None])
        down = downsample_mask(board, 4, 4, mode="area_soft")
        assert np.array_equal(down.data, np.full((1, 4, 4), 0.5, np.float32))

        block = np.zeros((1, 4, 4), np.float32)
        block[0, :2, :2] = 1.0
        down = downsample_mask(MaskStack2D(block), 2, 2, mode="area_soft")
        expected = np.zeros((1, 2, 2), np.float32)
        expected[0, 0, 0] = 1.0
        assert np.array_equal(down.data, expected)


def test_criterion_10_prompt_diff_worked_examples():
    with criterion(10, "prompt diff reproduces both worked examples"):
        out = prompt_diff(PromptPair("a chicken riding a bike", "a cat riding a bike"))
        assert out.removed_text == "chicken"
        assert out.added_text == "cat"
        assert out.generic_text == "a object riding a bike"

        out = prompt_diff(
            PromptPair("a skull warrior with a sword",
                       "a skull warrior with a viking axe")
        )
        assert out.removed_text == "sword"
        assert out.added_text == "viking axe"
