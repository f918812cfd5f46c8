"""Feature grid to textured mesh: decode, extract, color, export.

The voxel grids carry features that decode into a signed distance field
and a color field. Marching cubes pulls the zero level set out of the SDF,
trilinear sampling of the color field paints the vertices, and the result
goes to a binary PLY any viewer can open.
"""

import os

import numpy as np

from voxmerge import (
    Box,
    Cylinder,
    SceneSpec,
    Sphere,
    chamfer,
    color_mesh,
    decode_fields,
    marching_cubes,
    rasterize,
    sample_surface,
)
from voxmerge.io import write_mesh_ply

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

scene = SceneSpec([
    Sphere("head", center=(0.0, 0.0, 0.35), radius=0.22, rgb=(0.95, 0.8, 0.2)),
    Cylinder("body", center=(0.0, 0.0, -0.1), radius=0.16, half_height=0.3,
             axis="z", rgb=(0.2, 0.5, 0.9)),
    Box("base", center=(0.0, 0.0, -0.55), half_extents=(0.35, 0.35, 0.08),
        rgb=(0.4, 0.9, 0.4)),
])

for a in (32, 64, 128):
    grid, _ = rasterize(scene, a)
    sdf, rgb = decode_fields(grid)
    mesh = color_mesh(marching_cubes(sdf, iso=0.0), rgb)
    path = os.path.join(OUT_DIR, f"figure_{a}.ply")
    write_mesh_ply(mesh, path)
    print(f"A={a:3d}: {mesh.n_vertices:6d} vertices, {mesh.n_faces:6d} faces -> {path}")

# resolution convergence: chamfer between consecutive extractions shrinks
grid_lo, _ = rasterize(scene, 48)
grid_hi, _ = rasterize(scene, 96)
mesh_lo = marching_cubes(decode_fields(grid_lo)[0], 0.0)
mesh_hi = marching_cubes(decode_fields(grid_hi)[0], 0.0)
points_lo = sample_surface(mesh_lo, 20000, seed=0)
points_hi = sample_surface(mesh_hi, 20000, seed=0)
print(f"\nchamfer(A=48, A=96) x1000 = {chamfer(points_lo, points_hi) * 1e3:.4f}")

# vertices of an exact sphere extraction sit on the analytic surface to
# within a small fraction of a voxel
from voxmerge import VoxelGrid, voxel_centers

a = 64
c = voxel_centers(a)
x, y, z = np.meshgrid(c, c, c, indexing="ij")
sphere = VoxelGrid((np.sqrt(x * x + y * y + z * z) - 0.5)[..., None])
mesh = marching_cubes(sphere, 0.0)
residual = np.abs(np.linalg.norm(mesh.vertices.astype(np.float64), axis=1) - 0.5)
print(f"sphere residuals at A={a}: max {residual.max():.2e}, "
      f"cell diagonal {2 * np.sqrt(3) / a:.2e}")
