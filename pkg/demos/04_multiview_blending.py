"""The 2D side: mask downsampling, latent blending, painting, morphology.

During multi-view editing, user masks gate how much of the edited latents
replaces the originals at every layer resolution, painted markers tag the
regions for 3D lifting, and dilation/erosion trades editing freedom
against locality.
"""

import os

import numpy as np

from voxmerge import (
    ColorSpec,
    MaskStack2D,
    MultiViewFeature,
    binarize,
    blend_features,
    downsample_mask,
    morph2d,
    paint_masks,
)
from voxmerge.io import write_image_stack, write_mask_stack

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT_DIR, exist_ok=True)

VIEWS, H, W = 4, 64, 64
rng = np.random.default_rng(0)

# four synthetic views: smooth ramps standing in for renders
i, j = np.meshgrid(np.linspace(0, 1, H), np.linspace(0, 1, W), indexing="ij")
original = np.stack(
    [np.stack([i * 0.8, j * 0.8, np.full_like(i, 0.3 + 0.1 * v)], axis=-1)
     for v in range(VIEWS)]
).astype(np.float32)
edited = original[..., ::-1].copy()  # channel-swapped stand-in for an edit

# a brushed disk mask per view, different centers
masks = np.zeros((VIEWS, H, W), np.float32)
for v in range(VIEWS):
    ci, cj = 20 + 6 * v, 40 - 4 * v
    masks[v] = (np.hypot(i * H - ci, j * W - cj) <= 14).astype(np.float32)
mask_stack = MaskStack2D(masks)

print(f"views {VIEWS}x{H}x{W}, mask coverage {masks.mean():.1%}")

# blending: edited content only under the mask
blended = blend_features(MultiViewFeature(edited), MultiViewFeature(original),
                         mask_stack)
outside = masks == 0.0
assert np.array_equal(blended.data[outside], original[outside])
print("blend keeps unmasked pixels bit-identical to the original")

# downsampling to the layer resolutions; area averaging keeps coverage
for size in (32, 16, 8):
    down = downsample_mask(mask_stack, size, size, mode="area_soft")
    print(f"  {size:2d}x{size:2d}: coverage {down.data.mean():.4f} "
          f"(source {masks.mean():.4f})")

# fractional borders blend softly; hard nearest keeps a crisp 0/1 stencil
soft = downsample_mask(mask_stack, 16, 16, mode="area_soft")
hard = downsample_mask(mask_stack, 16, 16, mode="nearest_binary")
print(f"soft values in [{soft.data.min():.2f}, {soft.data.max():.2f}]; "
      f"hard values {sorted(set(np.unique(hard.data)))}")

# painting the masks green marks editing regions for reconstruction
painted = paint_masks(MultiViewFeature(original), binarize(mask_stack),
                      ColorSpec((0.0, 1.0, 0.0)))
image_paths = [os.path.join(OUT_DIR, f"painted_v{v}.png") for v in range(VIEWS)]
write_image_stack(painted, image_paths)
print(f"painted views -> {OUT_DIR}/painted_v*.png")

# mask granularity: more dilation gives the edit more room, erosion less
for d in (-4, -2, 0, 2, 4):
    shaped = morph2d(mask_stack, d, "dilate")
    print(f"  dilation {d:+d}: coverage {shaped.data.mean():.1%}")
mask_paths = [os.path.join(OUT_DIR, f"mask_d2_v{v}.png") for v in range(VIEWS)]
write_mask_stack(morph2d(mask_stack, 2, "dilate"), mask_paths)
print(f"dilated masks -> {OUT_DIR}/mask_d2_v*.png")
