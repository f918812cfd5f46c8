"""voxmerge: deterministic voxel-grid editing toolkit.

Lifts 2D edit segmentations into 3D masks, merges edited and original
voxel feature grids with boundary blending, extracts textured meshes, and
scores edits with chamfer and directional embedding metrics. All neural
stages live upstream; their outputs enter through files.
"""

from .errors import (
    DataError,
    DimensionError,
    DomainError,
    FormatError,
    PreconditionError,
    SchemaError,
    VoxmergeError,
)
from .fields import CallableDecoder, ChannelDecoder, decode_fields
from .grid import (
    ColorSpec,
    Mask3D,
    VoxelGrid,
    dilate3d,
    extract_color_mask,
    mask_xor,
    voxel_centers,
)
from .merge import (
    MergeConfig,
    average_merge,
    average_merge_inplace,
    average_merge_streamed,
    blend_shell,
    copy_paste_merge,
    corner_empty_feature,
)
from .mesh import (
    PointCloud,
    TexturedMesh,
    chamfer,
    color_mesh,
    marching_cubes,
    sample_surface,
)
from .metrics import (
    EmbeddingSet,
    ScoreResult,
    all_scores,
    diff_score,
    direction_metric,
    direction_score,
    relative_difference,
)
from .multiview import (
    MaskStack2D,
    MultiViewFeature,
    binarize,
    blend_features,
    downsample_mask,
    morph2d,
    paint_masks,
)
from .prompts import EditHunk, PromptDiff, PromptPair, prompt_diff
from .synth import (
    Box,
    Cylinder,
    EditPair,
    SceneSpec,
    Sphere,
    make_edit_pair,
    rasterize,
    scene_from_dict,
    scene_to_dict,
)
from .triplane import TriplaneSet, bilinear_plane_sample, sample_triplane

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CallableDecoder",
    "ChannelDecoder",
    "ColorSpec",
    "Cylinder",
    "DataError",
    "DimensionError",
    "DomainError",
    "EditHunk",
    "EditPair",
    "EmbeddingSet",
    "FormatError",
    "MaskStack2D",
    "Mask3D",
    "MergeConfig",
    "MultiViewFeature",
    "PointCloud",
    "PreconditionError",
    "PromptDiff",
    "PromptPair",
    "SceneSpec",
    "SchemaError",
    "ScoreResult",
    "Sphere",
    "TexturedMesh",
    "TriplaneSet",
    "VoxelGrid",
    "VoxmergeError",
    "all_scores",
    "average_merge",
    "average_merge_inplace",
    "average_merge_streamed",
    "bilinear_plane_sample",
    "binarize",
    "blend_features",
    "blend_shell",
    "chamfer",
    "color_mesh",
    "copy_paste_merge",
    "corner_empty_feature",
    "decode_fields",
    "diff_score",
    "dilate3d",
    "direction_metric",
    "direction_score",
    "downsample_mask",
    "extract_color_mask",
    "make_edit_pair",
    "marching_cubes",
    "mask_xor",
    "morph2d",
    "paint_masks",
    "prompt_diff",
    "rasterize",
    "relative_difference",
    "sample_surface",
    "sample_triplane",
    "scene_from_dict",
    "scene_to_dict",
    "voxel_centers",
]
