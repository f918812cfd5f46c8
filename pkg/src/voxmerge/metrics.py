"""Directional embedding metrics for scoring edits against prompt changes.

All metrics operate on precomputed, unit-normalized embeddings of rendered
views and prompts; no encoder runs here. The four direction variants
compare the per-view image embedding change against the text embedding
change, either via inner products or cosine similarity, and either
averaging per-view scores or averaging the image direction vectors first.
The two difference metrics measure how much the similarity to a target
text (the edited word, or the prompt with the edit replaced by a generic
word) moves between the input and edited renders, as a relative change.

Raw scores are returned unscaled; the reporting layer multiplies by 100.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, DomainError

DIRECTION_VARIANTS = ("dir", "dir_cos", "dir_avg", "dir_avg_cos")
DIFF_TARGETS = ("edit", "noedit")

# below this, a norm or a relative-difference denominator counts as undefined
_NORM_EPS = 1e-12
_RATIO_EPS = 1e-6

REPORT_SCALE = 100.0


def _unit_rows(name: str, arr: np.ndarray, expect_dim: int | None) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionError(f"{name}: expected vectors, got shape {arr.shape}")
    if expect_dim is not None and arr.shape[1] != expect_dim:
        raise DimensionError(
            f"{name}: dimension {arr.shape[1]} does not match D={expect_dim}"
        )
    if not np.isfinite(arr).all():
        raise DataError(f"{name}: non-finite embedding values")
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    if (norms < _NORM_EPS).any():
        raise DataError(f"{name}: zero-norm embedding cannot be normalized")
    # skip rows that are already unit so normalization is idempotent at the
    # bit level (write/read roundtrips must be exact)
    unit = np.abs(norms - 1.0) <= 1e-12
    return np.where(unit, arr, arr / norms)


class EmbeddingSet:
    """Normalized embeddings for one edit: N view pairs plus four text vectors.

    Every vector is L2-normalized at construction time, whatever the input
    norms were.
    """

    __slots__ = (
        "image_input",
        "image_edited",
        "text_input",
        "text_edited",
        "text_word",
        "text_generic",
    )

    def __init__(self, image_input, image_edited, text_input, text_edited,
                 text_word, text_generic):
        self.image_input = _unit_rows("image_input", image_input, None)
        d = self.image_input.shape[1]
        self.image_edited = _unit_rows("image_edited", image_edited, d)
        if self.image_edited.shape[0] != self.image_input.shape[0]:
            raise DimensionError(
                f"view counts differ: {self.image_input.shape[0]} input vs "
                f"{self.image_edited.shape[0]} edited"
            )
        self.text_input = _unit_rows("text_input", text_input, d)[0]
        self.text_edited = _unit_rows("text_edited", text_edited, d)[0]
        self.text_word = _unit_rows("text_word", text_word, d)[0]
        self.text_generic = _unit_rows("text_generic", text_generic, d)[0]

    @property
    def n_views(self) -> int:
        return self.image_input.shape[0]

    @property
    def dim(self) -> int:
        return self.image_input.shape[1]


@dataclass(frozen=True)
class ScoreResult:
    """A raw metric value plus the number of views that had to be skipped."""

    score: float
    skipped_views: int = 0

    @property
    def reported(self) -> float:
        return self.score * REPORT_SCALE


def _cosine(u: np.ndarray, v: np.ndarray, as_distance: bool) -> float:
    sim = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return 1.0 - sim if as_distance else sim


def direction_metric(image_dirs: np.ndarray, text_dir: np.ndarray, variant: str,
                     cosine_as_distance: bool = False) -> ScoreResult:
    """Direction agreement between image changes and a text change.

    ``image_dirs`` is ``(N, D)``, one difference vector per view;
    ``text_dir`` is ``(D,)``. Views whose direction (or the text direction)
    is numerically zero are undefined under the cosine variants and are
    skipped; if nothing remains the score is 0 by convention.
    """
    if variant not in DIRECTION_VARIANTS:
        raise DomainError(f"variant must be one of {DIRECTION_VARIANTS}, got {variant!r}")
    image_dirs = np.asarray(image_dirs, dtype=np.float64)
    text_dir = np.asarray(text_dir, dtype=np.float64)

    if variant == "dir":
        return ScoreResult(float(np.mean(image_dirs @ text_dir)))
    if variant == "dir_avg":
        return ScoreResult(float(np.mean(image_dirs, axis=0) @ text_dir))

    text_norm = np.linalg.norm(text_dir)
    if variant == "dir_avg_cos":
        mean_dir = np.mean(image_dirs, axis=0)
        if np.linalg.norm(mean_dir) < _NORM_EPS or text_norm < _NORM_EPS:
            return ScoreResult(0.0)
        return ScoreResult(_cosine(mean_dir, text_dir, cosine_as_distance))

    # dir_cos: per-view cosine, skipping undefined views
    norms = np.linalg.norm(image_dirs, axis=1)
    if text_norm < _NORM_EPS:
        return ScoreResult(0.0, skipped_views=image_dirs.shape[0])
    keep = norms >= _NORM_EPS
    skipped = int((~keep).sum())
    if not keep.any():
        return ScoreResult(0.0, skipped_views=skipped)
    sims = (image_dirs[keep] @ text_dir) / (norms[keep] * text_norm)
    if cosine_as_distance:
        sims = 1.0 - sims
    return ScoreResult(float(np.mean(sims)), skipped_views=skipped)


def direction_score(embeddings: EmbeddingSet, variant: str,
                    cosine_as_distance: bool = False) -> ScoreResult:
    """Direction metric over an embedding set (views indexed ascending)."""
    image_dirs = embeddings.image_edited - embeddings.image_input
    text_dir = embeddings.text_edited - embeddings.text_input
    return direction_metric(image_dirs, text_dir, variant, cosine_as_distance)


def relative_difference(x: float, y: float) -> float:
    """``|x - y| / max(x, y)``; undefined when the max is not positive."""
    return abs(x - y) / max(x, y)


def diff_score(embeddings: EmbeddingSet, target: str = "edit",
               cosine_as_distance: bool = False) -> ScoreResult:
    """Mean relative change of image-text similarity across the edit.

    ``target`` picks the text embedding: ``edit`` compares against the
    edited word, ``noedit`` against the generic prompt. Views where the
    relative difference is undefined (max similarity not positive) are
    skipped and counted.
    """
    if target not in DIFF_TARGETS:
        raise DomainError(f"target must be one of {DIFF_TARGETS}, got {target!r}")
    text = embeddings.text_word if target == "edit" else embeddings.text_generic
    x = embeddings.image_input @ text
    y = embeddings.image_edited @ text
    if cosine_as_distance:
        x, y = 1.0 - x, 1.0 - y
    denom = np.maximum(x, y)
    keep = denom > _RATIO_EPS
    skipped = int((~keep).sum())
    if not keep.any():
        return ScoreResult(0.0, skipped_views=skipped)
    terms = np.abs(x[keep] - y[keep]) / denom[keep]
    return ScoreResult(float(np.mean(terms)), skipped_views=skipped)


def all_scores(embeddings: EmbeddingSet, cosine_as_distance: bool = False) -> dict[str, ScoreResult]:
    """The full six-metric suite, keyed by conventional metric names."""
    out = {}
    for variant in DIRECTION_VARIANTS:
        key = "clip_" + variant.replace("_", "-")
        out[key] = direction_score(embeddings, variant, cosine_as_distance)
    out["clip_diff-edit"] = diff_score(embeddings, "edit", cosine_as_distance)
    out["clip_diff-noedit"] = diff_score(embeddings, "noedit", cosine_as_distance)
    return out
