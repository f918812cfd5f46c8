"""Scoring edits with directional embedding metrics and prompt diffing.

The direction metrics ask whether the image embeddings moved the same way
the text embeddings did; the difference metrics ask whether similarity to
the edited word (and to the rest of the prompt) survived the edit. Here
synthetic embeddings make a "good" edit that moves along the text
direction and a "bad" one that moves orthogonally, and the scores separate
them cleanly.
"""

import numpy as np

from voxmerge import EmbeddingSet, PromptPair, all_scores, prompt_diff

rng = np.random.default_rng(7)
N, D = 70, 512


def unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


text_input = unit(rng.standard_normal(D))
text_edited = unit(text_input + 0.35 * rng.standard_normal(D))
text_direction = text_edited - text_input

base_views = unit(rng.standard_normal((N, D)) + 2.0 * text_input)

good_edit = unit(base_views + 0.8 * text_direction + 0.05 * rng.standard_normal((N, D)))
orthogonal = rng.standard_normal(D)
orthogonal -= orthogonal @ text_direction * text_direction / (text_direction @ text_direction)
bad_edit = unit(base_views + 0.8 * unit(orthogonal) + 0.05 * rng.standard_normal((N, D)))

text_word = text_edited
text_generic = unit(text_input + 0.1 * rng.standard_normal(D))


def report(name, image_edited):
    embeddings = EmbeddingSet(
        image_input=base_views,
        image_edited=image_edited,
        text_input=text_input,
        text_edited=text_edited,
        text_word=text_word,
        text_generic=text_generic,
    )
    scores = all_scores(embeddings)
    print(f"\n{name} (all values x100, direction up / difference down):")
    for key, result in scores.items():
        flag = f"  [{result.skipped_views} views skipped]" if result.skipped_views else ""
        print(f"  {key:18s} {result.reported:8.3f}{flag}")


report("edit aligned with the prompt change", good_edit)
report("edit orthogonal to the prompt change", bad_edit)
report("no edit at all (identity)", base_views.copy())

# the text side of the metrics comes from prompt diffing
print("\nprompt diffing:")
for pair in (
    PromptPair("a chicken riding a bike", "a cat riding a bike"),
    PromptPair("a skull warrior with a sword", "a skull warrior with a viking axe"),
):
    diff = prompt_diff(pair)
    print(f"  {pair.input_prompt!r} -> {pair.edit_prompt!r}")
    print(f"    removed {diff.removed_text!r}, added {diff.added_text!r}, "
          f"generic {diff.generic_text!r}")
