"""Zero-shot label scoring from first principles.

Builds a tiny prompt set by hand, scores a scene against it with plain
cosine similarity, and shows how the softmax temperature trades confidence
against calibration. Run with:  python demos/01_zero_shot_basics.py
"""

import numpy as np

from vlscene import PromptSet, SceneBundle, predict_zero_shot, reason_scene, ReasonConfig
from vlscene.embeddings import l2_normalize, normalize_rows

rng = np.random.default_rng(0)

# Three candidate labels, each a unit embedding. In a real deployment these
# come from a text encoder; here they are anchors we control.
pooled = normalize_rows(rng.standard_normal((3, 16)))
prompts = PromptSet(
    labels=("kitchen", "street", "forest"),
    pooled=pooled,
    tokens=tuple(row.reshape(1, -1) for row in pooled),
)

# A scene whose objects cluster around the "street" anchor plus one outlier.
street = pooled[1]
objects = np.stack([
    l2_normalize(street + 0.2 * rng.standard_normal(16)) for _ in range(4)
] + [l2_normalize(rng.standard_normal(16))])
scene = SceneBundle(objects=objects, scene_id="demo_street")

print("== temperature sweep on the same scene ==")
g = l2_normalize(objects.mean(axis=0))
for tau in (1.0, 0.1, 0.01):
    probs = predict_zero_shot(g, prompts, tau=tau)
    line = ", ".join(f"{lab}={p:.3f}" for lab, p in zip(prompts.labels, probs))
    print(f"tau={tau:<5} -> {line}")

print()
print("== full reasoning pass (selection + context) ==")
result = reason_scene(scene, prompts, ReasonConfig(tau=0.07))
print(f"predicted: {result.predicted_label}")
print(f"raw similarities: {np.round(result.sims, 3)}")
print(f"selected prompt indices: {list(result.selected_prompts)}")
print(f"ambiguity (0 confident .. 1 uncertain): {result.ambiguity:.3f}")
print(f"wall time: {result.timing_us} us")
