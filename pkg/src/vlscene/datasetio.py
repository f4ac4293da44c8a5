"""Dataset directory layout: manifest.json plus .vleb bundles.

    dataset/
      manifest.json        generator config, class list, per-scene index
      prototypes.vleb      one row per class (kind "prototype")
      prompts.vleb         packed prompt set (kind "text", see below)
      scenes/*.vleb        one bundle per scene (kind "object")

The prompt bundle packs pooled and token embeddings into one matrix: the
first K rows are the pooled embeddings, followed by each label's token rows
in label order. meta.extra records pooled_count and token_counts so the
matrix splits unambiguously; meta.labels names the owning label of every
row. Scene bundles carry scene_id, truth label, novel flag and the
relevance mask in meta.extra and the per-object class in meta.labels.
"""

import json
from pathlib import Path

import numpy as np

from .errors import ConfigInvalidError, UnsupportedVersionError
from .reasoner import PromptSet, SceneBundle
from .scenegen import MANIFEST_VERSION, Dataset
from .vleb import read_bundle, write_bundle


def prompt_set_to_bundle(prompts: PromptSet) -> tuple[np.ndarray, dict]:
    """Pack a PromptSet into one (rows, meta) pair for a single .vleb file."""
    rows = [prompts.pooled]
    labels = list(prompts.labels)
    token_counts = []
    for label, toks in zip(prompts.labels, prompts.tokens):
        rows.append(toks)
        token_counts.append(int(toks.shape[0]))
        labels.extend([label] * toks.shape[0])
    extra = {"pooled_count": prompts.k, "token_counts": token_counts}
    if prompts.scene_prompt is not None:
        rows.append(prompts.scene_prompt.reshape(1, -1))
        labels.append("__scene_prompt__")
        extra["scene_prompt_row"] = sum(r.shape[0] for r in rows[:-1])
    meta = {"kind": "text", "labels": labels, "extra": extra}
    return np.vstack(rows), meta


def prompt_set_from_bundle(rows: np.ndarray, meta: dict) -> PromptSet:
    """Rebuild a PromptSet from a packed bundle.

    Bundles without packing metadata are treated as plain pooled embeddings
    with a single token (the pooled row itself) per label.
    """
    extra = meta.get("extra") or {}
    labels = meta.get("labels")
    if "pooled_count" not in extra:
        if labels is None:
            labels = [f"prompt_{i}" for i in range(rows.shape[0])]
        return PromptSet(
            labels=tuple(labels),
            pooled=rows.copy(),
            tokens=tuple(row.reshape(1, -1) for row in rows),
        )
    k = int(extra["pooled_count"])
    token_counts = [int(c) for c in extra["token_counts"]]
    if len(token_counts) != k:
        raise ConfigInvalidError("token_counts length does not match pooled_count")
    pooled = rows[:k]
    tokens = []
    offset = k
    for c in token_counts:
        tokens.append(rows[offset : offset + c].copy())
        offset += c
    scene_prompt = None
    if extra.get("scene_prompt_row") is not None:
        scene_prompt = rows[int(extra["scene_prompt_row"])].copy()
    if labels is None:
        raise ConfigInvalidError("packed prompt bundle requires meta.labels")
    return PromptSet(
        labels=tuple(labels[:k]),
        pooled=pooled.copy(),
        tokens=tuple(tokens),
        scene_prompt=scene_prompt,
    )


def scene_to_bundle(scene: SceneBundle, class_of_object=None) -> tuple[np.ndarray, dict]:
    """(rows, meta) for one scene; object class labels are optional."""
    extra = {
        "scene_id": scene.scene_id,
        "truth_label": scene.truth_label,
        "novel": scene.novel,
        "relevance_mask": (
            [int(b) for b in scene.relevance_mask] if scene.relevance_mask is not None else None
        ),
    }
    meta = {"kind": "object", "extra": extra}
    if class_of_object is not None:
        meta["labels"] = list(class_of_object)
    rows = scene.objects
    if scene.global_image is not None:
        extra["global_row"] = int(rows.shape[0])
        rows = np.vstack([rows, scene.global_image.reshape(1, -1)])
        if class_of_object is not None:
            meta["labels"] = list(class_of_object) + ["__global__"]
    return rows, meta


def scene_from_bundle(rows: np.ndarray, meta: dict, fallback_id: str = "scene") -> SceneBundle:
    """Rebuild a SceneBundle; plain object-kind bundles work without extras."""
    extra = meta.get("extra") or {}
    global_image = None
    objects = rows
    if extra.get("global_row") is not None:
        gi = int(extra["global_row"])
        global_image = rows[gi].copy()
        objects = np.delete(rows, gi, axis=0)
    mask = extra.get("relevance_mask")
    return SceneBundle(
        objects=objects.copy(),
        global_image=global_image,
        truth_label=extra.get("truth_label"),
        relevance_mask=np.array(mask, dtype=bool) if mask is not None else None,
        scene_id=extra.get("scene_id", fallback_id),
        novel=bool(extra.get("novel", False)),
    )


def save_dataset(ds: Dataset, out_dir) -> Path:
    """Write the dataset directory; returns its path."""
    root = Path(out_dir)
    (root / "scenes").mkdir(parents=True, exist_ok=True)
    (root / "manifest.json").write_text(
        json.dumps(ds.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_bundle(
        ds.prototypes,
        {"kind": "prototype", "labels": list(ds.labels)},
        root / "prototypes.vleb",
    )
    rows, meta = prompt_set_to_bundle(ds.prompt_set)
    write_bundle(rows, meta, root / "prompts.vleb")
    class_by_label = {label: label for label in ds.labels}
    for entry, scene in zip(ds.manifest["scenes"], ds.scenes):
        object_classes = None
        if scene.relevance_mask is not None and scene.truth_label is not None:
            object_classes = [
                scene.truth_label if rel else "__distractor__" for rel in scene.relevance_mask
            ]
        s_rows, s_meta = scene_to_bundle(scene, object_classes)
        write_bundle(s_rows, s_meta, root / entry["file"])
    return root


def load_dataset(dataset_dir) -> Dataset:
    """Read a dataset directory back into memory."""
    root = Path(dataset_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("format_version") != MANIFEST_VERSION:
        raise UnsupportedVersionError(
            f"manifest format_version {manifest.get('format_version')} not supported"
        )
    prototypes, _ = read_bundle(root / "prototypes.vleb")
    rows, meta = read_bundle(root / "prompts.vleb")
    prompt_set = prompt_set_from_bundle(rows, meta)
    scenes = []
    for entry in manifest["scenes"]:
        s_rows, s_meta = read_bundle(root / entry["file"])
        scenes.append(scene_from_bundle(s_rows, s_meta, fallback_id=entry["scene_id"]))
    return Dataset(
        prototypes=prototypes,
        prompt_set=prompt_set,
        scenes=tuple(scenes),
        manifest=manifest,
    )
