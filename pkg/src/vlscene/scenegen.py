"""Seeded synthetic scene generator.

Builds a benchmark where the right answer is known by construction: each
class is a unit prototype vector, each scene is a bag of noisy prototype
copies in which the target class always holds a strict plurality, and the
prompt set reuses the prototypes as pooled text embeddings. Clutter mixes in
objects from other classes; noise perturbs every object before
renormalization. Novel scenes draw their targets from classes held out of
encoder training.

Each scene also carries a global image embedding: the normalized object
mean corrupted by one extra shot of the same noise. A single whole-scene
embedding gets no benefit from averaging across the n object views, so it
is systematically coarser than the object set; reasoning that folds
object-level context back in can therefore beat scoring the global view
alone, which is what the evaluation's context ablation measures. At
noise = 0 the global equals the normalized object mean exactly.

All generated embeddings are rounded to 32-bit float precision (then carried
as float64) so a dataset survives the binary file format bit for bit.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .embeddings import l2_normalize
from .encoders import RawScene
from .errors import ConfigInvalidError, SeparationFailureError
from .reasoner import PromptSet, SceneBundle
from .training import Batch

MANIFEST_VERSION = 1

# Salt constants for deriving independent sub-streams from one dataset seed.
_TOKEN_SALT = 0x746F6B65
_RAW_SALT = 0x72617766

# Perturbation scale for the per-class prompt token copies; fixed so the
# attention path stays nontrivial even for noise=0 datasets.
TOKEN_JITTER = 0.05


def splitmix64(x: int) -> int:
    """SplitMix64 mix of a 64-bit value; used to derive per-scene seeds."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def scene_seed(dataset_seed: int, scene_index: int) -> int:
    """Per-scene seed: splitmix64 of (dataset seed XOR scene index)."""
    return splitmix64((dataset_seed ^ scene_index) & 0xFFFFFFFFFFFFFFFF)


def _f32(x: np.ndarray) -> np.ndarray:
    # Round to float32 precision but keep float64 for arithmetic headroom.
    return x.astype(np.float32).astype(np.float64)


@dataclass(frozen=True)
class GenConfig:
    """Knobs of the generator; defaults give a moderately cluttered benchmark."""

    classes: int = 8
    dim: int = 32
    scenes: int = 200
    objects_per_scene: int = 6
    clutter: float = 0.3
    noise: float = 0.1
    novel_fraction: float = 0.1
    seed: int = 42

    def validate(self) -> "GenConfig":
        if self.classes < 2:
            raise ConfigInvalidError(f"need at least 2 classes, got {self.classes}")
        if self.dim < 1:
            raise ConfigInvalidError(f"dim must be >= 1, got {self.dim}")
        if self.classes > 2 * self.dim:
            raise ConfigInvalidError(
                f"classes must be <= 2*dim to keep prototypes separated "
                f"(got {self.classes} > {2 * self.dim})"
            )
        if self.scenes < 1:
            raise ConfigInvalidError(f"scenes must be >= 1, got {self.scenes}")
        if self.objects_per_scene < 1:
            raise ConfigInvalidError(f"objects_per_scene must be >= 1")
        if not 0.0 <= self.clutter <= 1.0:
            raise ConfigInvalidError(f"clutter must be in [0, 1], got {self.clutter}")
        if self.noise < 0 or not np.isfinite(self.noise):
            raise ConfigInvalidError(f"noise must be >= 0, got {self.noise}")
        if not 0.0 <= self.novel_fraction <= 1.0:
            raise ConfigInvalidError(
                f"novel_fraction must be in [0, 1], got {self.novel_fraction}"
            )
        return self


@dataclass(frozen=True)
class Dataset:
    """Generated benchmark: prototypes, aligned prompt set, scenes, manifest."""

    prototypes: np.ndarray  # (K, d)
    prompt_set: PromptSet
    scenes: tuple  # of SceneBundle
    manifest: dict

    @property
    def labels(self) -> tuple:
        return self.prompt_set.labels


def gen_prototypes(k: int, d: int, seed: int, max_cos: float = 0.5, max_tries: int = 1000) -> np.ndarray:
    """K unit vectors with pairwise |cosine| below max_cos, deterministic per seed.

    Candidates are drawn from a seeded Gaussian and rejected until separated;
    exceeding the retry budget for any slot raises SeparationFailureError.
    """
    if k > 2 * d:
        raise ConfigInvalidError(f"k must be <= 2*dim, got k={k} d={d}")
    rng = np.random.default_rng(seed)
    protos = []
    for _ in range(k):
        for attempt in range(max_tries):
            cand = l2_normalize(rng.standard_normal(d))
            if all(abs(float(np.dot(cand, p))) < max_cos for p in protos):
                protos.append(cand)
                break
        else:
            raise SeparationFailureError(
                f"could not place prototype {len(protos)} after {max_tries} tries "
                f"(k={k}, d={d}, max_cos={max_cos})"
            )
    return _f32(np.stack(protos))


def _target_count(n: int, clutter: float, n_classes: int) -> int:
    """Number of target-class objects; bumped until a strict plurality is possible."""
    n_target = max(1, int(np.rint(n * (1.0 - clutter))))
    # Distractors spread round-robin over the other classes, so the largest
    # distractor class gets ceil(remaining / (n_classes - 1)) objects.
    while n_target < n and math.ceil((n - n_target) / (n_classes - 1)) >= n_target:
        n_target += 1
    return n_target


def gen_scene(
    prototypes: np.ndarray,
    target_class: int,
    cfg: GenConfig,
    seed: int,
    scene_id: str = "scene",
    class_labels=None,
    novel: bool = False,
) -> SceneBundle:
    """One scene around the target class.

    round(n * (1 - clutter)) objects (at least one, and always a strict
    plurality) are noisy copies of the target prototype; the rest are noisy
    copies of other class prototypes, spread so no distractor class ever
    matches the target count. The relevance mask marks the target objects.
    The global image embedding is the normalized object mean plus one extra
    draw of the same noise (exact at noise = 0).
    """
    k, _ = prototypes.shape
    if not 0 <= target_class < k:
        raise ConfigInvalidError(f"target_class {target_class} out of range [0, {k})")
    cfg = cfg.validate()
    rng = np.random.default_rng(seed)
    n = cfg.objects_per_scene
    n_target = _target_count(n, cfg.clutter, k)
    others = [c for c in range(k) if c != target_class]
    order = rng.permutation(len(others))
    distractor_classes = [others[order[i % len(others)]] for i in range(n - n_target)]

    def _noisy(proto: np.ndarray) -> np.ndarray:
        if cfg.noise == 0:
            return proto.copy()
        return _f32(l2_normalize(proto + cfg.noise * rng.standard_normal(proto.shape[0])))

    objects = np.stack(
        [_noisy(prototypes[target_class]) for _ in range(n_target)]
        + [_noisy(prototypes[c]) for c in distractor_classes]
    )
    gist = l2_normalize(objects.mean(axis=0))
    if cfg.noise == 0:
        global_image = _f32(gist)
    else:
        global_image = _f32(l2_normalize(gist + cfg.noise * rng.standard_normal(gist.shape[0])))
    mask = np.array([True] * n_target + [False] * (n - n_target))
    labels = class_labels or [f"class_{i}" for i in range(k)]
    return SceneBundle(
        objects=objects,
        global_image=global_image,
        truth_label=labels[target_class],
        relevance_mask=mask,
        scene_id=scene_id,
        novel=novel,
    )


def _novel_split(cfg: GenConfig) -> tuple[int, int]:
    """(number of novel scenes, number of held-out classes)."""
    n_novel = int(np.rint(cfg.novel_fraction * cfg.scenes))
    if n_novel == 0:
        return 0, 0
    held_out = max(1, int(np.rint(cfg.novel_fraction * cfg.classes)))
    held_out = min(held_out, cfg.classes - 1)  # keep at least one trainable class
    return n_novel, held_out


def gen_dataset(cfg: GenConfig) -> Dataset:
    """Full benchmark from one config; a pure function of the config.

    Pooled prompt embeddings are the prototypes themselves; each prompt also
    carries two jittered prototype copies as token embeddings. Scene targets
    cycle round-robin, with the last round(novel_fraction * scenes) scenes
    drawing from the held-out class block at the end of the class range.
    """
    cfg = cfg.validate()
    protos = gen_prototypes(cfg.classes, cfg.dim, cfg.seed)
    labels = [f"class_{i}" for i in range(cfg.classes)]

    token_rng = np.random.default_rng(splitmix64(cfg.seed ^ _TOKEN_SALT))
    tokens = tuple(
        np.stack([
            _f32(l2_normalize(protos[j] + TOKEN_JITTER * token_rng.standard_normal(cfg.dim)))
            for _ in range(2)
        ])
        for j in range(cfg.classes)
    )
    prompt_set = PromptSet(labels=tuple(labels), pooled=protos, tokens=tokens)

    n_novel, held_out = _novel_split(cfg)
    novel_classes = list(range(cfg.classes - held_out, cfg.classes)) if held_out else []
    train_classes = [c for c in range(cfg.classes) if c not in novel_classes]

    scenes = []
    scene_entries = []
    counters = {"train": 0, "novel": 0}
    for i in range(cfg.scenes):
        is_novel = i >= cfg.scenes - n_novel
        if is_novel:
            target = novel_classes[counters["novel"] % len(novel_classes)]
            counters["novel"] += 1
        else:
            target = train_classes[counters["train"] % len(train_classes)]
            counters["train"] += 1
        sid = f"scene_{i:05d}"
        scenes.append(
            gen_scene(protos, target, cfg, scene_seed(cfg.seed, i), scene_id=sid,
                      class_labels=labels, novel=is_novel)
        )
        scene_entries.append(
            {
                "file": f"scenes/{sid}.vleb",
                "scene_id": sid,
                "truth_label": labels[target],
                "novel": is_novel,
            }
        )

    manifest = {
        "format_version": MANIFEST_VERSION,
        "config": asdict(cfg),
        "classes": labels,
        "novel_classes": [labels[c] for c in novel_classes],
        "scenes": scene_entries,
    }
    return Dataset(prototypes=protos, prompt_set=prompt_set, scenes=tuple(scenes), manifest=manifest)


def gen_training_batches(
    n_classes: int,
    feature_dim: int = 16,
    vocab: int = 64,
    batch_size: int | None = None,
    n_batches: int = 16,
    noise: float = 0.1,
    seed: int = 0,
) -> list:
    """Raw (feature, token-id) batches for pretraining the toy encoders.

    Each class owns a Gaussian raw-feature prototype and the fixed token
    pair (2c, 2c+1); samples are noisy prototype copies. Batches cycle the
    classes so every batch carries in-batch negatives from other classes.
    """
    if n_classes < 1:
        raise ConfigInvalidError("need at least 1 class")
    if vocab < 2 * n_classes:
        raise ConfigInvalidError(
            f"vocab must be >= 2 * n_classes, got vocab={vocab} n_classes={n_classes}"
        )
    if n_batches < 1:
        raise ConfigInvalidError("need at least 1 batch")
    b = batch_size or min(8, n_classes)
    if b < 1:
        raise ConfigInvalidError("batch_size must be >= 1")
    rng = np.random.default_rng(splitmix64(seed ^ _RAW_SALT))
    raw_protos = rng.standard_normal((n_classes, feature_dim))
    batches = []
    for bi in range(n_batches):
        pairs = []
        for i in range(b):
            c = (bi * b + i) % n_classes
            feats = raw_protos[c] + noise * rng.standard_normal(feature_dim)
            pairs.append((feats, (2 * c, 2 * c + 1)))
        batches.append(Batch(pairs=tuple(pairs)))
    return batches


def training_scene(features: np.ndarray, token_ids) -> RawScene:
    """Wrap one raw training sample in the RawScene container."""
    return RawScene(object_features=np.atleast_2d(features), token_ids=(tuple(token_ids),))
