"""Zero-shot scene reasoning pipeline.

Scores a scene against a set of label prompts, selects the strongest
candidates, aggregates cross-modal context from them, and emits a calibrated
probability over all labels. With context disabled (or beta = 0) the output
is exactly the temperature softmax of the raw cosine scores.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .embeddings import l2_normalize, normalize_rows, pairwise_sim, stable_softmax
from .errors import (
    ConfigInvalidError,
    DimMismatchError,
    EmptyInputError,
    InvalidShapeError,
)
from .fusion import AttentionParams, ContextVector, aggregate_context, contextualize, cross_attention

FUSION_MODES = ("mean", "attended")


@dataclass(frozen=True)
class PromptSet:
    """K candidate labels with pooled and per-token text embeddings.

    Attributes:
        labels: K unique label strings.
        pooled: (K, d) pooled embedding per label.
        tokens: per-label (m_j, d) token embedding matrices.
        scene_prompt: optional scene-level text embedding used as the
            context prior; when absent the mean of the selected pooled
            prompts stands in.
    """

    labels: tuple
    pooled: np.ndarray
    tokens: tuple
    scene_prompt: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "tokens", tuple(self.tokens))
        k = len(self.labels)
        if k < 1:
            raise EmptyInputError("prompt set needs at least one label")
        if len(set(self.labels)) != k:
            raise ConfigInvalidError("prompt labels must be unique")
        if self.pooled.ndim != 2 or self.pooled.shape[0] != k:
            raise InvalidShapeError(f"pooled must be ({k}, d), got {self.pooled.shape}")
        if len(self.tokens) != k:
            raise InvalidShapeError(f"need one token matrix per label, got {len(self.tokens)}")
        d = self.pooled.shape[1]
        for t in self.tokens:
            if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] != d:
                raise DimMismatchError("token matrices must be nonempty with matching dim")
        if self.scene_prompt is not None and self.scene_prompt.shape != (d,):
            raise DimMismatchError("scene_prompt dim does not match pooled embeddings")

    @property
    def k(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.pooled.shape[1]


@dataclass(frozen=True)
class SceneBundle:
    """One scene: object embeddings plus optional ground truth annotations."""

    objects: np.ndarray  # (n, d)
    global_image: np.ndarray | None = None
    truth_label: str | None = None
    relevance_mask: np.ndarray | None = None  # bool, length n
    scene_id: str = "scene"
    novel: bool = False

    def __post_init__(self):
        if self.objects.ndim != 2 or self.objects.shape[0] < 1:
            raise EmptyInputError("scene needs at least one object embedding")
        if self.relevance_mask is not None:
            mask = np.asarray(self.relevance_mask, dtype=bool)
            if mask.shape != (self.objects.shape[0],):
                raise InvalidShapeError("relevance mask length must equal object count")
            object.__setattr__(self, "relevance_mask", mask)
        if self.global_image is not None and self.global_image.shape != (self.objects.shape[1],):
            raise DimMismatchError("global_image dim does not match objects")

    @property
    def n_objects(self) -> int:
        return self.objects.shape[0]


@dataclass(frozen=True)
class ReasonConfig:
    """Hyperparameters of one reasoning run.

    tau: softmax temperature for the final label distribution.
    alpha: weight of the scene text prior inside the context vector.
    beta: weight of the context vector folded into the global embedding.
    k / threshold: prompt selection (keep scores >= threshold, cap at k,
        fall back to the single best when none pass).
    fusion_mode: "mean" aggregates raw object embeddings; "attended" runs
        cross-attention onto the selected prompts' tokens and aggregates
        the re-projected attended rows instead.
    context: master switch; off reproduces the plain zero-shot softmax.
    """

    tau: float = 0.07
    alpha: float = 0.5
    beta: float = 0.5
    k: int = 5
    threshold: float = 0.2
    fusion_mode: str = "mean"
    context: bool = True

    def validate(self) -> "ReasonConfig":
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise ConfigInvalidError(f"tau must be > 0, got {self.tau}")
        if self.alpha < 0 or not np.isfinite(self.alpha):
            raise ConfigInvalidError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0 or not np.isfinite(self.beta):
            raise ConfigInvalidError(f"beta must be >= 0, got {self.beta}")
        if self.k < 1:
            raise ConfigInvalidError(f"k must be >= 1, got {self.k}")
        if not np.isfinite(self.threshold):
            raise ConfigInvalidError("threshold must be finite")
        if self.fusion_mode not in FUSION_MODES:
            raise ConfigInvalidError(f"fusion_mode must be one of {FUSION_MODES}")
        return self

    def baseline(self) -> "ReasonConfig":
        """Context-free counterpart: pure similarity softmax, no language prior."""
        return replace(self, context=False, alpha=0.0, beta=0.0)


@dataclass(frozen=True)
class ReasonResult:
    """Everything one reasoning pass produced, hyperparameters included."""

    probs: np.ndarray
    predicted_label: str
    selected_prompts: tuple
    sims: np.ndarray
    context: ContextVector
    ambiguity: float
    tau: float
    alpha: float
    beta: float
    k: int
    threshold: float
    fusion_mode: str
    context_enabled: bool
    global_source: str  # "image" when a global embedding was given, else "object_mean"
    attention_on_truth: float | None
    context_weight: float
    scene_id: str
    timing_us: int = 0

    def to_json_dict(self) -> dict:
        """Stable, JSON-serializable view (field order fixed)."""
        return {
            "scene_id": self.scene_id,
            "predicted_label": self.predicted_label,
            "probs": [float(p) for p in self.probs],
            "sims": [float(s) for s in self.sims],
            "selected_prompts": list(self.selected_prompts),
            "context": {"c": [float(x) for x in self.context.c], "alpha": self.context.alpha},
            "ambiguity": self.ambiguity,
            "tau": self.tau,
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "threshold": self.threshold,
            "fusion_mode": self.fusion_mode,
            "context_enabled": self.context_enabled,
            "global_source": self.global_source,
            "attention_on_truth": self.attention_on_truth,
            "context_weight": self.context_weight,
            "timing_us": self.timing_us,
        }


def global_embedding(scene: SceneBundle) -> tuple[np.ndarray, str]:
    """Unit global visual embedding and which path produced it."""
    if scene.global_image is not None:
        return l2_normalize(scene.global_image), "image"
    return l2_normalize(np.asarray(scene.objects, dtype=np.float64).mean(axis=0)), "object_mean"


def score_prompts(scene: SceneBundle, prompts: PromptSet) -> np.ndarray:
    """Cosine of the global visual embedding against every pooled prompt."""
    g, _ = global_embedding(scene)
    return pairwise_sim(g.reshape(1, -1), prompts.pooled)[0]


def select_top_k(sims, k: int, threshold: float) -> list[int]:
    """Indices scoring at least threshold, best first, capped at k.

    Ties break toward the lower index. When nothing passes the threshold the
    single argmax index is returned, so the result is never empty.
    """
    s = np.asarray(sims, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise EmptyInputError("sims must be a nonempty vector")
    if k < 1:
        raise ConfigInvalidError(f"k must be >= 1, got {k}")
    order = sorted(range(s.size), key=lambda i: (-s[i], i))
    passing = [i for i in order if s[i] >= threshold][:k]
    if not passing:
        return [int(np.argmax(s))]
    return passing


def predict_zero_shot(v, prompts: PromptSet, tau: float) -> np.ndarray:
    """Plain zero-shot label distribution: softmax of cosine scores at tau."""
    sims = pairwise_sim(np.asarray(v, dtype=np.float64).reshape(1, -1), prompts.pooled)[0]
    return stable_softmax(sims, tau)


def _normalized_entropy(probs: np.ndarray) -> float:
    k = probs.size
    if k < 2:
        return 0.0
    p = probs[probs > 0]
    h = float(-(p * np.log(p)).sum()) / float(np.log(k))
    return min(max(h, 0.0), 1.0)


def reason_scene(
    scene: SceneBundle,
    prompts: PromptSet,
    cfg: ReasonConfig | None = None,
    attn_params: AttentionParams | None = None,
) -> ReasonResult:
    """Run the full pipeline on one scene.

    Steps: score every prompt, select the top candidates above the
    threshold, cross-attend the objects onto the selected prompts' tokens,
    aggregate the context vector, fold it into the global embedding, and
    softmax the refreshed cosine scores over all labels. Deterministic for
    fixed inputs and config; timing_us is the only field that varies.
    """
    cfg = (cfg or ReasonConfig()).validate()
    t0 = time.perf_counter()

    # Embeddings are normalized here at the boundary so cosine equals dot
    # product throughout and caller-side scaling cannot leak in.
    objects = normalize_rows(scene.objects)
    pooled = normalize_rows(prompts.pooled)
    if objects.shape[1] != pooled.shape[1]:
        raise DimMismatchError(
            f"scene dim {objects.shape[1]} does not match prompt dim {pooled.shape[1]}"
        )
    if scene.global_image is not None:
        g = l2_normalize(scene.global_image)
        global_source = "image"
    else:
        g = l2_normalize(objects.mean(axis=0))
        global_source = "object_mean"

    sims = pooled @ g
    selected = select_top_k(sims, cfg.k, cfg.threshold)

    attn = None
    params = attn_params or AttentionParams.identity(objects.shape[1])
    need_attention = cfg.context or scene.relevance_mask is not None
    if need_attention:
        tok = normalize_rows(np.vstack([prompts.tokens[j] for j in selected]))
        attn = cross_attention(params, objects, tok)

    if cfg.context:
        if prompts.scene_prompt is not None:
            t_scene = l2_normalize(prompts.scene_prompt)
        else:
            t_scene = pooled[selected].mean(axis=0)
        if cfg.fusion_mode == "attended":
            base = attn.attended @ params.w_v.T
        else:
            base = objects
        ctx = aggregate_context(base, t_scene, cfg.alpha)
        z = contextualize(g, ctx, cfg.beta)
        probs = stable_softmax(pooled @ z, cfg.tau)
        c_norm = cfg.beta * float(np.linalg.norm(ctx.c))
        context_weight = c_norm / (1.0 + c_norm)
    else:
        ctx = ContextVector(c=objects.mean(axis=0), alpha=0.0)
        probs = stable_softmax(sims, cfg.tau)
        context_weight = 0.0

    attention_on_truth = None
    if attn is not None and scene.relevance_mask is not None:
        attention_on_truth = float(attn.weights[scene.relevance_mask].sum()) / scene.n_objects

    elapsed_us = int(round((time.perf_counter() - t0) * 1e6))
    return ReasonResult(
        probs=probs,
        predicted_label=prompts.labels[int(np.argmax(probs))],
        selected_prompts=tuple(selected),
        sims=sims,
        context=ctx,
        ambiguity=_normalized_entropy(probs),
        tau=cfg.tau,
        alpha=cfg.alpha,
        beta=cfg.beta,
        k=cfg.k,
        threshold=cfg.threshold,
        fusion_mode=cfg.fusion_mode,
        context_enabled=cfg.context,
        global_source=global_source,
        attention_on_truth=attention_on_truth,
        context_weight=context_weight,
        scene_id=scene.scene_id,
        timing_us=elapsed_us,
    )
