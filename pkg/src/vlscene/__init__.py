"""vlscene: zero-shot vision-language scene reasoning.

Library layout:
    embeddings   vector primitives (normalize, cosine, temperature softmax)
    encoders     deterministic trainable toy image/text encoders
    fusion       cross-modal attention and context aggregation
    reasoner     the end-to-end zero-shot pipeline
    training     contrastive loss, analytic gradients, gradient descent
    metrics      evaluation metrics and report assembly
    scenegen     seeded synthetic benchmark generator
    vleb         binary embedding-bundle file format
    datasetio    dataset directory persistence
    evaluate     dataset-level evaluation driver with ablations
    cli          command-line entry points
"""

from .embeddings import cosine_sim, l2_normalize, pairwise_sim, stable_softmax
from .encoders import EncoderParams, RawScene, encode_image, encode_text, init_params
from .errors import VlsceneError
from .evaluate import evaluate_dataset, evaluate_with_ablation
from .fusion import (
    AttentionMap,
    AttentionParams,
    ContextVector,
    aggregate_context,
    contextualize,
    cross_attention,
)
from .metrics import (
    EvalRecord,
    Report,
    ambiguity_index,
    attention_overlap,
    build_report,
    generalization_gain,
    mean_average_precision,
    recall_precision_at_k,
    similarity_margin,
    top_k_accuracy,
)
from .reasoner import (
    PromptSet,
    ReasonConfig,
    ReasonResult,
    SceneBundle,
    predict_zero_shot,
    reason_scene,
    score_prompts,
    select_top_k,
)
from .scenegen import Dataset, GenConfig, gen_dataset, gen_prototypes, gen_scene, gen_training_batches
from .training import (
    Batch,
    EncoderGrads,
    TrainConfig,
    contrastive_loss,
    dataset_loss,
    loss_and_gradients,
    loss_gradients,
    train_toy,
)
from .vleb import decode_bundle, encode_bundle, read_bundle, write_bundle

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "AttentionParams",
    "Batch",
    "ContextVector",
    "Dataset",
    "EncoderGrads",
    "EncoderParams",
    "EvalRecord",
    "GenConfig",
    "PromptSet",
    "RawScene",
    "ReasonConfig",
    "ReasonResult",
    "Report",
    "SceneBundle",
    "TrainConfig",
    "VlsceneError",
    "aggregate_context",
    "ambiguity_index",
    "attention_overlap",
    "build_report",
    "contextualize",
    "contrastive_loss",
    "cosine_sim",
    "cross_attention",
    "dataset_loss",
    "decode_bundle",
    "encode_bundle",
    "encode_image",
    "encode_text",
    "evaluate_dataset",
    "evaluate_with_ablation",
    "gen_dataset",
    "gen_prototypes",
    "gen_scene",
    "gen_training_batches",
    "generalization_gain",
    "init_params",
    "l2_normalize",
    "loss_and_gradients",
    "loss_gradients",
    "mean_average_precision",
    "pairwise_sim",
    "predict_zero_shot",
    "read_bundle",
    "reason_scene",
    "recall_precision_at_k",
    "score_prompts",
    "select_top_k",
    "similarity_margin",
    "stable_softmax",
    "top_k_accuracy",
    "train_toy",
    "write_bundle",
]
