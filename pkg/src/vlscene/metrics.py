"""Evaluation metrics over per-scene prediction records.

Covers ranking accuracy (top-k, recall/precision at k, mean average
precision), prediction-quality diagnostics (normalized entropy, similarity
margin, attention overlap), and the aggregate report. Ranking ties always
break toward the lower label index (or the earlier record), which keeps
every metric deterministic and lets tests compare against brute-force
oracles bit for bit.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigInvalidError,
    DatasetMismatchError,
    DegenerateKError,
    EmptyInputError,
    InvalidShapeError,
    MissingMaskError,
    UnknownLabelError,
)


@dataclass(frozen=True)
class EvalRecord:
    """Outcome of reasoning over one scene, ready for aggregation."""

    scene_id: str
    truth_label: str
    probs: np.ndarray
    sims: np.ndarray
    attention_on_truth: float | None = None
    timing_us: int = 0
    novel: bool = False
    context_weight: float | None = None

    def __post_init__(self):
        if self.probs.shape != self.sims.shape or self.probs.ndim != 1:
            raise InvalidShapeError("probs and sims must be 1-D vectors of equal length")


@dataclass
class Report:
    """Aggregate evaluation report; one value per metric."""

    top1: float
    top5: float
    map: float
    recall_at: dict
    precision_at: dict
    mean_ambiguity: float
    mean_margin: float
    mean_attention_overlap: float
    mean_context_weight: float
    failure_rate_novel: float
    ms_per_sample: float
    n_records: int
    dataset_fingerprint: str
    gen_gain_points: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "top1": self.top1,
            "top5": self.top5,
            "map": self.map,
            "recall_at": {str(k): v for k, v in self.recall_at.items()},
            "precision_at": {str(k): v for k, v in self.precision_at.items()},
            "mean_ambiguity": self.mean_ambiguity,
            "mean_margin": self.mean_margin,
            "mean_attention_overlap": self.mean_attention_overlap,
            "mean_context_weight": self.mean_context_weight,
            "failure_rate_novel": self.failure_rate_novel,
            "gen_gain_points": self.gen_gain_points,
            "ms_per_sample": self.ms_per_sample,
            "n_records": self.n_records,
            "dataset_fingerprint": self.dataset_fingerprint,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Report":
        return cls(
            top1=d["top1"],
            top5=d["top5"],
            map=d["map"],
            recall_at={int(k): v for k, v in d["recall_at"].items()},
            precision_at={int(k): v for k, v in d["precision_at"].items()},
            mean_ambiguity=d["mean_ambiguity"],
            mean_margin=d["mean_margin"],
            mean_attention_overlap=d["mean_attention_overlap"],
            mean_context_weight=d["mean_context_weight"],
            failure_rate_novel=d["failure_rate_novel"],
            ms_per_sample=d["ms_per_sample"],
            n_records=d["n_records"],
            dataset_fingerprint=d["dataset_fingerprint"],
            gen_gain_points=d.get("gen_gain_points"),
        )

    def rows(self) -> list:
        """Flat (parameter, value) rows; dict-valued metrics expand to one row per k."""
        out = [
            ("top1_accuracy", self.top1),
            ("top5_accuracy", self.top5),
            ("mean_average_precision", self.map),
        ]
        for k in sorted(self.recall_at):
            out.append((f"recall_at_{k}", self.recall_at[k]))
        for k in sorted(self.precision_at):
            out.append((f"precision_at_{k}", self.precision_at[k]))
        out += [
            ("mean_ambiguity", self.mean_ambiguity),
            ("mean_similarity_margin", self.mean_margin),
            ("mean_attention_overlap", self.mean_attention_overlap),
            ("mean_context_weight", self.mean_context_weight),
            ("failure_rate_novel", self.failure_rate_novel),
            ("gen_gain_points", self.gen_gain_points),
            ("ms_per_sample", self.ms_per_sample),
            ("n_records", self.n_records),
            ("dataset_fingerprint", self.dataset_fingerprint),
        ]
        return out


def _truth_index(record: EvalRecord, labelset) -> int:
    try:
        return list(labelset).index(record.truth_label)
    except ValueError:
        raise UnknownLabelError(
            f"truth label {record.truth_label!r} not in label set"
        ) from None


def _rank_of_truth(scores: np.ndarray, truth_idx: int) -> int:
    """1-based rank, higher score first, equal scores ordered by label index."""
    s_t = scores[truth_idx]
    better = int(np.sum(scores > s_t))
    tied_before = int(np.sum(scores[:truth_idx] == s_t))
    return better + tied_before + 1


def top_k_accuracy(records, labelset, k: int) -> float:
    """Fraction of records whose truth label ranks within the top k by probability."""
    if k < 1:
        raise ConfigInvalidError(f"k must be >= 1, got {k}")
    recs = list(records)
    if not recs:
        raise EmptyInputError("no records")
    hits = sum(
        1 for r in recs if _rank_of_truth(r.probs, _truth_index(r, labelset)) <= k
    )
    return hits / len(recs)


def mean_average_precision(records, labelset) -> float:
    """Mean over classes (with at least one positive) of average precision.

    For each class, records are ranked by that class's predicted probability
    (ties: earlier record first) and precision is read off at every
    true-positive rank.
    """
    recs = list(records)
    if not recs:
        raise EmptyInputError("no records")
    labels = list(labelset)
    truth_idx = [_truth_index(r, labels) for r in recs]
    aps = []
    for c in range(len(labels)):
        positives = [i for i, t in enumerate(truth_idx) if t == c]
        if not positives:
            continue
        scores = [float(r.probs[c]) for r in recs]
        order = sorted(range(len(recs)), key=lambda i: (-scores[i], i))
        hits = 0
        precisions = []
        for rank, i in enumerate(order, start=1):
            if truth_idx[i] == c:
                hits += 1
                precisions.append(hits / rank)
        aps.append(sum(precisions) / len(positives))
    if not aps:
        raise EmptyInputError("no class has a positive record")
    return sum(aps) / len(aps)


def recall_precision_at_k(records, labelset, k: int) -> tuple[float, float]:
    """(recall@k, precision@k) under the single-truth-label convention.

    Recall@k is the truth-in-top-k fraction; precision@k divides each hit
    by k before averaging, so it equals recall@k / k.
    """
    recall = top_k_accuracy(records, labelset, k)
    return recall, recall / k


def ambiguity_index(probs) -> float:
    """Shannon entropy of the distribution normalized by log K, clamped to [0, 1]."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise DegenerateKError("ambiguity needs at least two outcomes")
    pos = p[p > 0]
    h = float(-(pos * np.log(pos)).sum() / np.log(p.size))
    return min(max(h, 0.0), 1.0)


def similarity_margin(record: EvalRecord, labelset) -> float:
    """Truth similarity minus the best incorrect similarity; positive iff ranked first."""
    if record.sims.size < 2:
        raise DegenerateKError("margin needs at least two labels")
    t = _truth_index(record, labelset)
    others = np.delete(record.sims, t)
    return float(record.sims[t] - others.max())


def attention_overlap(record: EvalRecord) -> float:
    """Share of attention mass on ground-truth-relevant objects, recorded at reasoning time."""
    if record.attention_on_truth is None:
        raise MissingMaskError(f"record {record.scene_id} carries no attention overlap")
    return record.attention_on_truth


def generalization_gain(report_aligned: Report, report_baseline: Report) -> float:
    """Top-1 improvement of the aligned run over the baseline, in percentage points."""
    if report_aligned.dataset_fingerprint != report_baseline.dataset_fingerprint:
        raise DatasetMismatchError(
            "reports cover different scene sets: "
            f"{report_aligned.dataset_fingerprint} vs {report_baseline.dataset_fingerprint}"
        )
    return report_aligned.top1 * 100.0 - report_baseline.top1 * 100.0


def dataset_fingerprint(scene_ids) -> str:
    digest = hashlib.sha256("\n".join(sorted(scene_ids)).encode("utf-8")).hexdigest()
    return digest[:16]


def build_report(records, labelset, ks=(1, 5, 10)) -> Report:
    """Aggregate every metric over the records.

    Means over optional per-record fields (attention overlap, context
    weight) skip records that lack them and fall back to 0.0 when no record
    carries the field. failure_rate_novel is 1 - top1 over the novel-flagged
    subset, 0.0 when there is none.
    """
    recs = list(records)
    if not recs:
        raise EmptyInputError("no records")
    recall_at = {}
    precision_at = {}
    for k in ks:
        recall_at[k], precision_at[k] = recall_precision_at_k(recs, labelset, k)
    overlaps = [r.attention_on_truth for r in recs if r.attention_on_truth is not None]
    weights = [r.context_weight for r in recs if r.context_weight is not None]
    novel = [r for r in recs if r.novel]
    return Report(
        top1=top_k_accuracy(recs, labelset, 1),
        top5=top_k_accuracy(recs, labelset, 5),
        map=mean_average_precision(recs, labelset),
        recall_at=recall_at,
        precision_at=precision_at,
        mean_ambiguity=float(np.mean([ambiguity_index(r.probs) for r in recs])),
        mean_margin=float(np.mean([similarity_margin(r, labelset) for r in recs])),
        mean_attention_overlap=float(np.mean(overlaps)) if overlaps else 0.0,
        mean_context_weight=float(np.mean(weights)) if weights else 0.0,
        failure_rate_novel=(1.0 - top_k_accuracy(novel, labelset, 1)) if novel else 0.0,
        ms_per_sample=float(np.mean([r.timing_us for r in recs])) / 1000.0,
        n_records=len(recs),
        dataset_fingerprint=dataset_fingerprint([r.scene_id for r in recs]),
    )
