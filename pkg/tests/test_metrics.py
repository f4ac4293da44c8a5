import numpy as np
import pytest

from vlscene.errors import (
    DatasetMismatchError,
    DegenerateKError,
    EmptyInputError,
    MissingMaskError,
    UnknownLabelError,
)
from vlscene.metrics import (
    EvalRecord,
    ambiguity_index,
    attention_overlap,
    build_report,
    generalization_gain,
    mean_average_precision,
    recall_precision_at_k,
    similarity_margin,
    top_k_accuracy,
)

from oracles import map_bruteforce

LABELS = ("cat", "dog", "car", "tree")

_REC_COUNTER = iter(range(10**9))


def rec(truth, probs, sims=None, **kw):
    probs = np.asarray(probs, dtype=np.float64)
    sims = probs.copy() if sims is None else np.asarray(sims, dtype=np.float64)
    kw.pop("i", None)
    kw.setdefault("scene_id", f"scene_{next(_REC_COUNTER):06d}")
    return EvalRecord(truth_label=truth, probs=probs, sims=sims, **kw)


def random_records(rng, n, k, rich=False):
    labels = tuple(f"c{i}" for i in range(k))
    records = []
    for i in range(n):
        probs = rng.dirichlet(np.ones(k))
        extras = {}
        if rich:
            extras = {
                "novel": i % 10 == 0,
                "timing_us": int(rng.integers(10, 5000)),
                "attention_on_truth": float(rng.uniform(0, 1)),
            }
        records.append(
            EvalRecord(
                scene_id=f"s{i:04d}",
                truth_label=labels[int(rng.integers(0, k))],
                probs=probs,
                sims=rng.uniform(-1, 1, k),
                **extras,
            )
        )
    return records, labels


class TestTopKAccuracy:
    def test_perfect_argmax(self):
        records = [rec("cat", [0.7, 0.1, 0.1, 0.1], i=1), rec("dog", [0.1, 0.7, 0.1, 0.1], i=2)]
        assert top_k_accuracy(records, LABELS, 1) == 1.0

    def test_k_at_least_num_classes(self):
        rng = np.random.default_rng(0)
        records, labels = random_records(rng, 10, 4)
        assert top_k_accuracy(records, labels, 4) == 1.0
        assert top_k_accuracy(records, labels, 9) == 1.0

    def test_hand_ranked_two_thirds(self):
        records = [
            rec("cat", [0.9, 0.05, 0.03, 0.02], i=1),   # rank 1
            rec("dog", [0.5, 0.3, 0.1, 0.1], i=2),      # rank 2
            rec("car", [0.4, 0.3, 0.2, 0.1], i=3),      # rank 3
        ]
        assert top_k_accuracy(records, LABELS, 2) == pytest.approx(2 / 3)

    def test_tie_breaks_by_label_index(self):
        # equal probs: "cat" (index 0) outranks "dog" (index 1)
        records = [rec("dog", [0.5, 0.5, 0.0, 0.0])]
        assert top_k_accuracy(records, LABELS, 1) == 0.0
        assert top_k_accuracy(records, LABELS, 2) == 1.0

    def test_unknown_label(self):
        with pytest.raises(UnknownLabelError):
            top_k_accuracy([rec("bird", [1.0, 0.0, 0.0, 0.0])], LABELS, 1)


class TestMeanAveragePrecision:
    def test_perfectly_ranked_single_class(self):
        records = [
            rec("cat", [0.9, 0.1, 0.0, 0.0], i=1),
            rec("cat", [0.8, 0.2, 0.0, 0.0], i=2),
            rec("dog", [0.1, 0.9, 0.0, 0.0], i=3),
        ]
        assert mean_average_precision(records, LABELS) == 1.0

    def test_positive_ranked_second(self):
        labels = ("a", "b")
        records = [
            EvalRecord(scene_id="s0", truth_label="b", probs=np.array([0.9, 0.1]),
                       sims=np.array([0.9, 0.1])),
            EvalRecord(scene_id="s1", truth_label="a", probs=np.array([0.6, 0.4]),
                       sims=np.array([0.6, 0.4])),
        ]
        # class "a": its positive (record 1) is out-scored by record 0 -> AP 1/2
        # class "b": positive (record 0) has the lower "b"-score -> also 1/2
        assert mean_average_precision(records, labels) == pytest.approx(0.5)

    def test_matches_bruteforce_exactly(self):
        rng = np.random.default_rng(1234)
        for _ in range(50):
            records, labels = random_records(rng, int(rng.integers(2, 21)), int(rng.integers(2, 6)))
            fast = mean_average_precision(records, labels)
            slow = map_bruteforce(records, labels)
            assert fast == slow  # bitwise: identical tie-breaking and summation order

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            mean_average_precision([], LABELS)


class TestRecallPrecisionAtK:
    def test_k_covers_everything(self):
        rng = np.random.default_rng(5)
        records, labels = random_records(rng, 8, 3)
        recall, _ = recall_precision_at_k(records, labels, 3)
        assert recall == 1.0

    def test_perfect_argmax_precision_one(self):
        records = [rec("cat", [0.9, 0.1, 0.0, 0.0])]
        recall, precision = recall_precision_at_k(records, LABELS, 1)
        assert recall == 1.0 and precision == 1.0

    def test_three_of_four_at_two(self):
        records = [
            rec("cat", [0.6, 0.3, 0.05, 0.05], i=1),   # rank 1
            rec("dog", [0.5, 0.4, 0.05, 0.05], i=2),   # rank 2
            rec("car", [0.1, 0.2, 0.6, 0.1], i=3),     # rank 1
            rec("tree", [0.4, 0.3, 0.2, 0.1], i=4),    # rank 4
        ]
        recall, precision = recall_precision_at_k(records, LABELS, 2)
        assert recall == pytest.approx(0.75)
        assert precision == pytest.approx(0.375)

    def test_recall_monotone_in_k(self):
        rng = np.random.default_rng(6)
        records, labels = random_records(rng, 30, 5)
        values = [recall_precision_at_k(records, labels, k)[0] for k in range(1, 7)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0


class TestAmbiguityIndex:
    def test_uniform_is_one(self):
        assert ambiguity_index([0.25, 0.25, 0.25, 0.25]) == pytest.approx(1.0, abs=1e-9)

    def test_one_hot_is_zero(self):
        assert ambiguity_index([0.0, 1.0, 0.0, 0.0]) == 0.0

    def test_half_split(self):
        assert ambiguity_index([0.5, 0.5, 0.0, 0.0]) == pytest.approx(0.5, abs=1e-9)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(7)
        p = rng.dirichlet(np.ones(6))
        assert ambiguity_index(p) == pytest.approx(ambiguity_index(p[::-1]), abs=1e-12)

    def test_mixing_toward_uniform_increases(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            p = rng.dirichlet(np.ones(5))
            u = np.full(5, 0.2)
            base = ambiguity_index(p)
            for lam in (0.25, 0.5):
                assert ambiguity_index((1 - lam) * p + lam * u) >= base - 1e-12

    def test_degenerate_k(self):
        with pytest.raises(DegenerateKError):
            ambiguity_index([1.0])


class TestSimilarityMargin:
    def test_positive_margin(self):
        r = rec("cat", [0.9, 0.1, 0.0, 0.0], sims=[0.9, 0.7, 0.2, 0.1])
        assert similarity_margin(r, LABELS) == pytest.approx(0.2)

    def test_negative_margin(self):
        r = rec("cat", [0.4, 0.6, 0.0, 0.0], sims=[0.5, 0.8, 0.2, 0.1])
        assert similarity_margin(r, LABELS) == pytest.approx(-0.3)

    def test_unknown_label(self):
        r = rec("cat", [1.0, 0.0, 0.0, 0.0])
        with pytest.raises(UnknownLabelError):
            similarity_margin(r, ("a", "b", "c", "d"))


class TestAttentionOverlap:
    def test_reads_recorded_value(self):
        r = rec("cat", [1.0, 0.0, 0.0, 0.0], attention_on_truth=0.75)
        assert attention_overlap(r) == 0.75

    def test_missing_mask(self):
        r = rec("cat", [1.0, 0.0, 0.0, 0.0])
        with pytest.raises(MissingMaskError):
            attention_overlap(r)


class TestGeneralizationGain:
    def _report(self, rng, top1_target, n=10):
        k = 4
        labels = tuple(f"c{i}" for i in range(k))
        records = []
        for i in range(n):
            correct = i < round(top1_target * n)
            probs = np.full(k, 0.05)
            target = int(rng.integers(0, k))
            if correct:
                probs[target] = 0.85
            else:
                probs[(target + 1) % k] = 0.85
            probs = probs / probs.sum()
            records.append(EvalRecord(scene_id=f"s{i}", truth_label=labels[target],
                                      probs=probs, sims=probs.copy()))
        return build_report(records, labels)

    def test_identical_reports_zero(self):
        rng = np.random.default_rng(9)
        r = self._report(rng, 0.7)
        assert generalization_gain(r, r) == 0.0

    def test_points_arithmetic(self):
        rng = np.random.default_rng(10)
        aligned = self._report(rng, 0.8)
        rng = np.random.default_rng(10)
        baseline = self._report(rng, 0.5)
        assert generalization_gain(aligned, baseline) == pytest.approx(30.0)

    def test_baseline_better_is_negative(self):
        rng = np.random.default_rng(11)
        aligned = self._report(rng, 0.4)
        rng = np.random.default_rng(11)
        baseline = self._report(rng, 0.6)
        assert generalization_gain(aligned, baseline) < 0

    def test_dataset_mismatch(self):
        rng = np.random.default_rng(12)
        a = self._report(rng, 0.5, n=10)
        b = self._report(rng, 0.5, n=12)
        with pytest.raises(DatasetMismatchError):
            generalization_gain(a, b)

    def test_percentage_points_example(self):
        # 0.746 vs 0.562 -> +18.4 points
        rng = np.random.default_rng(13)
        a = self._report(rng, 0.746, n=500)
        rng = np.random.default_rng(13)
        b = self._report(rng, 0.562, n=500)
        assert generalization_gain(a, b) == pytest.approx(18.4, abs=1e-9)


class TestBuildReport:
    def test_single_perfect_record(self):
        r = rec("cat", [0.97, 0.01, 0.01, 0.01], sims=[0.9, 0.2, 0.1, 0.0])
        report = build_report([r], LABELS)
        assert report.top1 == 1.0
        assert report.failure_rate_novel == 0.0
        assert report.mean_margin > 0

    def test_fields_match_scripted_recomputation(self):
        rng = np.random.default_rng(77)
        records, labels = random_records(rng, 50, 5, rich=True)
        report = build_report(records, labels)

        def rank(r):
            t = labels.index(r.truth_label)
            s = r.probs
            return 1 + int(np.sum(s > s[t])) + int(np.sum(s[:t] == s[t]))

        assert report.top1 == sum(rank(r) == 1 for r in records) / 50
        assert report.top5 == sum(rank(r) <= 5 for r in records) / 50
        assert report.map == map_bruteforce(records, labels)
        assert report.recall_at[5] == sum(rank(r) <= 5 for r in records) / 50
        assert report.precision_at[5] == pytest.approx(report.recall_at[5] / 5)
        exp_amb = np.mean([ambiguity_index(r.probs) for r in records])
        assert report.mean_ambiguity == pytest.approx(exp_amb)
        novel = [r for r in records if r.novel]
        assert report.failure_rate_novel == pytest.approx(
            1 - sum(rank(r) == 1 for r in novel) / len(novel)
        )
        assert report.ms_per_sample == pytest.approx(
            np.mean([r.timing_us for r in records]) / 1000
        )
        assert report.n_records == 50

    def test_json_round_trip(self):
        import json

        from vlscene.metrics import Report

        rng = np.random.default_rng(14)
        records, labels = random_records(rng, 12, 3)
        report = build_report(records, labels)
        report.gen_gain_points = 3.25
        back = Report.from_json_dict(json.loads(json.dumps(report.to_json_dict())))
        assert back == report

    def test_empty_records(self):
        with pytest.raises(EmptyInputError):
            build_report([], LABELS)
