import numpy as np
import pytest

from vlscene.embeddings import l2_normalize, normalize_rows
from vlscene.errors import ConfigInvalidError, DimMismatchError, EmptyInputError, ZeroVectorError
from vlscene.fusion import (
    AttentionParams,
    ContextVector,
    aggregate_context,
    contextualize,
    cross_attention,
)

from oracles import softmax_matmul_attention


def unit_rows(rng, n, d):
    return normalize_rows(rng.standard_normal((n, d)))


class TestCrossAttention:
    def test_identical_tokens_uniform_rows(self):
        rng = np.random.default_rng(0)
        params = AttentionParams.identity(4)
        tok = np.tile(l2_normalize(rng.standard_normal(4)), (3, 1))
        out = cross_attention(params, unit_rows(rng, 2, 4), tok)
        np.testing.assert_allclose(out.weights, np.full((2, 3), 1 / 3), atol=1e-9)
        for row in out.attended:
            np.testing.assert_allclose(row, tok[0] @ params.w_v, atol=1e-12)

    def test_single_token_all_ones(self):
        rng = np.random.default_rng(1)
        params = AttentionParams.identity(5)
        tok = unit_rows(rng, 1, 5)
        out = cross_attention(params, unit_rows(rng, 4, 5), tok)
        np.testing.assert_array_equal(out.weights, np.ones((4, 1)))
        for row in out.attended:
            np.testing.assert_allclose(row, tok[0] @ params.w_v, atol=1e-12)

    def test_matches_scripted_oracle(self):
        params = AttentionParams.identity(2)
        objects = np.array([[1.0, 0.0], [0.6, 0.8]])
        tokens = np.array([[0.0, 1.0], [0.8, -0.6]])
        out = cross_attention(params, objects, tokens)
        w, att = softmax_matmul_attention(objects, tokens, params.w_q, params.w_k, params.w_v)
        np.testing.assert_allclose(out.weights, w, atol=1e-9)
        np.testing.assert_allclose(out.attended, att, atol=1e-9)

    def test_random_oracle_with_projections(self):
        rng = np.random.default_rng(13)
        w = [rng.standard_normal((6, 3)) for _ in range(3)]
        params = AttentionParams(w_q=w[0], w_k=w[1], w_v=w[2])
        objects = rng.standard_normal((5, 6))
        tokens = rng.standard_normal((4, 6))
        out = cross_attention(params, objects, tokens)
        ow, oa = softmax_matmul_attention(objects, tokens, *w)
        np.testing.assert_allclose(out.weights, ow, atol=1e-9)
        np.testing.assert_allclose(out.attended, oa, atol=1e-9)

    def test_rows_stochastic(self):
        rng = np.random.default_rng(2)
        params = AttentionParams.identity(8)
        for _ in range(30):
            out = cross_attention(
                params,
                rng.standard_normal((rng.integers(1, 6), 8)),
                rng.standard_normal((rng.integers(1, 7), 8)),
            )
            np.testing.assert_allclose(out.weights.sum(axis=1), 1.0, atol=1e-6)
            assert np.all(out.weights >= 0)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        params = AttentionParams.identity(4)
        objects = rng.standard_normal((5, 4))
        tokens = rng.standard_normal((6, 4))
        base = cross_attention(params, objects, tokens)
        perm_o = rng.permutation(5)
        perm_t = rng.permutation(6)
        shuffled = cross_attention(params, objects[perm_o], tokens[perm_t])
        np.testing.assert_allclose(shuffled.weights, base.weights[perm_o][:, perm_t], atol=1e-12)
        np.testing.assert_allclose(shuffled.attended, base.attended[perm_o], atol=1e-12)

    def test_empty_inputs(self):
        params = AttentionParams.identity(3)
        with pytest.raises(EmptyInputError):
            cross_attention(params, np.zeros((0, 3)), np.ones((2, 3)))

    def test_dim_mismatch(self):
        params = AttentionParams.identity(3)
        with pytest.raises(DimMismatchError):
            cross_attention(params, np.ones((2, 4)), np.ones((2, 3)))


class TestAggregateContext:
    def test_single_object_alpha_zero(self):
        v = np.array([0.0, 1.0, 0.0])
        ctx = aggregate_context(v.reshape(1, -1), np.array([1.0, 0.0, 0.0]), 0.0)
        np.testing.assert_array_equal(ctx.c, v)

    def test_hand_case(self):
        objects = np.array([[1.0, 0.0], [0.0, 1.0]])
        t_scene = np.array([1.0, 1.0]) / np.sqrt(2)
        ctx = aggregate_context(objects, t_scene, 1.0)
        np.testing.assert_allclose(ctx.c, [1.20710678, 1.20710678], atol=1e-8)

    def test_alpha_zero_is_mean(self):
        rng = np.random.default_rng(4)
        objects = rng.standard_normal((5, 3))
        ctx = aggregate_context(objects, rng.standard_normal(3), 0.0)
        np.testing.assert_allclose(ctx.c, objects.mean(axis=0), atol=1e-15)

    def test_linear_in_alpha(self):
        rng = np.random.default_rng(5)
        objects = rng.standard_normal((4, 6))
        t = rng.standard_normal(6)
        c = lambda a: aggregate_context(objects, t, a).c
        np.testing.assert_allclose(c(0.3) + c(1.1) - c(0.0), c(1.4), atol=1e-9)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ConfigInvalidError):
            aggregate_context(np.ones((1, 2)), np.ones(2), -0.1)


class TestContextualize:
    def test_beta_zero_identity(self):
        g = np.array([0.6, 0.8])
        ctx = ContextVector(c=np.array([5.0, -3.0]), alpha=0.5)
        np.testing.assert_array_equal(contextualize(g, ctx, 0.0), g)

    def test_collinear_unchanged(self):
        g = np.array([1.0, 0.0])
        out = contextualize(g, ContextVector(c=g.copy(), alpha=0.0), 1.0)
        np.testing.assert_allclose(out, g, atol=1e-12)

    def test_hand_case(self):
        out = contextualize(
            np.array([1.0, 0.0]), ContextVector(c=np.array([0.0, 1.0]), alpha=0.0), 1.0
        )
        np.testing.assert_allclose(out, [0.70710678, 0.70710678], atol=1e-8)

    def test_always_unit(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            g = l2_normalize(rng.standard_normal(5))
            ctx = ContextVector(c=rng.standard_normal(5), alpha=0.5)
            out = contextualize(g, ctx, float(rng.uniform(0.01, 3)))
            assert abs(np.linalg.norm(out) - 1.0) <= 1e-6

    def test_cancellation_raises(self):
        g = np.array([1.0, 0.0])
        with pytest.raises(ZeroVectorError):
            contextualize(g, ContextVector(c=-g, alpha=0.0), 1.0)
