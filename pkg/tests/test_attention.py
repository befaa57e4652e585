"""Attention tests: masked softmax, single-view attention against a
per-location loop oracle, and the multi-view reductions."""

import numpy as np
import pytest

from oracles import naive_multiview_attention, naive_self_attention

from epiview.attention import (
    AttentionWeights,
    FeatureGrid,
    masked_softmax,
    multiview_attention,
    self_attention,
)
from epiview.camera import intrinsics_from_fov, spherical_pose
from epiview.epipolar import EpipolarMaskSet
from epiview.plucker import PluckerProjection, plucker_grid


@pytest.fixture
def weights():
    rng = np.random.default_rng(101)
    return AttentionWeights(
        rng.standard_normal((8, 8)),
        rng.standard_normal((8, 8)),
        rng.standard_normal((8, 8)),
    )


def random_views(seed, n, h=4, w=4, d=8):
    rng = np.random.default_rng(seed)
    return [FeatureGrid(rng.standard_normal((h, w, d))) for _ in range(n)]


def random_mask_set(seed, n, h=4, w=4, density=0.3):
    rng = np.random.default_rng(seed)
    hw = h * w
    pairs = {
        (i, j): rng.random((hw, hw)) < density
        for i in range(n)
        for j in range(n)
        if i != j
    }
    return EpipolarMaskSet(n, h, w, pairs)


class TestMaskedSoftmax:
    def test_uniform_logits_split_evenly(self):
        allowed = np.array([True, False, True, True, False])
        out = masked_softmax(np.zeros(5), allowed)
        np.testing.assert_allclose(out[allowed], 1.0 / 3.0, atol=1e-12)
        np.testing.assert_array_equal(out[~allowed], 0.0)

    def test_all_allowed_equals_plain_softmax(self):
        rng = np.random.default_rng(103)
        logits = rng.standard_normal(16)
        out = masked_softmax(logits, np.ones(16, dtype=bool))
        expected = np.exp(logits - logits.max())
        expected /= expected.sum()
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_single_allowed_entry_takes_all(self):
        logits = np.array([5.0, -100.0, 3.0])
        out = masked_softmax(logits, np.array([False, True, False]))
        np.testing.assert_array_equal(out, [0.0, 1.0, 0.0])

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(107)
        for _ in range(20):
            logits = rng.standard_normal(32) * 50
            allowed = rng.random(32) < 0.5
            if not allowed.any():
                allowed[0] = True
            out = masked_softmax(logits, allowed)
            assert abs(out.sum() - 1.0) <= 1e-6
            np.testing.assert_array_equal(out[~allowed], 0.0)

    def test_no_allowed_entries_is_an_error(self):
        with pytest.raises(ValueError):
            masked_softmax(np.zeros(4), np.zeros(4, dtype=bool))


class TestSelfAttention:
    def test_single_location_returns_value_projection(self, weights):
        rng = np.random.default_rng(109)
        grid = FeatureGrid(rng.standard_normal((1, 1, 8)))
        out = self_attention(grid, weights)
        np.testing.assert_array_equal(out.values[0, 0], grid.values[0, 0] @ weights.wv)

    def test_zero_query_gives_uniform_attention(self):
        rng = np.random.default_rng(113)
        grid = FeatureGrid(rng.standard_normal((3, 3, 8)))
        w = AttentionWeights(
            np.zeros((8, 8)),
            rng.standard_normal((8, 8)),
            rng.standard_normal((8, 8)),
        )
        out = self_attention(grid, w)
        mean_v = (grid.flat() @ w.wv).mean(axis=0)
        for row in out.flat():
            np.testing.assert_allclose(row, mean_v, atol=1e-12)

    def test_matches_loop_oracle(self, weights):
        rng = np.random.default_rng(127)
        grid = FeatureGrid(rng.standard_normal((4, 4, 8)))
        out = self_attention(grid, weights)
        expected = naive_self_attention(grid.values, weights.wq, weights.wk, weights.wv)
        np.testing.assert_allclose(out.values, expected, atol=1e-9)

    def test_rejects_dimension_mismatch(self, weights):
        with pytest.raises(ValueError):
            self_attention(FeatureGrid(np.zeros((2, 2, 5))), weights)


class TestMultiviewAttention:
    def test_all_true_masks_equal_concat_attention(self, weights):
        views = random_views(131, 2)
        hw = 16
        full = {
            (i, j): np.ones((hw, hw), dtype=bool)
            for i in range(2)
            for j in range(2)
            if i != j
        }
        mine = multiview_attention(views, weights)
        ref = naive_multiview_attention(
            [v.values for v in views], weights.wq, weights.wk, weights.wv, full
        )
        for got, want in zip(mine, ref):
            np.testing.assert_allclose(got.values, want, atol=1e-12)

    def test_single_view_equals_self_attention(self, weights):
        (view,) = random_views(137, 1)
        out = multiview_attention([view], weights)[0]
        np.testing.assert_array_equal(out.values, self_attention(view, weights).values)

    def test_blocked_cross_view_reduces_to_per_view(self, weights):
        views = random_views(139, 3)
        hw = 16
        blocked = {
            (i, j): np.zeros((hw, hw), dtype=bool)
            for i in range(3)
            for j in range(3)
            if i != j
        }
        outs = multiview_attention(views, weights, EpipolarMaskSet(3, 4, 4, blocked))
        for view, out in zip(views, outs):
            np.testing.assert_allclose(
                out.values, self_attention(view, weights).values, atol=1e-12
            )

    def test_random_masks_match_joint_matrix_oracle(self, weights):
        views = random_views(149, 2)
        masks = random_mask_set(151, 2)
        mine = multiview_attention(views, weights, masks)
        ref = naive_multiview_attention(
            [v.values for v in views], weights.wq, weights.wk, weights.wv, masks.pairs
        )
        for got, want in zip(mine, ref):
            np.testing.assert_allclose(got.values, want, atol=1e-9)

    def test_permutation_equivariance(self, weights):
        views = random_views(157, 3)
        masks = random_mask_set(163, 3)
        perm = [2, 0, 1]
        permuted_masks = EpipolarMaskSet(
            3,
            4,
            4,
            {
                (a, b): masks.pairs[(perm[a], perm[b])]
                for a in range(3)
                for b in range(3)
                if a != b
            },
        )
        base = multiview_attention(views, weights, masks)
        shuffled = multiview_attention(
            [views[p] for p in perm], weights, permuted_masks
        )
        # key order inside the concat changes, so equality is up to
        # floating-point reassociation
        for a, out in enumerate(shuffled):
            np.testing.assert_allclose(out.values, base[perm[a]].values, atol=1e-12)

    def test_zero_plucker_injection_is_bit_exact_identity(self, weights):
        views = random_views(167, 2)
        masks = random_mask_set(173, 2)
        intr = intrinsics_from_fov(40.26, 4, 4)
        grids = [
            plucker_grid(spherical_pose(0.0, az, 3.5), intr) for az in (0.0, 120.0)
        ]
        plain = multiview_attention(views, weights, masks)
        injected = multiview_attention(
            views,
            weights,
            masks,
            plucker_grids=grids,
            plucker_projection=PluckerProjection.zero_init(8),
        )
        for a, b in zip(plain, injected):
            np.testing.assert_array_equal(a.values, b.values)

    def test_nonzero_plucker_changes_output(self, weights):
        views = random_views(179, 2)
        intr = intrinsics_from_fov(40.26, 4, 4)
        grids = [
            plucker_grid(spherical_pose(0.0, az, 3.5), intr) for az in (0.0, 120.0)
        ]
        rng = np.random.default_rng(181)
        proj = PluckerProjection(rng.standard_normal((6, 8)), np.zeros(8))
        plain = multiview_attention(views, weights)
        injected = multiview_attention(
            views, weights, plucker_grids=grids, plucker_projection=proj
        )
        assert any(
            not np.allclose(a.values, b.values) for a, b in zip(plain, injected)
        )

    def test_shape_errors(self, weights):
        with pytest.raises(ValueError):
            multiview_attention([], weights)
        views = random_views(191, 2)
        odd = FeatureGrid(np.zeros((2, 4, 8)))
        with pytest.raises(ValueError):
            multiview_attention([views[0], odd], weights)
        with pytest.raises(ValueError):
            multiview_attention(views, weights, random_mask_set(193, 3))
        with pytest.raises(ValueError):
            multiview_attention(
                views, weights, plucker_grids=None,
                plucker_projection=PluckerProjection.zero_init(8),
            )
