import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atnmf import matrix
from atnmf.backend import kernels
from atnmf.errors import DimensionError, InvalidConfigError, InvalidInputError
from atnmf.sampling import restart_rng, sample_half_normal_matrix
from atnmf.solver import (
    SolverConfig,
    at_nmf,
    init_factors,
    mm_update_h,
    mm_update_w,
    objective,
    relative_change,
    scalar_r_oracle,
    standard_nmf,
    update_r,
)

from conftest import random_masked_instance


def full(f, n):
    return np.ones((f, n))


def exact_rank_k(rng, f, n, k):
    w = rng.random((f, k)) + 0.2
    h = rng.random((k, n)) + 0.2
    return w @ h


class TestConfig:
    def test_lambda_at_most_one_rejected(self):
        for lam in (1.0, 0.5, 0.0, -2.0):
            with pytest.raises(InvalidConfigError, match="lambda"):
                SolverConfig(k=2, lam=lam)

    def test_lambda_none_allowed(self):
        assert SolverConfig(k=2).lam is None

    def test_k_positive(self):
        with pytest.raises(InvalidConfigError):
            SolverConfig(k=0)

    def test_eps_positive(self):
        with pytest.raises(InvalidConfigError):
            SolverConfig(k=1, eps_in=0.0)

    def test_budgets_positive(self):
        with pytest.raises(InvalidConfigError):
            SolverConfig(k=1, max_inner=0)


class TestUpdateR:
    def test_unclamped_entry(self):
        r = update_r(np.array([[3.0]]), np.array([[1.0]]), full(1, 1), 2.0)
        assert r[0, 0] == 2.0

    def test_clamp_active(self):
        r = update_r(np.array([[1.0]]), np.array([[5.0]]), full(1, 1), 2.0)
        assert r[0, 0] == -1.0  # v + r == 0

    def test_large_lambda_shrinks(self):
        r = update_r(np.array([[3.0]]), np.array([[1.0]]), full(1, 1), 101.0)
        assert r[0, 0] == pytest.approx(0.02)
        r2 = update_r(np.array([[3.0]]), np.array([[1.0]]), full(1, 1), 1e9)
        assert abs(r2[0, 0]) < 1e-8

    def test_unobserved_entries_zero(self, rng):
        v = rng.random((6, 5))
        vhat = rng.random((6, 5))
        mask = (rng.random((6, 5)) < 0.5).astype(float)
        r = update_r(v, vhat, mask, 3.0)
        assert (r[mask == 0.0] == 0.0).all()

    def test_lambda_guard(self):
        with pytest.raises(InvalidConfigError):
            update_r(np.ones((1, 1)), np.ones((1, 1)), full(1, 1), 1.0)

    def test_shape_guard(self):
        with pytest.raises(DimensionError):
            update_r(np.ones((2, 2)), np.ones((2, 3)), full(2, 2), 2.0)

    @given(
        v=st.floats(0.0, 50.0),
        vhat=st.floats(0.0, 50.0),
        lam=st.floats(1.0001, 100.0),
    )
    def test_feasibility(self, v, vhat, lam):
        r = update_r(np.array([[v]]), np.array([[vhat]]), full(1, 1), lam)
        assert v + r[0, 0] >= 0.0

    def test_agrees_with_numeric_oracle(self, rng):
        m = full(1, 1)
        for _ in range(100):
            v, vhat = rng.uniform(0, 10, 2)
            lam = rng.uniform(1.001, 10.0)
            closed = update_r(np.array([[v]]), np.array([[vhat]]), m, lam)[0, 0]
            assert closed == pytest.approx(scalar_r_oracle(v, vhat, lam), abs=1e-5)


class TestScalarOracle:
    def test_interior_minimum(self):
        assert scalar_r_oracle(3.0, 1.0, 2.0) == pytest.approx(2.0, abs=1e-6)

    def test_boundary_minimum(self):
        assert scalar_r_oracle(1.0, 5.0, 2.0) == pytest.approx(-1.0, abs=1e-6)

    def test_symmetric_case(self):
        assert scalar_r_oracle(4.0, 4.0, 3.0) == pytest.approx(0.0, abs=1e-9)

    def test_lambda_guard(self):
        with pytest.raises(InvalidConfigError):
            scalar_r_oracle(1.0, 1.0, 1.0)


class TestFactorUpdates:
    def test_h_fixed_point(self, rng):
        w = rng.random((6, 2)) + 0.2
        h = rng.random((2, 4)) + 0.2
        u = w @ h
        np.testing.assert_allclose(mm_update_h(u, full(6, 4), w, h), h, rtol=1e-12)

    def test_w_fixed_point(self, rng):
        w = rng.random((6, 2)) + 0.2
        h = rng.random((2, 4)) + 0.2
        u = w @ h
        np.testing.assert_allclose(mm_update_w(u, full(6, 4), w, h), w, rtol=1e-12)

    def test_zero_row_stays_zero(self, rng):
        v, mask, w, h = random_masked_instance(rng, 6, 5, 3)
        h[1, :] = 0.0
        h2 = mm_update_h(v, mask, w, h)
        assert (h2[1, :] == 0.0).all()

    def test_zero_column_stays_zero(self, rng):
        v, mask, w, h = random_masked_instance(rng, 6, 5, 3)
        w[:, 2] = 0.0
        w2 = mm_update_w(v, mask, w, h)
        assert (w2[:, 2] == 0.0).all()

    def test_h_update_reduces_objective(self, rng):
        u = rng.random((6, 4)) + 0.1
        w = rng.random((6, 2)) + 0.1
        h = rng.random((2, 4)) + 0.1
        m = full(6, 4)
        before = matrix.frobenius_sq(u - w @ h)
        h2 = mm_update_h(u, m, w, h)
        after = matrix.frobenius_sq(u - w @ h2)
        assert after <= before + 1e-12

    def test_w_update_reduces_objective(self, rng):
        u = rng.random((6, 4)) + 0.1
        w = rng.random((6, 2)) + 0.1
        h = rng.random((2, 4)) + 0.1
        m = full(6, 4)
        before = matrix.frobenius_sq(u - w @ h)
        w2 = mm_update_w(u, m, w, h)
        after = matrix.frobenius_sq(u - w2 @ h)
        assert after <= before + 1e-12

    def test_nonnegative_outputs(self, rng):
        v, mask, w, h = random_masked_instance(rng, 8, 7, 3)
        assert (mm_update_h(v, mask, w, h) >= 0).all()
        assert (mm_update_w(v, mask, w, h) >= 0).all()

    def test_shape_guard(self, rng):
        with pytest.raises(DimensionError):
            mm_update_h(np.ones((4, 4)), full(4, 4), np.ones((4, 2)), np.ones((3, 4)))


class TestRelativeChange:
    def test_identical_is_zero(self, rng):
        a = rng.random((3, 3))
        assert relative_change(a, a) == 0.0

    def test_single_entry(self):
        assert relative_change(np.array([[1.1]]), np.array([[1.0]])) == pytest.approx(0.1)

    def test_two_entries(self):
        out = relative_change(np.array([[2.2, 4.4]]), np.array([[2.0, 4.0]]))
        assert out == pytest.approx(np.sqrt(0.1**2 + 0.1**2), rel=1e-9)

    def test_shape_guard(self):
        with pytest.raises(DimensionError):
            relative_change(np.ones((2, 2)), np.ones((2, 3)))


class TestObjective:
    def test_zero_r_reduces_to_masked_loss(self, rng):
        v, mask, w, h = random_masked_instance(rng, 5, 4, 2)
        zero = np.zeros_like(v)
        expected = matrix.frobenius_sq(mask * (v - w @ h))
        assert objective(v, zero, w, h, mask, 3.0) == pytest.approx(expected)

    def test_perfect_fit_is_zero(self, rng):
        w = rng.random((5, 2))
        h = rng.random((2, 4))
        v = w @ h
        assert objective(v, np.zeros_like(v), w, h, full(5, 4), 3.0) == pytest.approx(0.0, abs=1e-12)

    def test_optimal_r_beats_zero_r(self, rng):
        v, mask, w, h = random_masked_instance(rng, 7, 6, 2)
        lam = 2.5
        r = update_r(v, w @ h, mask, lam)
        assert objective(v, r, w, h, mask, lam) >= objective(v, np.zeros_like(v), w, h, mask, lam) - 1e-12


class TestInitFactors:
    def cfg(self, k, steps=5):
        return SolverConfig(k=k, init_mm_steps=steps)

    def test_no_refinement_is_raw_half_normal(self, rng):
        v = rng.random((8, 6)) + 0.1
        w, h = init_factors(v, full(8, 6), self.cfg(3, steps=0), restart_rng(42, 0))
        rng2 = restart_rng(42, 0)
        np.testing.assert_array_equal(w, sample_half_normal_matrix(rng2, 8, 3))
        np.testing.assert_array_equal(h, sample_half_normal_matrix(rng2, 3, 6))

    def test_refinement_strictly_decreases_fit(self, rng):
        v = exact_rank_k(rng, 12, 9, 3)
        mask = full(12, 9)
        losses = []
        w, h = init_factors(v, mask, self.cfg(3, steps=0), restart_rng(1, 0))
        mu = mask * v
        vhat = w @ h
        losses.append(matrix.frobenius_sq(v - vhat))
        for _ in range(5):
            vhat = kernels.sweep(mu, mask, w, h, 1e-12, vhat)
            losses.append(matrix.frobenius_sq(v - vhat))
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_deterministic(self, rng):
        v = rng.random((8, 6)) + 0.1
        mask = (rng.random((8, 6)) < 0.8).astype(float)
        a = init_factors(v, mask, self.cfg(2), restart_rng(5, 3))
        b = init_factors(v, mask, self.cfg(2), restart_rng(5, 3))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_all_zero_mask_rejected(self, rng):
        v = rng.random((4, 4))
        with pytest.raises(InvalidInputError):
            init_factors(v, np.zeros((4, 4)), self.cfg(2), restart_rng(0, 0))


class TestStandardNmf:
    def test_recovers_exact_rank_k(self, rng):
        v = exact_rank_k(rng, 20, 15, 3)
        cfg = SolverConfig(k=3, eps_in=1e-4, eps_out=1e-4)
        res = standard_nmf(v, full(20, 15), cfg, restart_rng(2, 0))
        assert matrix.frobenius_sq(v - res.w @ res.h) / matrix.frobenius_sq(v) < 1e-3

    def test_all_ones_rank_one(self):
        v = np.ones((10, 8))
        cfg = SolverConfig(k=1)
        res = standard_nmf(v, full(10, 8), cfg, restart_rng(3, 0))
        assert matrix.frobenius_sq(v - res.w @ res.h) / v.size < 1e-6

    def test_trace_deterministic(self, rng):
        v, mask, _, _ = random_masked_instance(rng, 10, 8, 2)
        cfg = SolverConfig(k=2)
        a = standard_nmf(v, mask, cfg, restart_rng(4, 0))
        b = standard_nmf(v, mask, cfg, restart_rng(4, 0))
        assert a.trace == b.trace
        np.testing.assert_array_equal(a.w, b.w)

    def test_fit_monotone_across_trace(self, rng):
        # with the perturbation frozen at zero the data never changes, so
        # the descent guarantee spans the whole run
        v, mask, _, _ = random_masked_instance(rng, 15, 12, 3)
        res = standard_nmf(v, mask, SolverConfig(k=3), restart_rng(6, 0))
        fits = [rec.fit for rec in res.trace]
        assert all(b <= a + 1e-10 for a, b in zip(fits, fits[1:]))
        assert res.r is None

    def test_rejects_all_zero_mask(self, rng):
        v = rng.random((5, 5))
        with pytest.raises(InvalidInputError):
            standard_nmf(v, np.zeros((5, 5)), SolverConfig(k=2), restart_rng(0, 0))


class TestAtNmf:
    def test_requires_lambda(self, rng):
        v, mask, _, _ = random_masked_instance(rng, 6, 5, 2)
        with pytest.raises(InvalidConfigError):
            at_nmf(v, mask, SolverConfig(k=2), restart_rng(0, 0))

    def test_huge_lambda_reverts_to_baseline(self, rng):
        v = exact_rank_k(rng, 16, 12, 3)
        mask = (np.random.default_rng(8).random((16, 12)) < 0.8).astype(float)
        cfg_a = SolverConfig(k=3, lam=1e6)
        cfg_n = SolverConfig(k=3)
        res_a = at_nmf(v, mask, cfg_a, restart_rng(9, 0))
        res_n = standard_nmf(v, mask, cfg_n, restart_rng(9, 0))
        va, vn = res_a.w @ res_a.h, res_n.w @ res_n.h
        rel = np.linalg.norm(va - vn) / np.linalg.norm(vn)
        assert rel < 1e-3

    def test_feasibility_and_masked_r(self, rng):
        v = exact_rank_k(rng, 14, 10, 3)
        mask = (rng.random((14, 10)) < 0.6).astype(float)
        res = at_nmf(v, mask, SolverConfig(k=3, lam=3.0), restart_rng(10, 0))
        assert ((v + res.r)[mask == 1.0] >= -1e-12).all()
        assert (res.r[mask == 0.0] == 0.0).all()
        assert np.isfinite(res.w).all() and np.isfinite(res.h).all()
        assert all(np.isfinite(rec.objective) for rec in res.trace)

    def test_mask_isolation_bit_for_bit(self, rng):
        v, mask, _, _ = random_masked_instance(rng, 10, 8, 2)
        cfg = SolverConfig(k=2, lam=2.0)
        res_a = at_nmf(v, mask, cfg, restart_rng(11, 0))
        v2 = v.copy()
        v2[mask == 0.0] = rng.random((mask == 0.0).sum()) * 100
        res_b = at_nmf(v2, mask, cfg, restart_rng(11, 0))
        np.testing.assert_array_equal(res_a.w, res_b.w)
        np.testing.assert_array_equal(res_a.h, res_b.h)
        np.testing.assert_array_equal(res_a.r, res_b.r)
        assert res_a.trace == res_b.trace

    def test_adversary_norm_shrinks_with_lambda(self, rng):
        v, mask, _, _ = random_masked_instance(rng, 12, 10, 3)
        cfg = SolverConfig(k=3, lam=2.0)
        w, h = init_factors(v, mask, cfg, restart_rng(12, 0))
        vhat = w @ h
        norms = [
            matrix.frobenius_sq(update_r(v, vhat, mask, lam)) for lam in (2.0, 3.0, 5.0, 10.0)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_trace_outer_indices(self, rng):
        v, mask, _, _ = random_masked_instance(rng, 8, 6, 2)
        cfg = SolverConfig(k=2, lam=3.0, max_outer=20)
        res = at_nmf(v, mask, cfg, restart_rng(13, 0))
        assert [rec.outer for rec in res.trace] == list(range(1, len(res.trace) + 1))
        assert len(res.trace) <= 20
        assert all(rec.inner_iters >= 1 for rec in res.trace)

    def test_zero_pattern_preserved_through_solve(self, rng):
        v, mask, w, h = random_masked_instance(rng, 9, 7, 3)
        h[0, :] = 0.0
        mu = mask * v
        vhat = w @ h
        for _ in range(3):
            vhat = kernels.sweep(mu, mask, w, h, 1e-12, vhat)
        assert (h[0, :] == 0.0).all()
