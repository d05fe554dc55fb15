import numpy as np
import pytest

from atnmf.errors import InvalidConfigError, InvalidInputError
from atnmf.evaluate import holdout_count, holdout_split, rmse, run_experiment
from atnmf.sampling import holdout_rng, synth_rng
from atnmf.solver import SolverConfig
from atnmf.synth import SyntheticSpec, generate_synthetic


class TestHoldoutSplit:
    def test_cardinality_half(self):
        split = holdout_split(10, 10, 0.5, holdout_rng(0))
        assert len(split.indices) == 50
        assert split.mask.sum() == 50

    def test_protocol_cardinality(self):
        # removing 90% of a 100x50 matrix leaves 500 training entries
        split = holdout_split(100, 50, 0.9, holdout_rng(1))
        assert len(split.indices) == 4500
        assert split.mask.sum() == 500

    def test_mask_complements_indices(self):
        split = holdout_split(8, 9, 0.4, holdout_rng(2))
        m = np.ones((8, 9))
        m[split.indices[:, 0], split.indices[:, 1]] = 0.0
        np.testing.assert_array_equal(m, split.mask)

    def test_deterministic(self):
        a = holdout_split(20, 20, 0.3, holdout_rng(3))
        b = holdout_split(20, 20, 0.3, holdout_rng(3))
        np.testing.assert_array_equal(a.indices, b.indices)

    def test_alpha_validated(self):
        for alpha in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(InvalidInputError):
                holdout_split(5, 5, alpha, holdout_rng(0))

    def test_rounding_half_away_from_zero(self):
        assert holdout_count(5, 5, 0.5) == 13  # 12.5 rounds away from zero
        assert holdout_count(10, 10, 0.305) == 31  # 30.5 likewise
        assert holdout_count(100, 50, 0.9) == 4500


class TestRmse:
    def test_zero_on_exact_prediction(self, rng):
        v = rng.random((6, 6))
        idx = np.array([[0, 0], [3, 4]])
        assert rmse(v, v.copy(), idx) == 0.0

    def test_single_entry(self):
        v = np.full((2, 2), 2.0)
        vhat = np.full((2, 2), 5.0)
        assert rmse(v, vhat, np.array([[1, 1]])) == 3.0

    def test_two_entries(self):
        v = np.zeros((2, 3))
        vhat = np.zeros((2, 3))
        vhat[0, 0], vhat[0, 1] = 3.0, 4.0
        idx = np.array([[0, 0], [0, 1]])
        assert rmse(v, vhat, idx) == pytest.approx(np.sqrt(12.5))

    def test_order_invariant(self, rng):
        v = rng.random((7, 7))
        vhat = rng.random((7, 7))
        idx = np.array([[i, j] for i in range(7) for j in range(0, 7, 2)])
        shuffled = idx[rng.permutation(len(idx))]
        assert rmse(v, vhat, idx) == pytest.approx(rmse(v, vhat, shuffled), rel=1e-14)

    def test_empty_rejected(self, rng):
        v = rng.random((3, 3))
        with pytest.raises(InvalidInputError):
            rmse(v, v, np.empty((0, 2), dtype=int))


@pytest.fixture(scope="module")
def experiment_matrix():
    data, _ = generate_synthetic(SyntheticSpec(f=30, n=20, k=3), synth_rng(5))
    return data


class TestRunExperiment:
    @pytest.fixture
    def v(self, experiment_matrix):
        return experiment_matrix

    def test_single_restart_zero_std(self, v):
        s = run_experiment(v, 0.4, "nmf", SolverConfig(k=3), restarts=1, base_seed=7)
        assert s.restarts == 1
        assert s.rmse_std == 0.0
        assert s.rmse_mean == s.rmse_values[0]

    def test_deterministic(self, v):
        cfg = SolverConfig(k=3, lam=3.0)
        a = run_experiment(v, 0.4, "atnmf", cfg, restarts=3, base_seed=8)
        b = run_experiment(v, 0.4, "atnmf", cfg, restarts=3, base_seed=8)
        assert a == b

    def test_mean_and_std_conventions(self, v):
        s = run_experiment(v, 0.4, "nmf", SolverConfig(k=3), restarts=4, base_seed=9)
        vals = np.array(s.rmse_values)
        assert s.rmse_mean == pytest.approx(vals.mean(), abs=1e-12)
        assert s.rmse_std == pytest.approx(vals.std(ddof=1), abs=1e-12)

    def test_split_shared_across_methods(self, v):
        # same base seed -> same split, regardless of method or lambda
        from atnmf.evaluate import holdout_split as hs
        from atnmf.sampling import holdout_rng as hr

        a = hs(*v.shape, 0.4, hr(10))
        b = hs(*v.shape, 0.4, hr(10))
        np.testing.assert_array_equal(a.mask, b.mask)

    def test_unknown_method_rejected(self, v):
        with pytest.raises(InvalidConfigError):
            run_experiment(v, 0.4, "svd", SolverConfig(k=3), restarts=1, base_seed=0)

    def test_restarts_validated(self, v):
        with pytest.raises(InvalidConfigError):
            run_experiment(v, 0.4, "nmf", SolverConfig(k=3), restarts=0, base_seed=0)

    def test_traces_kept_on_request(self, v):
        s = run_experiment(
            v, 0.4, "nmf", SolverConfig(k=3), restarts=2, base_seed=11, keep_traces=True
        )
        assert len(s.traces) == 2
        assert all(len(t) >= 1 for t in s.traces)

    def test_perturbing_heldout_entries_changes_nothing_trained(self, v):
        cfg = SolverConfig(k=3, lam=2.0)
        base = run_experiment(v, 0.5, "atnmf", cfg, restarts=2, base_seed=12)
        from atnmf.evaluate import holdout_split as hs
        from atnmf.sampling import holdout_rng as hr

        split = hs(*v.shape, 0.5, hr(12))
        v2 = v.copy()
        v2[split.indices[:, 0], split.indices[:, 1]] += 3.0
        moved = run_experiment(v2, 0.5, "atnmf", cfg, restarts=2, base_seed=12)
        # RMSE moves (ground truth changed) but only through the truth term
        assert moved.rmse_values != base.rmse_values
