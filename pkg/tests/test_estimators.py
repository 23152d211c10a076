import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medianqmc.errors import DomainError, UsageError
from medianqmc.estimators import (
    Integrand,
    MAEStudy,
    mc_estimate,
    median_estimate,
    qmc_estimate,
    run_mae_study,
)
from medianqmc.lattice import GeneratingVector, SeedSpec, Shift
from medianqmc.problems import exp_linear_integrand

CONST = Integrand(2, lambda y: np.full(len(np.atleast_2d(y)), 3.25), "const",
                  3.25)


class TestQmcEstimate:
    def test_constant_exact(self):
        z = GeneratingVector(31, (1, 12))
        assert qmc_estimate(CONST, z, Shift((0.2, 0.7))) == 3.25

    def test_exp_linear_close(self):
        f = exp_linear_integrand([0.5, 0.25])
        z = GeneratingVector(4099, (1, 1406))
        val = qmc_estimate(f, z, Shift((0.31, 0.77)))
        assert val == pytest.approx(f.exact_value, abs=1e-2)

    def test_unbiased_over_random_rules(self):
        f = exp_linear_integrand([0.5, 0.25])
        vals = []
        seed = SeedSpec(11)
        from medianqmc.lattice import sample_generating_vector, sample_shift
        for i in range(400):
            z = sample_generating_vector(127, 2, seed.child(i, 0))
            d = sample_shift(2, seed.child(i, 1))
            vals.append(qmc_estimate(f, z, d))
        err = np.mean(vals) - f.exact_value
        assert abs(err) < 3.0 * np.std(vals) / np.sqrt(len(vals))

    def test_boundary_shift_raises(self):
        # a zero shift puts the first point at the origin, where the
        # inverse-CDF transform is undefined
        z = GeneratingVector(31, (1, 12))
        with pytest.raises(DomainError):
            qmc_estimate(CONST, z, Shift.zero(2))

    def test_dimension_mismatch(self):
        z = GeneratingVector(31, (1,))
        with pytest.raises(UsageError):
            qmc_estimate(CONST, z, Shift((0.5,)))


class TestMedianEstimate:
    def test_constant(self):
        assert median_estimate(CONST, 17, 3, SeedSpec(0)).value == 3.25

    def test_k_one_is_single_qmc(self):
        f = exp_linear_integrand([0.3])
        res = median_estimate(f, 127, 1, SeedSpec(5))
        rep = res.replicates
        direct = qmc_estimate(f, rep.vectors[0], rep.shifts[0])
        assert res.value == direct

    def test_even_k_rejected(self):
        with pytest.raises(UsageError):
            median_estimate(CONST, 17, 4, SeedSpec(0))

    def test_value_is_middle_order_statistic(self):
        f = exp_linear_integrand([0.5, 0.25])
        res = median_estimate(f, 127, 11, SeedSpec(1))
        assert res.value == sorted(res.replicates.values)[5]

    def test_deterministic(self):
        f = exp_linear_integrand([0.5])
        assert median_estimate(f, 127, 5, SeedSpec(3)).value == \
            median_estimate(f, 127, 5, SeedSpec(3)).value


class TestMcEstimate:
    def test_constant(self):
        assert mc_estimate(CONST, 1000, SeedSpec(0)) == pytest.approx(3.25)

    def test_first_moment(self):
        f = Integrand(1, lambda y: np.atleast_2d(y)[:, 0], "mean")
        assert abs(mc_estimate(f, 10 ** 6, SeedSpec(2))) < 4e-3

    def test_rmse_rate(self):
        f = Integrand(1, lambda y: np.atleast_2d(y)[:, 0] ** 2, "second-moment")
        ms = [2 ** e for e in range(10, 19, 2)]
        rmse = []
        for m in ms:
            errs = [mc_estimate(f, m, SeedSpec(7).child(i)) - 1.0
                    for i in range(20)]
            rmse.append(np.sqrt(np.mean(np.square(errs))))
        slope, _ = np.polyfit(np.log2(ms), np.log2(rmse), 1)
        assert -0.6 <= slope <= -0.4


class TestMedianRobustness:
    @given(st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_order_statistic_property(self, seed):
        rng = np.random.default_rng(seed)
        k = 11
        values = rng.normal(size=k)
        corrupt_idx = rng.choice(k, size=(k - 1) // 2, replace=False)
        corrupted = values.copy()
        corrupted[corrupt_idx] = rng.choice([-1e9, 1e9], size=len(corrupt_idx))
        untouched = np.delete(values, corrupt_idx)
        med = np.median(corrupted)
        assert untouched.min() <= med <= untouched.max()


@pytest.fixture(scope="module")
def study():
    f = exp_linear_integrand([0.5, 0.25])
    return run_mae_study(f, [31, 67], 3, 4, ["mc", "median-lattice"],
                         SeedSpec(13))


class TestRunMaeStudy:
    def test_row_budget(self, study):
        for row in study.rows:
            assert row.budget == 3 * row.n_points

    def test_exact_reference_used(self, study):
        f = exp_linear_integrand([0.5, 0.25])
        assert study.reference.value == f.exact_value
        assert study.reference.provenance["oracle"] == "exact"

    def test_csv_header(self, study):
        header = study.to_csv().splitlines()[0]
        assert header == "method,N,budget,MAE,L,reference,reference_dispersion,seed"

    def test_csv_roundtrip_values(self, study):
        import csv, io
        rows = list(csv.DictReader(io.StringIO(study.to_csv())))
        assert len(rows) == len(study.rows)
        assert float(rows[0]["MAE"]) == study.rows[0].mae

    def test_deterministic(self):
        f = exp_linear_integrand([0.5])
        kwargs = dict(ns=[31], k=3, L=3, methods=["median-lattice"],
                      seed=SeedSpec(1))
        assert run_mae_study(f, **kwargs).to_csv() == \
            run_mae_study(f, **kwargs).to_csv()

    def test_cbc_without_vector_rejected(self):
        f = exp_linear_integrand([0.5])
        with pytest.raises(UsageError):
            run_mae_study(f, [31], 3, 3, ["cbc-lattice"], SeedSpec(0))

    def test_unknown_method_rejected(self):
        f = exp_linear_integrand([0.5])
        with pytest.raises(UsageError):
            run_mae_study(f, [31], 3, 3, ["sobol"], SeedSpec(0))

    def test_loglog_slope_helper(self, study):
        assert np.isfinite(study.loglog_slope("mc"))
