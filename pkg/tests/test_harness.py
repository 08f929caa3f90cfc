
import numpy as np
import pytest
from scipy import stats

from sslfusion import harness as h
from sslfusion import sensors as sn
from sslfusion import theory
from sslfusion.model import ModelParams
from sslfusion.rng import PURPOSE_TEST, substream

from conftest import TABLE1


@pytest.fixture(scope="module")
def default_log():
    return sn.synthesize_log()


# ---------------------------------------------------------------- verification


@pytest.mark.parametrize(
    "p,primary,fused",
    [((6.25, 1, 1), 0.98, 0.47), ((6.25, 1, 16), 1.02, 1.11), ((0.25, 1, 100), 1.00, 0.25)],
)
def test_verify_theory_examples(p, primary, fused):
    row = h.verify_theory(ModelParams(*p), 10_000, seed=101)
    # sample-level scatter at n = 1e4 is a few hundredths; compare with the
    # theory value and the reference run at the same tolerance
    assert abs(row.mse_primary_empirical - row.mse_primary_theory) <= 0.08
    assert abs(row.mse_fused_empirical - row.mse_fused_theory) <= 0.08
    assert abs(primary - row.mse_primary_theory) <= 0.08
    assert abs(fused - row.mse_fused_theory) <= 0.08


def test_verification_theory_columns_exact():
    for row in h.table1(n=1_000):
        assert row.mse_primary_theory == theory.expected_error_primary(row.params)
        assert row.mse_fused_theory == theory.expected_error_fused(row.params)


@pytest.mark.parametrize("i", range(4))
def test_empirical_within_four_se(i):
    row = h.verify_theory(ModelParams(*TABLE1[i]), 100_000, seed=202, index=i)
    assert abs(row.mse_primary_empirical - row.mse_primary_theory) <= 4 * row.mse_primary_se
    assert abs(row.mse_fused_empirical - row.mse_fused_theory) <= 4 * row.mse_fused_se


def test_verify_requires_n():
    with pytest.raises(ValueError):
        h.verify_theory(ModelParams(1, 1, 1), 50)


# ---------------------------------------------------------------- case study


def test_splits_partition():
    for run in range(20):
        parts = h.split_indices(1003, (0.8, 0.1, 0.1), seed=5, run=run)
        joined = np.concatenate(parts)
        assert sorted(joined.tolist()) == list(range(1003))
        assert [len(p) for p in parts] == [802, 100, 101]


@pytest.mark.parametrize("splits", [(0.5, 0.5, 0.0), (0.8, 0.1, 0.2), (0.8, 0.2)])
def test_config_rejects_bad_splits(splits):
    with pytest.raises(ValueError):
        h.CaseStudyConfig(splits=splits)


def test_config_rejects_unknown_cue():
    with pytest.raises(ValueError):
        h.CaseStudyConfig(primary_cue="lidar")


@pytest.mark.parametrize("cue", ["sonar", "barometer"])
def test_case_study_fusion_helps(default_log, cue):
    rep = h.run_case_study(default_log, h.CaseStudyConfig(primary_cue=cue, runs=20))
    assert rep.mae_fused <= rep.mae_primary
    assert rep.success_rate >= 0.9
    assert 0.0 <= rep.success_rate <= 1.0
    assert rep.mae_primary == pytest.approx(np.mean([r.mae_primary for r in rep.runs]))


def test_case_study_reproducible(default_log):
    cfg = h.CaseStudyConfig(runs=5, seed=77)
    assert h.run_case_study(default_log, cfg).to_dict() == h.run_case_study(default_log, cfg).to_dict()


def test_success_is_strict():
    r = h.RunResult(run=0, sigma_g2=1, s_hat=1, mae_primary=0.2, mae_secondary=0.3, mae_fused=0.2)
    assert not r.success


def test_zero_noise_log():
    log = sn.synthesize_log(sn.SynthConfig(sonar_sigma_m=0.0, pressure_sigma_pa=0.0))
    for cue in ("sonar", "barometer"):
        rep = h.run_case_study(log, h.CaseStudyConfig(primary_cue=cue, runs=5))
        assert rep.mae_primary < 1e-6
        # the kNN cue is limited by the sampling density of the trajectory
        assert rep.mae_secondary < 1e-3
        assert rep.mae_fused < 1e-5
        assert rep.success_rate == 0.0


def test_primary_error_grows_with_sonar_noise():
    maes = []
    for sigma in (0.1, 0.29, 0.6):
        log = sn.synthesize_log(sn.SynthConfig(sonar_sigma_m=sigma))
        maes.append(h.run_case_study(log, h.CaseStudyConfig(runs=5)).mae_primary)
    assert maes[0] <= maes[1] <= maes[2]


def test_too_small_log():
    log = sn.synthesize_log(sn.SynthConfig(duration_s=1.0, sample_rate_hz=20))
    with pytest.raises(ValueError):
        h.run_case_study(log, h.CaseStudyConfig(runs=1))


# ---------------------------------------------------------------- distributions


def test_default_bins():
    assert h.default_bins(100) == 5
    assert h.default_bins(1_000) == 20
    assert h.default_bins(10_000) == 50


def test_equiprobable_edges():
    edges = h._equiprobable_edges(4)
    np.testing.assert_allclose(stats.norm.cdf(edges), [0.25, 0.5, 0.75], atol=1e-14)


def test_chi_square_hand_computed():
    # 8 points, 4 equal-mass cells: two land in each cell -> statistic 0
    z = stats.norm.ppf([0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9])
    z = (z - z.mean()) / z.std(ddof=1)
    assert h._chi_square_rows(z[None, :], h._equiprobable_edges(4))[0] == 0.0


def test_distribution_stats_fields():
    x = substream(1, PURPOSE_TEST).normal(1_000, loc=1.5, scale=0.6)
    d = h.analyze_distribution(x, reps=500)
    assert sum(d.hist_counts) == d.n == 1_000
    assert 0.0 <= d.p_value <= 1.0
    assert d.mean == pytest.approx(1.5, abs=0.06)
    assert d.std == pytest.approx(0.6, rel=0.1)
    assert d.chi_square_bins == 20


def test_bimodal_rejected():
    s = substream(2, PURPOSE_TEST)
    x = np.concatenate([s.normal(1_000, -3.0), s.normal(1_000, 3.0)])
    assert h.analyze_distribution(x, reps=2_000).p_value < 0.01


def test_p_values_uniform_under_null():
    n, reps = 400, 2_000
    p = [h.analyze_distribution(substream(3, PURPOSE_TEST, i).normal(n), reps=reps).p_value for i in range(150)]
    assert stats.kstest(p, "uniform").statistic < stats.kstwo.ppf(0.99, len(p))


@pytest.mark.parametrize("values", [np.ones(100), np.arange(10.0)])
def test_analyze_rejects_degenerate(values):
    with pytest.raises(ValueError):
        h.analyze_distribution(values)


def test_analyze_rejects_few_bins():
    with pytest.raises(ValueError):
        h.analyze_distribution(np.arange(100.0), bins=2)
