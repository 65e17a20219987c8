import math

import numpy as np
import pytest

from maxboot.bootstrap import GAUSSIAN, MAMMEN, RADEMACHER, BootstrapPlan, multiplier_moment
from maxboot.datagen import DataMatrix
from maxboot.moments import (
    Centering,
    MomentSummary,
    RateBranch,
    estimate_moment_summary,
    moment_tensor_diff_max,
    rate_certificate,
    truncate_centered,
)

from conftest import seed


def sample_tensor_max(values: np.ndarray, order: int) -> float:
    """Sup norm of the sample-centered moment tensor, by direct loops."""
    xc = values - values.mean(axis=0)
    n, p = xc.shape
    best = 0.0
    idx = np.ndindex(*(p,) * order)
    for index in idx:
        entry = np.prod([xc[:, j] for j in index], axis=0).mean()
        best = max(best, abs(entry))
    return best


# ---------------------------------------------------------------------------
# moment summary
# ---------------------------------------------------------------------------


def test_summary_on_sign_matrix():
    # columns (-1, +1) and (+1, -1) with known mean zero: every |x|^m = 1
    data = DataMatrix(np.array([[-1.0, 1.0], [1.0, -1.0]]), known_mean=np.zeros(2))
    s = estimate_moment_summary(data, Centering.KNOWN_MEAN)
    assert s.M2 == s.M4 == s.M6 == s.sigma_lower == 1.0
    assert s.Mcal4 == 1.0


def test_summary_all_zero_data():
    data = DataMatrix(np.zeros((4, 3)), known_mean=np.zeros(3))
    s = estimate_moment_summary(data, Centering.KNOWN_MEAN)
    assert (s.M2, s.M4, s.M6, s.sigma_lower, s.Mcal4) == (0.0,) * 5


def test_summary_single_column_collapse():
    rng = np.random.default_rng(7)
    data = DataMatrix(rng.gamma(2.0, 1.0, (30, 1)))
    s = estimate_moment_summary(data, Centering.SAMPLE_MEAN)
    assert s.M4 == s.Mcal4 == s.Mcal_m1[4] == s.Mcal_m2[4]


def test_summary_power_mean_ordering(rng):
    for _ in range(20):
        data = DataMatrix(rng.standard_normal((15, 6)) * rng.uniform(0.5, 3.0))
        s = estimate_moment_summary(data, Centering.SAMPLE_MEAN)
        assert s.sigma_lower <= s.M2 + 1e-15
        assert s.M2 <= s.M4 + 1e-15
        assert s.M4 <= s.M6 + 1e-15
        assert s.M4 <= s.Mcal4 + 1e-15


def test_summary_known_mean_requires_vector():
    data = DataMatrix(np.ones((3, 2)))
    with pytest.raises(ValueError):
        estimate_moment_summary(data, Centering.KNOWN_MEAN)


# ---------------------------------------------------------------------------
# rate certificates
# ---------------------------------------------------------------------------


def reference_branches(n, p, M, sigma, mcal):
    """Independent transliteration of the two rate expressions."""
    tail = ((math.log(p)) ** 2 * (math.log(n * p)) ** 3 / n) ** (1 / 6) * M / sigma
    moment = ((math.log(n * p)) ** 5 / n) ** (1 / 6) * (mcal / sigma) ** (2 / 3)
    return tail, moment


def unit_summary(mcal4=1.0):
    return MomentSummary(
        M2=1.0, M4=1.0, M6=1.0, sigma_lower=1.0, Mcal4=mcal4,
        Mcal_m1={4: 1.0}, Mcal_m2={4: 1.0},
    )


def test_certificate_formula_oracle():
    n, p = int(math.e**5) + 1, 40
    s = unit_summary()
    for scheme, factor in (("empirical", 2.0), ("wild", 1.0)):
        cert = rate_certificate(s, n, p, scheme)
        tail, moment = reference_branches(n, p, factor, 1.0, 1.0)
        assert cert.gamma_star == pytest.approx(min(tail, moment), rel=1e-12)
        assert cert.M == pytest.approx(factor, rel=1e-12)
        expected_branch = RateBranch.TAIL if tail <= moment else RateBranch.MOMENT
        assert cert.branch is expected_branch


def test_certificate_monotone_in_n():
    s = unit_summary()
    values = [rate_certificate(s, n, 50, "empirical").gamma_star for n in (10, 100, 1000, 10**6)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_certificate_moment_branch_homogeneity():
    # doubling Mcal4 scales the moment branch value by exactly 2^(2/3)
    n, p = 10**9, 50
    base = rate_certificate(unit_summary(mcal4=1.0), n, p, "empirical")
    doubled = rate_certificate(unit_summary(mcal4=2.0), n, p, "empirical")
    assert doubled.moment_value == pytest.approx(2 ** (2 / 3) * base.moment_value, rel=1e-12)
    assert doubled.tail_value == base.tail_value
    # when the moment branch wins on both sides, gamma* scales the same way
    big_m4 = MomentSummary(M2=1.0, M4=5.0, M6=6.0, sigma_lower=1.0, Mcal4=1.0,
                           Mcal_m1={4: 5.0}, Mcal_m2={4: 5.0})
    big_m4_doubled = MomentSummary(M2=1.0, M4=5.0, M6=6.0, sigma_lower=1.0, Mcal4=2.0,
                                   Mcal_m1={4: 5.0}, Mcal_m2={4: 5.0})
    a = rate_certificate(big_m4, n, p, "empirical")
    b = rate_certificate(big_m4_doubled, n, p, "empirical")
    assert a.branch is RateBranch.MOMENT and b.branch is RateBranch.MOMENT
    assert b.gamma_star == pytest.approx(2 ** (2 / 3) * a.gamma_star, rel=1e-12)


def test_certificate_kappa_and_default_bn():
    n, p = 4000, 64
    s = unit_summary()
    cert = rate_certificate(s, n, p, "wild")
    t_n = (cert.M / 1.0) / (1.0) ** (2 / 3)
    b_n = (math.sqrt(n) / (1.0 * 1.0 * math.log(p))) ** (1 / 3) / t_n
    assert cert.b_n == pytest.approx(b_n, rel=1e-12)
    assert cert.kappa_n4 == pytest.approx(b_n**4 * math.log(p) ** 3 / n, rel=1e-12)
    override = rate_certificate(s, n, p, "wild", b_n=2.0)
    assert override.kappa_n4 == pytest.approx(16.0 * math.log(p) ** 3 / n, rel=1e-12)


def test_certificate_rejects_degenerate():
    s = MomentSummary(M2=0.0, M4=0.0, M6=0.0, sigma_lower=0.0, Mcal4=0.0,
                      Mcal_m1={4: 0.0}, Mcal_m2={4: 0.0})
    with pytest.raises(ValueError):
        rate_certificate(s, 100, 10, "empirical")
    with pytest.raises(ValueError):
        rate_certificate(unit_summary(), 100, 10, "bogus")


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


def test_truncation_inactive_known_mean():
    values = np.array([[1.0, -2.0], [-1.0, 2.0]])
    data = DataMatrix(values, known_mean=np.zeros(2))
    out = truncate_centered(data, 10.0, Centering.KNOWN_MEAN)
    assert np.array_equal(out.values, values)


def test_truncation_everything_clipped():
    data = DataMatrix(np.array([[5.0], [7.0], [9.0]]))
    out = truncate_centered(data, 1e-6, Centering.SAMPLE_MEAN)
    assert np.all(out.values == 0.0)


def test_truncation_hand_example():
    data = DataMatrix(np.array([[-3.0], [1.0], [2.0]]))
    out = truncate_centered(data, 2.0, Centering.SAMPLE_MEAN)
    np.testing.assert_allclose(out.values.ravel(), [-1.0, 0.0, 1.0])


def test_truncation_zero_mean_and_idempotence(rng):
    for _ in range(20):
        data = DataMatrix(rng.standard_normal((12, 4)) * 3.0)
        a_n = float(rng.uniform(0.5, 4.0))
        once = truncate_centered(data, a_n, Centering.SAMPLE_MEAN)
        np.testing.assert_allclose(once.values.mean(axis=0), 0.0, atol=1e-14)
        # second pass with a level that clips nothing is a no-op up to fp
        level = float(np.abs(once.values).max()) + 1.0
        twice = truncate_centered(once, level, Centering.SAMPLE_MEAN)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-14)


# ---------------------------------------------------------------------------
# moment tensor diagnostics
# ---------------------------------------------------------------------------


def test_empirical_second_order_diff_is_zero(rng):
    data = DataMatrix(rng.standard_normal((10, 5)))
    assert moment_tensor_diff_max(data, BootstrapPlan.empirical(), 2) == 0.0
    assert moment_tensor_diff_max(data, BootstrapPlan.empirical(), 3) == 0.0


def test_mammen_third_order_diff_is_zero(rng):
    data = DataMatrix(rng.gamma(1.0, 1.0, (12, 4)))
    assert moment_tensor_diff_max(data, BootstrapPlan.wild(MAMMEN), 3) == pytest.approx(0.0, abs=1e-15)


def test_gaussian_third_order_equals_skewness_tensor(rng):
    data = DataMatrix(rng.gamma(1.0, 1.0, (15, 3)))
    got = moment_tensor_diff_max(data, BootstrapPlan.wild(GAUSSIAN), 3)
    assert got == pytest.approx(sample_tensor_max(data.values, 3), abs=1e-12)


def test_closed_form_identity_wild(rng):
    # || mu - nu ||_max = |1 - E W^m| * || sample tensor ||_max, to 1e-12
    data = DataMatrix(rng.standard_normal((20, 8)) + rng.gamma(2.0, 1.0, (20, 8)))
    for kind in (GAUSSIAN, MAMMEN, RADEMACHER):
        for order in (2, 3):
            got = moment_tensor_diff_max(data, BootstrapPlan.wild(kind), order)
            expect = abs(multiplier_moment(kind, order) - 1.0) * sample_tensor_max(
                data.values, order
            )
            assert got == pytest.approx(expect, abs=1e-12)


def test_fourth_order_guarded_but_supported(rng):
    data = DataMatrix(rng.standard_normal((9, 3)))
    got = moment_tensor_diff_max(data, BootstrapPlan.wild(GAUSSIAN), 4)
    expect = abs(multiplier_moment(GAUSSIAN, 4) - 1.0) * sample_tensor_max(data.values, 4)
    assert got == pytest.approx(expect, abs=1e-12)


def test_tensor_size_guards(rng):
    with pytest.raises(ValueError):
        moment_tensor_diff_max(DataMatrix(rng.standard_normal((5, 65))), BootstrapPlan.empirical(), 3)
    with pytest.raises(ValueError):
        moment_tensor_diff_max(DataMatrix(rng.standard_normal((5, 17))), BootstrapPlan.empirical(), 4)
    with pytest.raises(ValueError):
        moment_tensor_diff_max(DataMatrix(rng.standard_normal((5, 3))), BootstrapPlan.empirical(), 5)


def test_monte_carlo_cross_check_agrees(rng):
    data = DataMatrix(rng.gamma(1.5, 1.0, (8, 2)))
    for plan in (BootstrapPlan.empirical(), BootstrapPlan.wild(MAMMEN), BootstrapPlan.mixed_wild(0.5)):
        value = moment_tensor_diff_max(data, plan, 3, b_reps_for_nu=20_000, seed=seed(40))
        assert value >= 0.0  # no RuntimeError: MC agrees with the closed form


def test_monte_carlo_cross_check_requires_seed(rng):
    data = DataMatrix(rng.standard_normal((6, 2)))
    with pytest.raises(ValueError):
        moment_tensor_diff_max(data, BootstrapPlan.empirical(), 2, b_reps_for_nu=100)
