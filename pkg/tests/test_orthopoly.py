import math
import warnings

import numpy as np
import pytest

from levychaos import (
    DegenerateDegreeError,
    DiscreteMeasure,
    IllConditionedWarning,
    MomentMeasure,
    MomentOrderError,
    NumericalBreakdownError,
    evaluate_q,
    jacobi_matrix,
    monomial_coefficients,
    recurrence_coefficients,
)
from oracles import atom_integral, gram_schmidt_monic, polyval, random_discrete_measure

GAUSS = DiscreteMeasure(1.0, ())
RADEMACHER = DiscreteMeasure(0.0, ((-1.0, 0.5), (1.0, 0.5)))
TRINOMIAL = DiscreteMeasure(0.5, ((-1.0, 0.25), (1.0, 0.25)))


class TestRecurrenceCoefficients:
    def test_rademacher(self):
        # Gram-Schmidt over the two atoms: q1 = s with norm 1, then nothing
        t = recurrence_coefficients(RADEMACHER, 3)
        np.testing.assert_allclose(t.b, [0.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(t.a, [1.0, 0.0, 0.0], atol=1e-15)
        assert t.support_size == 2

    def test_trinomial(self):
        # oracle: q2 = s^2 - 1/2, gamma_2 = int (s^2-1/2)^2 dsigma = 1/4
        t = recurrence_coefficients(TRINOMIAL, 2)
        np.testing.assert_allclose(t.b, [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(t.a, [0.5, 0.5], rtol=1e-14)
        assert t.gamma[2] == pytest.approx(0.25, rel=1e-14)
        assert t.support_size == 3

    def test_single_support_point(self):
        t = recurrence_coefficients(GAUSS, 2)
        np.testing.assert_allclose(t.a, [0.0, 0.0])
        assert t.support_size == 1

    def test_gamma_telescopes(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            t = recurrence_coefficients(random_discrete_measure(rng, 5), 6)
            for n in range(1, 7):
                if t.a[n - 1] > 0:
                    assert t.gamma[n] == pytest.approx(
                        t.gamma[n - 1] * t.a[n - 1], rel=1e-12
                    )

    def test_matches_gram_schmidt_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            m = random_discrete_measure(rng, int(rng.integers(2, 7)))
            K = 6
            t = recurrence_coefficients(m, K)
            pts, wts = m.support_points()
            polys, norms = gram_schmidt_monic(pts, wts, K)
            for k in range(1, min(K + 1, m.support_size)):
                assert t.gamma[k] == pytest.approx(norms[k], rel=1e-9, abs=1e-13)

    def test_moment_route_agrees_with_atom_route(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = random_discrete_measure(rng, 4)
            K = 3
            mm = MomentMeasure(tuple(m.moment(k) for k in range(2 * K + 1)))
            ta = recurrence_coefficients(m, K)
            tm = recurrence_coefficients(mm, K)
            np.testing.assert_allclose(tm.b, ta.b, rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(tm.a, ta.a, rtol=1e-8, atol=1e-10)

    def test_moment_route_detects_finite_support(self):
        mm = MomentMeasure(tuple(TRINOMIAL.moment(k) for k in range(11)))
        t = recurrence_coefficients(mm, 5)
        assert t.support_size == 3
        np.testing.assert_allclose(t.a[2:], 0.0)

    def test_needs_enough_moments(self):
        with pytest.raises(MomentOrderError):
            recurrence_coefficients(MomentMeasure((1.0, 0.0, 1.0)), 2)

    def test_breakdown_on_indefinite_moments(self):
        # passes the (relative) Hankel slack at construction, but the
        # recurrence hits a clearly negative squared norm
        m = MomentMeasure((1.0, 0.0, 1e6, 0.0, 1e12 - 1e3))
        with pytest.raises(NumericalBreakdownError):
            recurrence_coefficients(m, 2)

    def test_digit_loss_warning(self):
        # log-spaced support: moment route cancels catastrophically
        locs = np.geomspace(1.0, 10.0, 7)
        dm = DiscreteMeasure(0.0, tuple((float(s), 1.0 / 7) for s in locs))
        mm = MomentMeasure(tuple(dm.moment(k) for k in range(13)))
        with pytest.warns(IllConditionedWarning):
            recurrence_coefficients(mm, 6)

    def test_well_conditioned_input_does_not_warn(self):
        mm = MomentMeasure(tuple(TRINOMIAL.moment(k) for k in range(7)))
        with warnings.catch_warnings():
            warnings.simplefilter("error", IllConditionedWarning)
            recurrence_coefficients(mm, 3)

    def test_max_a_reported_finite(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            t = recurrence_coefficients(random_discrete_measure(rng, 5), 8)
            assert math.isfinite(t.max_a)


class TestEvaluateQ:
    def test_degree_zero_is_one(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        assert evaluate_q(t, 0, 17.3) == 1.0

    def test_trinomial_degree_two(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        assert evaluate_q(t, 2, 1.0) == pytest.approx(0.5, rel=1e-14)

    def test_beyond_support_is_zero(self):
        t = recurrence_coefficients(RADEMACHER, 3)
        assert evaluate_q(t, 2, 0.37) == 0.0

    def test_array_input(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        np.testing.assert_allclose(
            evaluate_q(t, 2, np.array([-1.0, 0.0, 1.0])), [0.5, -0.5, 0.5]
        )


class TestMonomialCoefficients:
    def test_degree_zero(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        np.testing.assert_allclose(monomial_coefficients(t, 0), [1.0])

    def test_trinomial_degree_two(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        np.testing.assert_allclose(monomial_coefficients(t, 2), [-0.5, 0.0, 1.0])

    def test_degree_one_is_shift_by_mean(self):
        m = DiscreteMeasure(0.0, ((0.5, 0.6), (-1.0, 0.4)))  # mean -0.1
        t = recurrence_coefficients(m, 1)
        np.testing.assert_allclose(
            monomial_coefficients(t, 1), [-t.b[0], 1.0], atol=1e-15
        )
        assert t.b[0] == pytest.approx(-0.1, rel=1e-13)

    def test_degenerate_degree_rejected(self):
        t = recurrence_coefficients(RADEMACHER, 3)
        with pytest.raises(DegenerateDegreeError):
            monomial_coefficients(t, 2)

    def test_reconstruction_matches_forward_evaluation(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = random_discrete_measure(rng, 5)
            t = recurrence_coefficients(m, 4)
            pts, _ = m.support_points()
            for k in range(min(5, m.support_size)):
                coef = monomial_coefficients(t, k)
                assert coef[-1] == 1.0  # monic
                np.testing.assert_allclose(
                    polyval(coef, pts), evaluate_q(t, k, pts), rtol=1e-10, atol=1e-10
                )


class TestJacobiMatrix:
    def test_trinomial_two_by_two(self):
        t = recurrence_coefficients(TRINOMIAL, 2)
        J = jacobi_matrix(t, 1)
        np.testing.assert_allclose(
            J, [[0.0, math.sqrt(0.5)], [math.sqrt(0.5), 0.0]], rtol=1e-14
        )

    def test_single_point_measure_padded_with_zeros(self):
        t = recurrence_coefficients(GAUSS, 2)
        np.testing.assert_allclose(jacobi_matrix(t, 2), np.zeros((3, 3)))

    def test_symmetry_exact(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            t = recurrence_coefficients(random_discrete_measure(rng, 5), 5)
            J = jacobi_matrix(t, 4)
            assert np.array_equal(J, J.T)

    def test_monomial_expansion_consistency(self):
        # column 0 of J^i holds the normalized expansion coefficients of s^i:
        # resumming against q_n / sqrt(gamma_n) recovers s^i at every atom
        rng = np.random.default_rng(13)
        for _ in range(10):
            m = random_discrete_measure(rng, int(rng.integers(2, 7)))
            K = 6
            t = recurrence_coefficients(m, K + 1)  # K+1 diagonal entries b_0..b_K
            J = jacobi_matrix(t, K)
            pts, _ = m.support_points()
            d = min(K + 1, m.support_size)
            for i in range(K + 1):
                col = np.linalg.matrix_power(J, i)[:, 0]
                recon = sum(
                    col[n] * evaluate_q(t, n, pts) / math.sqrt(t.gamma[n])
                    for n in range(d)
                )
                np.testing.assert_allclose(recon, pts**i, rtol=1e-10, atol=1e-10)


class TestOrthogonalityAndNorms:
    @pytest.mark.parametrize(
        "measure", [GAUSS, RADEMACHER, TRINOMIAL], ids=["gauss", "rademacher", "trinomial"]
    )
    def test_named_measures(self, measure):
        self._check(measure, K=8)

    def test_randomized_measures(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            self._check(random_discrete_measure(rng, int(rng.integers(2, 7))), K=8)

    @staticmethod
    def _check(measure, K):
        t = recurrence_coefficients(measure, K)
        pts, wts = measure.support_points()
        top = min(8, measure.support_size - 1)
        values = [evaluate_q(t, k, pts) for k in range(top + 1)]
        for n in range(top + 1):
            for m in range(n):
                inner = atom_integral(pts, wts, values[m] * values[n])
                assert abs(inner) <= 1e-10 * math.sqrt(t.gamma[m] * t.gamma[n])
            norm_sq = atom_integral(pts, wts, values[n] ** 2)
            target = math.prod(t.a[:n]) if n else 1.0
            assert norm_sq == pytest.approx(target, rel=1e-10)
