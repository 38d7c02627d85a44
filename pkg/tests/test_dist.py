import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, special, stats

from probweight import dist
from probweight.dist import DistributionSpec, Family
from probweight.errors import DomainError

mpmath.mp.dps = 40

G01 = DistributionSpec.gaussian(0.0, 1.0)
CAUCHY = DistributionSpec.student_t(0.0, 1.0, 1.0)


class TestSpec:
    def test_parse_gaussian(self):
        s = DistributionSpec.parse("gaussian:0.5,2")
        assert s.family is Family.GAUSSIAN
        assert (s.location, s.scale, s.shape) == (0.5, 2.0, None)

    def test_parse_t(self):
        s = DistributionSpec.parse("t:0.2,1,3")
        assert s.family is Family.STUDENT_T and s.shape == 3.0

    @pytest.mark.parametrize("text", ["gaussian:0", "t:0,1", "cauchy:0,1", "gaussian:0,0",
                                      "gaussian:a,1", "t:0,1,-2"])
    def test_parse_rejects(self, text):
        with pytest.raises(DomainError):
            DistributionSpec.parse(text)

    def test_scale_positive(self):
        with pytest.raises(DomainError, match="scale"):
            DistributionSpec.gaussian(0.0, -1.0)

    def test_shape_only_for_t(self):
        with pytest.raises(DomainError, match="shape"):
            DistributionSpec(Family.GAUSSIAN, 0.0, 1.0, 3.0)
        with pytest.raises(DomainError, match="shape"):
            DistributionSpec(Family.STUDENT_T, 0.0, 1.0, None)

    def test_dict_round_trip(self):
        s = DistributionSpec.student_t(0.1, 2.0, 1.5)
        assert DistributionSpec.from_dict(s.to_dict()) == s
        assert DistributionSpec.parse(s.label) == s


class TestStandardize:
    @pytest.mark.parametrize("x,loc,scale,expected", [
        (5, 5, 3, 0.0), (7, 5, 2, 1.0), (0, 0.23, 1.64, -0.23 / 1.64)])
    def test_values(self, x, loc, scale, expected):
        assert dist.standardize(x, loc, scale) == pytest.approx(expected, abs=1e-15)

    def test_standardize_example_digits(self):
        assert dist.standardize(0, 0.23, 1.64) == pytest.approx(-0.140244, abs=1e-6)

    def test_bad_scale(self):
        with pytest.raises(DomainError):
            dist.standardize(1.0, 0.0, 0.0)


class TestPdf:
    def test_gaussian_mode(self):
        assert dist.pdf(G01, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_cauchy_mode(self):
        assert dist.pdf(CAUCHY, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)

    def test_gaussian_mpmath(self):
        expected = float(mpmath.exp(-0.5) / (2 * mpmath.sqrt(2 * mpmath.pi)))
        assert dist.pdf(DistributionSpec.gaussian(0, 2), 2.0) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 3.0, 30.0])
    def test_t_matches_scipy(self, nu):
        x = np.linspace(-20, 20, 401)
        spec = DistributionSpec.student_t(0.3, 1.7, nu)
        np.testing.assert_allclose(dist.pdf(spec, x), stats.t.pdf(x, nu, 0.3, 1.7), rtol=1e-12)

    def test_symmetric_and_positive(self):
        spec = DistributionSpec.student_t(1.0, 2.0, 2.5)
        x = np.linspace(0, 30, 61)
        a, b = dist.pdf(spec, 1.0 + x), dist.pdf(spec, 1.0 - x)
        np.testing.assert_allclose(a, b, rtol=1e-14)
        assert np.all(a > 0)

    @pytest.mark.parametrize("spec", [G01, DistributionSpec.gaussian(1, 3),
                                      DistributionSpec.student_t(0, 1, 1.5),
                                      DistributionSpec.student_t(-1, 0.5, 4)])
    def test_pdf_is_derivative_of_cdf(self, spec):
        x = spec.location + spec.scale * np.linspace(-3, 3, 25)
        h = 1e-5 * spec.scale
        fd = (dist.cdf(spec, x + h) - dist.cdf(spec, x - h)) / (2 * h)
        np.testing.assert_allclose(fd, dist.pdf(spec, x), rtol=1e-5)

    @pytest.mark.parametrize("spec", [G01, DistributionSpec.gaussian(2, 0.5),
                                      DistributionSpec.student_t(0, 1, 3),
                                      DistributionSpec.student_t(0, 1, 1.5),
                                      DistributionSpec.student_t(0, 1, 1.0)])
    def test_normalization(self, spec):
        lo, hi = spec.location - 50 * spec.scale, spec.location + 50 * spec.scale
        mass, _ = integrate.quad(lambda t: dist.pdf(spec, t), lo, hi, limit=500,
                                 points=[spec.location], epsabs=1e-12)
        assert mass == pytest.approx(dist.cdf(spec, hi) - dist.cdf(spec, lo), abs=1e-6)


class TestCdf:
    def test_median(self):
        assert dist.cdf(G01, 0.0) == 0.5
        for nu in (0.3, 1.0, 2.0, 7.5, 1e6):
            assert dist.cdf(DistributionSpec.student_t(0, 1, nu), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_cauchy_closed_form(self):
        assert dist.cdf(CAUCHY, 1.0) == pytest.approx(0.75, abs=1e-14)
        x = np.linspace(-50, 50, 201)
        np.testing.assert_allclose(dist.cdf(CAUCHY, x), 0.5 + np.arctan(x) / np.pi, atol=1e-14)

    def test_gaussian_mpmath(self):
        for x in (-8.0, -3.3, -0.2, 0.7, 2.5, 6.0):
            expected = float(mpmath.ncdf(x))
            assert dist.cdf(G01, x) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("nu", [0.7, 1.3, 2.0, 5.0, 50.0, 1e4])
    def test_t_matches_scipy(self, nu):
        x = np.linspace(-40, 40, 801)
        np.testing.assert_allclose(dist.cdf(DistributionSpec.student_t(0, 1, nu), x),
                                   stats.t.cdf(x, nu), rtol=1e-11, atol=1e-15)

    def test_t_mpmath_tail(self):
        # lower tail of t with nu=3 by direct quadrature
        nu = mpmath.mpf(3)
        c = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
        f = lambda t: c * (1 + t * t / nu) ** (-(nu + 1) / 2)
        for x in (-30, -5, -1.5):
            expected = float(mpmath.quad(f, [-mpmath.inf, x]))
            assert dist.cdf(DistributionSpec.student_t(0, 1, 3), x) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("nu", [0.5, 1.27, 3.0])
    def test_t_far_tail_mpmath(self, nu):
        # both sides of the switch to the leading power term
        with mpmath.workdps(40):
            for z in (-1e99, -1e101, -1e150):
                x = nu / (mpmath.mpf(z) ** 2 + nu)
                expected = float(mpmath.betainc(nu / 2, 0.5, 0, x, regularized=True) / 2)
                if expected > 1e-300:
                    got = dist.cdf(DistributionSpec.student_t(0, 1, nu), z)
                    assert got == pytest.approx(expected, rel=1e-12)

    def test_limits(self):
        spec = DistributionSpec.student_t(0, 1, 2)
        assert dist.cdf(spec, -1e300) == pytest.approx(0.0, abs=1e-12)
        assert dist.cdf(spec, 1e300) == pytest.approx(1.0, abs=1e-12)
        assert dist.cdf(G01, -np.inf) == 0.0 and dist.cdf(G01, np.inf) == 1.0

    def test_gaussian_limit(self):
        x = np.linspace(-5, 5, 2001)
        t = dist.cdf(DistributionSpec.student_t(0, 1, 1e6), x)
        assert np.max(np.abs(t - dist.cdf(G01, x))) < 1e-4
        p = dist.pdf(DistributionSpec.student_t(0, 1, 1e6), x)
        assert np.max(np.abs(p - dist.pdf(G01, x))) < 1e-4

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.2, 50), st.floats(-5, 5), st.floats(0.1, 5))
    def test_monotone(self, nu, loc, scale):
        spec = DistributionSpec.student_t(loc, scale, nu)
        x = loc + scale * np.linspace(-30, 30, 301)
        assert np.all(np.diff(dist.cdf(spec, x)) >= 0)


class TestQuantile:
    def test_examples(self):
        assert dist.quantile(G01, 0.5) == pytest.approx(0.0, abs=1e-15)
        oracle = optimize.brentq(lambda z: dist.cdf(G01, z) - 0.975, 0, 5, xtol=1e-15)
        assert dist.quantile(G01, 0.975) == pytest.approx(oracle, abs=1e-12)
        assert dist.quantile(G01, 0.975) == pytest.approx(1.959964, abs=1e-6)
        assert dist.quantile(CAUCHY, 0.75) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, np.nan])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            dist.quantile(G01, q)

    def test_norm_ppf_accuracy(self):
        q = np.concatenate([np.logspace(-300, -1, 400), np.linspace(0.1, 0.9, 81),
                            1 - np.logspace(-15, -1, 100)])
        np.testing.assert_allclose(dist.norm_ppf(q), special.ndtri(q), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("spec", [G01, DistributionSpec.gaussian(3, 0.2),
                                      DistributionSpec.student_t(0, 1, 1),
                                      DistributionSpec.student_t(0, 1, 2),
                                      DistributionSpec.student_t(1, 2, 0.6),
                                      DistributionSpec.student_t(0, 1, 1.27),
                                      DistributionSpec.student_t(0, 1, 1e6)])
    def test_round_trip(self, spec):
        q = np.concatenate([np.logspace(-6, np.log10(0.5), 200), 1 - np.logspace(-6, np.log10(0.5), 200)])
        err = np.abs(dist.cdf(spec, dist.quantile(spec, q)) - q)
        tol = 1e-10 if spec.family is Family.GAUSSIAN else 1e-8
        assert err.max() < tol

    def test_extreme_levels(self):
        for nu, q in ((1.27, 1e-300), (3.0, 1e-300), (0.5, 1e-100)):
            spec = DistributionSpec.student_t(0, 1, nu)
            assert dist.cdf(spec, dist.quantile(spec, q)) == pytest.approx(q, rel=1e-12)
        # true quantile lies beyond the double range
        assert dist.quantile(DistributionSpec.student_t(0, 1, 0.3), 1e-100) == -np.inf

    def test_shape_preserved(self):
        spec = DistributionSpec.student_t(0, 1, 3)
        assert isinstance(dist.quantile(spec, 0.3), float)
        assert dist.quantile(spec, np.full((2, 3), 0.3)).shape == (2, 3)

    def test_t_matches_scipy(self):
        q = np.linspace(0.001, 0.999, 99)
        for nu in (0.8, 1.5, 4.0, 25.0):
            np.testing.assert_allclose(dist.quantile(DistributionSpec.student_t(0, 1, nu), q),
                                       stats.t.ppf(q, nu), rtol=1e-9, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.3, 100), st.lists(st.floats(1e-6, 1 - 1e-6), min_size=2, max_size=20, unique=True))
    def test_strictly_increasing(self, nu, qs):
        q = np.sort(np.array(qs))
        q = q[np.concatenate([[True], np.diff(q) > 1e-9])]
        x = dist.quantile(DistributionSpec.student_t(0, 1, nu), q)
        assert np.all(np.diff(x) > 0)


class TestIncompleteBeta:
    def test_examples(self):
        assert dist.reg_inc_beta(0.0, 2.0, 3.0) == 0.0
        assert dist.reg_inc_beta(1.0, 2.0, 3.0) == 1.0
        assert dist.reg_inc_beta(0.5, 0.5, 0.5) == pytest.approx(0.5, abs=1e-14)
        assert dist.reg_inc_beta(0.5, 1.0, 2.0) == pytest.approx(0.75, abs=1e-14)

    @pytest.mark.parametrize("x,a,b", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, x, a, b):
        with pytest.raises(DomainError):
            dist.reg_inc_beta(x, a, b)

    def test_mpmath_oracle(self):
        for x, a, b in [(0.1, 0.5, 0.5), (0.3, 2.5, 7.0), (0.9, 0.8, 30.0),
                        (1e-6, 0.6, 0.5), (0.5, 100.0, 100.0)]:
            expected = float(mpmath.betainc(a, b, 0, x, regularized=True))
            assert dist.reg_inc_beta(x, a, b) == pytest.approx(expected, rel=1e-12, abs=1e-300)

    def test_huge_a(self):
        # log-gamma cancellation at a ~ 1e5 costs a few digits; the t cdf only needs 1e-4 here
        expected = float(mpmath.betainc(5e5, 0.5, 0, 0.999, regularized=True))
        assert dist.reg_inc_beta(0.999, 5e5, 0.5) == pytest.approx(expected, rel=1e-8)

    @settings(max_examples=200, deadline=None)
    # 1 - x must be exact, otherwise the mirrored argument carries rounding error
    @given(st.floats(0, 1).map(lambda v: 1.0 - (1.0 - v)), st.floats(0.05, 200), st.floats(0.05, 200))
    def test_symmetry(self, x, a, b):
        lhs = dist.reg_inc_beta(x, a, b)
        rhs = 1.0 - dist.reg_inc_beta(1.0 - x, b, a)
        assert abs(lhs - rhs) < 1e-12
        assert 0.0 <= lhs <= 1.0

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.1, 50), st.floats(0.1, 50))
    def test_monotone_in_x(self, a, b):
        x = np.linspace(0, 1, 201)
        assert np.all(np.diff(dist.reg_inc_beta(x, a, b)) >= -1e-15)

    def test_matches_scipy_grid(self):
        x = np.linspace(0, 1, 101)
        for a, b in [(0.5, 0.5), (3, 0.7), (0.2, 9), (40, 60)]:
            np.testing.assert_allclose(dist.reg_inc_beta(x, a, b), special.betainc(a, b, x),
                                       rtol=1e-12, atol=1e-15)
