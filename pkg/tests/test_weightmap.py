import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special, stats

from probweight import dist
from probweight.dist import DistributionSpec
from probweight.errors import DomainError
from probweight.weightmap import (CdfMapCurve, ModelKind, WeightingModel, default_grid,
                                  gaussian_map, gaussian_pdf_map, lattimore_weight, model_cdf_map,
                                  numeric_cdf_map, t_map, tk_weight)

mpmath.mp.dps = 40

# parameter values fitted to the 1992 dataset, used as realistic test points
FITTED = {
    ModelKind.TVERSKY_KAHNEMAN: (0.60,),
    ModelKind.LATTIMORE: (0.67, 0.58),
    ModelKind.GAUSSIAN_MAP: (0.38, 1.60),
    ModelKind.T_MAP: (1.27, 0.40),
}


def mp_tk(fp, g):
    fp, g = mpmath.mpf(fp), mpmath.mpf(g)
    return fp ** g / (fp ** g + (1 - fp) ** g) ** (1 / g)


class TestTK:
    def test_identity(self):
        fp = np.linspace(0, 1, 1001)
        np.testing.assert_allclose(tk_weight(fp, 1.0), fp, atol=1e-15)

    def test_endpoints(self):
        for g in (0.3, 0.65, 1.0, 2.5):
            assert tk_weight(0.0, g) == 0.0 and tk_weight(1.0, g) == 1.0

    def test_mpmath(self):
        assert tk_weight(0.5, 0.65) == pytest.approx(float(mp_tk(0.5, 0.65)), rel=1e-14)
        assert tk_weight(0.5, 0.65) == pytest.approx(0.4387, abs=1e-4)
        for fp in (1e-6, 0.01, 0.3, 0.99):
            assert tk_weight(fp, 0.6) == pytest.approx(float(mp_tk(fp, 0.6)), rel=1e-13)

    def test_crossing_left_of_half(self):
        root = optimize.brentq(lambda f: tk_weight(f, 0.65) - f, 0.05, 0.6, xtol=1e-14)
        assert root < 0.5
        assert tk_weight(0.05, 0.65) > 0.05 and tk_weight(0.9, 0.65) < 0.9

    @pytest.mark.parametrize("g", [0.0, -1.0, np.nan])
    def test_domain(self, g):
        with pytest.raises(DomainError):
            tk_weight(0.3, g)

    def test_fp_domain(self):
        with pytest.raises(DomainError):
            tk_weight(1.2, 0.6)


class TestLattimore:
    def test_identity(self):
        fp = np.linspace(0, 1, 1001)
        np.testing.assert_allclose(lattimore_weight(fp, 1.0, 1.0), fp, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 5))
    def test_half_fixed_when_delta_one(self, g):
        assert lattimore_weight(0.5, 1.0, g) == pytest.approx(0.5, abs=1e-15)

    def test_mpmath(self):
        fp, d, g = mpmath.mpf("0.1"), mpmath.mpf("0.67"), mpmath.mpf("0.58")
        expected = float(d * fp ** g / (d * fp ** g + (1 - fp) ** g))
        assert lattimore_weight(0.1, 0.67, 0.58) == pytest.approx(expected, rel=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            lattimore_weight(0.3, 0.0, 1.0)
        with pytest.raises(DomainError):
            lattimore_weight(0.3, 1.0, -0.5)


class TestGaussianMap:
    def test_identity(self):
        fp = np.linspace(0, 1, 1001)
        np.testing.assert_allclose(gaussian_map(fp, 0.0, 1.0), fp, atol=1e-10)

    def test_half_under_pure_scale(self):
        assert gaussian_map(0.5, 0.0, 1.64) == pytest.approx(0.5, abs=1e-15)

    def test_oracle(self):
        expected = special.ndtr((special.ndtri(0.1) - 0.23) / 1.64)
        assert gaussian_map(0.1, 0.23, 1.64) == pytest.approx(expected, rel=1e-12)
        assert gaussian_map(0.1, 0.23, 1.64) > 0.1

    def test_endpoints_by_convention(self):
        assert gaussian_map(0.0, 0.38, 1.6) == 0.0 and gaussian_map(1.0, 0.38, 1.6) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            gaussian_map(0.3, 0.0, 0.0)


class TestTMap:
    def test_median(self):
        for nu in (0.5, 1.27, 10.0):
            assert t_map(0.5, nu, 0.0) == pytest.approx(0.5, abs=1e-14)

    def test_gaussian_limit(self):
        assert t_map(0.5, 1e6, 0.4) == pytest.approx(special.ndtr(-0.4), abs=1e-5)
        assert t_map(0.5, 1e6, 0.4) == pytest.approx(0.3446, abs=5e-5)

    def test_scipy_oracle(self):
        fp = np.linspace(0.001, 0.999, 101)
        np.testing.assert_allclose(t_map(fp, 1.27, 0.4), stats.t.cdf(special.ndtri(fp) - 0.4, 1.27),
                                   rtol=1e-10)
        assert t_map(0.01, 1.27, 0.4) > 0.01

    def test_domain(self):
        with pytest.raises(DomainError):
            t_map(0.3, 0.0, 0.0)

    def test_tail_decreases_toward_zero(self):
        fp = np.logspace(-300, -1, 50)
        fw = t_map(fp, 1.27, 0.4)
        assert np.all(np.diff(fw) > 0) and fw[0] < fw[-1]


class TestEndpointLimits:
    @pytest.mark.parametrize("kind", [ModelKind.TVERSKY_KAHNEMAN, ModelKind.LATTIMORE, ModelKind.GAUSSIAN_MAP])
    def test_near_endpoints(self, kind):
        m = WeightingModel.create(kind, *FITTED[kind])
        assert abs(m(1e-9)) < 1e-3 and abs(m(1 - 1e-9) - 1) < 1e-3
        assert m(0.0) == 0.0 and m(1.0) == 1.0

    @pytest.mark.xfail(strict=True, reason="polynomial t tails: fw(1e-9) is about 0.03 at nu=1.27")
    def test_tmap_near_endpoints(self):
        m = WeightingModel.create(ModelKind.T_MAP, *FITTED[ModelKind.T_MAP])
        assert abs(m(1e-9)) < 1e-3 and abs(m(1 - 1e-9) - 1) < 1e-3


class TestMonotone:
    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_fitted_parameters(self, kind):
        fp = np.linspace(0, 1, 10_000)
        fw = WeightingModel.create(kind, *FITTED[kind])(fp)
        assert np.all(np.diff(fw) > 0)
        assert np.all((fw >= 0) & (fw <= 1))

    def test_non_monotone_tk_rejected(self):
        with pytest.raises(DomainError, match="monotone"):
            WeightingModel.create(ModelKind.TVERSKY_KAHNEMAN, 0.2)
        WeightingModel.create(ModelKind.TVERSKY_KAHNEMAN, 0.3)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 20), st.floats(0.05, 5))
    def test_lattimore_always_monotone(self, d, g):
        fp = np.linspace(0, 1, 2001)
        assert np.all(np.diff(lattimore_weight(fp, d, g)) >= 0)


class TestWeightingModel:
    def test_parse(self):
        m = WeightingModel.parse("lattimore:0.67,0.58")
        assert m.kind is ModelKind.LATTIMORE and m.params == {"delta": 0.67, "gamma": 0.58}
        assert WeightingModel.parse(m.label) == m

    @pytest.mark.parametrize("text", ["tk", "tk:1,2", "foo:1", "gauss:0,-1", "tmap:0,0"])
    def test_parse_rejects(self, text):
        with pytest.raises(DomainError):
            WeightingModel.parse(text)

    def test_aliases(self):
        assert WeightingModel.parse_kind("tversky-kahneman") is ModelKind.TVERSKY_KAHNEMAN
        assert WeightingModel.parse_kind("t") is ModelKind.T_MAP


class TestGaussianPdfMap:
    def test_identity_alpha_one(self):
        assert gaussian_pdf_map(0.2, 1.0, 1.0) == pytest.approx(0.2, rel=1e-15)

    @pytest.mark.parametrize("x", [0.0, 1.0, -1.0, 2.0, -2.0])
    def test_ratio_construction(self, x):
        p = dist.pdf(DistributionSpec.gaussian(0.3, 1.0), 0.3 + x)
        w = dist.pdf(DistributionSpec.gaussian(0.3, 2.0), 0.3 + x)
        assert gaussian_pdf_map(p, 2.0, 1.0) == pytest.approx(w, rel=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 5), st.floats(0.2, 4), st.floats(-6, 6))
    def test_ratio_construction_property(self, sigma, alpha, z):
        p = dist.pdf(DistributionSpec.gaussian(0, sigma), z * sigma)
        w = dist.pdf(DistributionSpec.gaussian(0, alpha * sigma), z * sigma)
        assert gaussian_pdf_map(p, alpha, sigma) == pytest.approx(w, rel=1e-10)

    def test_boost_small_densities(self):
        p = np.logspace(-8, -2, 20)
        assert np.all(gaussian_pdf_map(p, 2.0, 1.0) / p > 1)

    @pytest.mark.parametrize("p", [0.0, -0.1, 0.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            gaussian_pdf_map(p, 2.0, 1.0)


class TestNumericCdfMap:
    def test_identical_specs_on_diagonal(self):
        spec = DistributionSpec.gaussian(0.0, 1.0)
        c = numeric_cdf_map(spec, spec, default_grid(spec))
        np.testing.assert_array_equal(c.fp, c.fw)

    def test_scale_only_crosses_at_half(self):
        do, dm = DistributionSpec.gaussian(0, 1), DistributionSpec.gaussian(0, 2)
        c = numeric_cdf_map(do, dm, default_grid(do, dm))
        assert c.interpolate(0.05) > 0.05 and c.interpolate(0.95) < 0.95
        assert abs(c.interpolate(0.5) - 0.5) < 1e-9
        lower = c.fp < 0.5 - 1e-12
        assert np.all(c.fw[lower & (c.fp > 0)] > c.fp[lower & (c.fp > 0)])

    def test_t_pair_inverse_s(self):
        do, dm = DistributionSpec.student_t(0.2, 1, 3), DistributionSpec.student_t(0.35, 1, 1)
        c = numeric_cdf_map(do, dm, default_grid(do, dm))
        assert c.is_inverse_s(0.05, 0.95)
        assert np.all(np.diff(c.fp) > 0) and np.all(np.diff(c.fw) >= 0)

    def test_grid_too_narrow(self):
        spec = DistributionSpec.gaussian(0, 1)
        with pytest.raises(DomainError):
            numeric_cdf_map(spec, spec, np.linspace(-3, 3, 101))

    def test_unsorted_grid(self):
        spec = DistributionSpec.gaussian(0, 1)
        grid = default_grid(spec)[::-1]
        with pytest.raises(DomainError):
            numeric_cdf_map(spec, spec, grid)

    def test_default_grid(self):
        g = default_grid(DistributionSpec.gaussian(0, 1), DistributionSpec.gaussian(0.5, 2))
        assert g.size == 2001 and g[0] == -20.0 and g[-1] == 20.5


class TestModelCdfMap:
    def test_tk_identity_diagonal(self):
        fp = np.linspace(0, 1, 301)
        c = model_cdf_map(WeightingModel.create("tk", 1.0), fp)
        np.testing.assert_allclose(c.fw, c.fp, atol=1e-15)

    def test_tk_and_gaussian_map_similar(self):
        fp = np.linspace(0, 1, 10_001)
        a = model_cdf_map(WeightingModel.create("tk", 0.65), fp)
        b = model_cdf_map(WeightingModel.create("gauss", 0.23, 1.64), fp)
        assert np.max(np.abs(a.fw - b.fw)) < 0.05

    def test_unsorted(self):
        with pytest.raises(DomainError):
            model_cdf_map(WeightingModel.create("tk", 0.65), [0.5, 0.2])


class TestCurve:
    def test_invariants(self):
        with pytest.raises(DomainError):
            CdfMapCurve(np.array([0.1, 0.1]), np.array([0.1, 0.2]))
        with pytest.raises(DomainError):
            CdfMapCurve(np.array([0.1, 0.2]), np.array([0.1, 1.2]))

    def test_csv_format(self, tmp_path):
        c = model_cdf_map(WeightingModel.create("tk", 0.65), np.linspace(0, 1, 5))
        text = c.to_csv(tmp_path / "c.csv")
        lines = text.split("\n")
        assert lines[0] == "fp,fw" and text.endswith("\n") and "\r" not in text
        assert lines[3] == "0.5,%.12g" % tk_weight(0.5, 0.65)
        back = CdfMapCurve.from_csv(tmp_path / "c.csv")
        np.testing.assert_allclose(back.fw, c.fw, rtol=1e-11)

    def test_csv_collapses_rows_equal_at_printed_precision(self):
        c = CdfMapCurve(np.array([0.5, 1 - 1e-15, 1.0]), np.array([0.5, 1.0, 1.0]))
        assert c.to_csv().count("\n") == 3
