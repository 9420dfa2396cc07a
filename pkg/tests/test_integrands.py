"""Tests for the integrand gallery and sampled convexity diagnostics."""

import numpy as np
import pytest

from quclab.errors import InputError
from quclab.integrands import (
    AnnulusSampler,
    Integrand,
    eigen_ratio_at,
    eigen_ratio_batch,
    estimate_K,
    gallery,
    integrand_from_config,
    integrand_to_config,
    uhlenbeck_indices,
    validate_integrand,
    verify_growth,
)
from quclab.integrands.profiles import (
    bounded_power_profile,
    constant_profile,
    power_profile,
)

SAMPLER = AnnulusSampler(0.3, 3.0, shells=50, directions=25, seed=5)


class TestGalleryConstruction:
    def test_power_hessian_example(self):
        f = gallery("power", p=3)
        eig = np.linalg.eigvalsh(f.hessian(np.array([1.0, 0.0])))
        assert np.allclose(eig, [1.0, 2.0], atol=1e-14)
        assert f.declared_K == pytest.approx(2.0)

    def test_two_center_quadratic(self, rng):
        f = gallery("two_center", p=2, z0=[0.3, -0.7])
        z = rng.standard_normal((8, 2))
        assert np.allclose(f.hessian(z), 4.0 * np.eye(2), atol=1e-13)
        assert eigen_ratio_at(f, np.array([1.0, 2.0])) == pytest.approx(1.0)

    def test_mixed_eigen_bounds(self):
        p, q = 3.0, 4.0
        f = gallery("mixed", p=p, q=q)
        z = np.array([1.0, 1.0])
        eig = np.linalg.eigvalsh(f.hessian(z))
        r = np.linalg.norm(z)
        assert eig[0] >= r ** (p - 2.0) - 1e-12
        assert eig[-1] <= (p - 1.0) * r ** (p - 2.0) + (q - 1.0) * abs(z[0]) ** (q - 2.0) + 1e-12

    def test_bad_exponent_rejected(self):
        with pytest.raises(InputError):
            gallery("power", p=0.9)

    def test_unknown_name_rejected(self):
        with pytest.raises(InputError):
            gallery("spaghetti", p=3)

    def test_unknown_param_rejected(self):
        with pytest.raises(InputError):
            gallery("power", p=3, banana=1)

    def test_config_round_trip(self):
        for f in (gallery("power", p=2.5), gallery("mixed", p=2, q=4),
                  gallery("cantor", level=6), gallery("two_center", p=1.5, z0=[1.0, 0.0]),
                  gallery("uhlenbeck", profile="bounded_power", p=4)):
            g = integrand_from_config(integrand_to_config(f))
            pts = np.random.default_rng(0).standard_normal((16, 2)) * 1.3
            assert np.allclose(f.value(pts), g.value(pts), rtol=1e-13)

    def test_gallery_consistency(self, rng):
        for f in (gallery("power", p=3), gallery("power", p=1.5),
                  gallery("two_center", p=1.5, z0=[0.5, 0.0]),
                  gallery("mixed", p=2.2, q=3.5),
                  gallery("uhlenbeck", profile="bounded_power", p=4),
                  gallery("cantor", level=6),
                  gallery("gh", p=3, matrix=[[2.0, 0.3], [0.0, 1.0]]),
                  gallery("orthotropic", p=4)):
            validate_integrand(f, rng)

    def test_analytic_vs_fd_hessian(self, rng):
        f = gallery("power", p=3)
        fd = Integrand(name="fd", dim=2, value_fn=f.value_fn,
                       gradient_fn=f.gradient_fn, hessian_fn=None)
        z = rng.standard_normal((12, 2)) + np.array([2.0, 0.0])
        assert np.allclose(fd.hessian(z), f.hessian(z), rtol=1e-6, atol=1e-8)
        assert fd.hess_kind == "finite-difference" and f.hess_kind == "analytic"


class TestEigenRatio:
    def test_isotropic_quadratic(self, rng):
        f = gallery("power", p=2)
        z = rng.standard_normal(2)
        assert eigen_ratio_at(f, z) == pytest.approx(1.0, abs=1e-12)

    def test_quartic_ratio_three(self, rng):
        # D2(|z|^4/4) = |z|^2 (I + 2 unit unit^t): eigenvalues {r^2, 3 r^2}
        f = gallery("power", p=4)
        for _ in range(10):
            z = rng.standard_normal(2)
            assert eigen_ratio_at(f, z) == pytest.approx(3.0, rel=1e-10)

    def test_orthotropic_divergence(self):
        f = gallery("orthotropic", p=4)
        t = 1e-3
        ratio = eigen_ratio_at(f, np.array([1.0, t]))
        assert ratio == pytest.approx(t ** -2, rel=1e-8)

    def test_degenerate_flagged(self):
        f = gallery("power", p=4)
        assert eigen_ratio_at(f, np.zeros(2)) == np.inf


class TestEstimateK:
    def test_power_p3(self):
        assert estimate_K(gallery("power", p=3), SAMPLER) == pytest.approx(2.0, rel=1e-9)

    def test_sum_rule(self):
        f = gallery("power", p=3) + gallery("power", p=1.5, center=[0.7, 0.2])
        assert f.declared_K == pytest.approx(2.0)
        est = estimate_K(f, SAMPLER)
        assert est <= 2.0 * (1.0 + 1e-6)

    def test_two_center_quadratic(self):
        assert estimate_K(gallery("two_center", p=2, z0=[0.4, 0.1]), SAMPLER) \
            == pytest.approx(1.0, abs=1e-10)

    def test_declared_bound_never_exceeded(self):
        for f in (gallery("power", p=3), gallery("power", p=1.5),
                  gallery("two_center", p=1.5, z0=[0.5, 0.0]),
                  gallery("uhlenbeck", profile="bounded_power", p=4),
                  gallery("gh", p=3, matrix=[[2.0, 0.0], [0.0, 1.0]]),
                  gallery("cantor", level=8)):
            est = estimate_K(f, AnnulusSampler(0.3, 3.0, shells=100, directions=100, seed=9))
            assert est <= f.declared_K * (1.0 + 1e-6), f.name

    def test_small_sampler_rejected(self):
        with pytest.raises(InputError):
            estimate_K(gallery("power", p=3), AnnulusSampler(0.5, 2.0, shells=5, directions=5))


class TestSumRatio:
    def test_pairwise_sums_bounded_by_max_K(self, rng):
        # 1000 random pairs from the ratio-bounded gallery members, with
        # randomized exponents and centers
        def random_member():
            kind = rng.integers(3)
            p = float(rng.uniform(1.3, 4.0))
            if kind == 0:
                return gallery("power", p=p, center=list(rng.uniform(-0.5, 0.5, 2)))
            if kind == 1:
                return gallery("two_center", p=p, z0=list(rng.uniform(-0.5, 0.5, 2)))
            return gallery("uhlenbeck", profile="bounded_power", p=p)

        pts = AnnulusSampler(0.4, 2.5, shells=20, directions=10, seed=13).points(2)
        for _ in range(1000):
            f1, f2 = random_member(), random_member()
            ratios = eigen_ratio_batch(f1 + f2, pts)
            finite = ratios[np.isfinite(ratios)]
            assert finite.max() <= max(f1.declared_K, f2.declared_K) * (1.0 + 1e-6)


class TestVerifyGrowth:
    def test_power_p3_with_k2(self):
        rep = verify_growth(gallery("power", p=3), K=2.0)
        assert rep.holds
        assert rep.p == pytest.approx(1.5) and rep.q == pytest.approx(3.0)

    def test_two_center_quadratic_k1(self):
        rep = verify_growth(gallery("two_center", p=2, z0=[0.2, 0.0]), K=1.0)
        assert rep.holds and rep.p == pytest.approx(2.0) and rep.q == pytest.approx(2.0)

    def test_mixed_fails_with_k1(self):
        # |z1|^4 growth cannot sit below C(|z|^2 + 1) out to radius 1e7
        rep = verify_growth(gallery("mixed", p=2, q=4), K=1.0)
        assert not rep.holds
        assert rep.worst_point is not None

    def test_all_declared_gallery_growth(self):
        for f in (gallery("power", p=3), gallery("power", p=1.5),
                  gallery("two_center", p=1.5, z0=[0.5, 0.0]),
                  gallery("uhlenbeck", profile="bounded_power", p=4)):
            assert verify_growth(f, K=f.declared_K).holds, f.name


class TestUhlenbeckIndices:
    def test_power_profile(self):
        out = uhlenbeck_indices(power_profile(3.0))
        assert out["i_a"] == pytest.approx(1.0, abs=1e-9)
        assert out["s_a"] == pytest.approx(1.0, abs=1e-9)
        assert out["K"] == pytest.approx(2.0, abs=1e-9)

    def test_constant_profile(self):
        out = uhlenbeck_indices(constant_profile())
        assert out["i_a"] == pytest.approx(0.0, abs=1e-12)
        assert out["K"] == pytest.approx(1.0, abs=1e-9)
        assert out["p"] == pytest.approx(2.0, abs=1e-9)

    def test_bounded_profile(self):
        out = uhlenbeck_indices(bounded_power_profile(4.0))
        assert out["i_a"] == pytest.approx(0.0, abs=1e-6)
        assert out["s_a"] == pytest.approx(2.0, abs=1e-6)
        assert out["K"] == pytest.approx(3.0, abs=1e-5)

    def test_inadmissible_detected(self):
        from quclab.integrands.profiles import UhlenbeckProfile
        bad = UhlenbeckProfile(
            name="bad", a=lambda t: np.asarray(t, float) ** -1.5,
            da=lambda t: -1.5 * np.asarray(t, float) ** -2.5)
        with pytest.raises(InputError):
            uhlenbeck_indices(bad)
