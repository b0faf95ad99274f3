import numpy as np
import pytest

from lielinear.lie import GroupSpec, adjoint_matrix, ambient_differential, group_membership
from lielinear.linalg import characteristic_polynomial
from lielinear.spectral import (
    NoRealLogarithmError,
    SpectralError,
    classify,
    closed_form_charpoly,
    lambda_formulas,
    murakami_factor,
    spectral_report,
    subgroup_samples,
)

SL2 = GroupSpec("SL", 2)
H = np.array([[1.0, 0], [0, -1]])
E = np.array([[0.0, 1], [0, 0]])
F = np.array([[0.0, 0], [1, 0]])


def _span_contains(basis_coords, vec):
    q, _ = np.linalg.qr(basis_coords)
    return np.linalg.norm(vec - q @ (q.T @ vec)) <= 1e-10


def _random_h(rng):
    while True:
        h = rng.normal(size=(2, 2))
        if abs(np.linalg.det(h)) > 0.05:
            return h


class TestClassify:
    @pytest.mark.parametrize("lam, tag", [(1.0, "unimodular"), (-1.0, "unimodular"), (1j, "unimodular"),
                                          (2.0, "expanding"), (0.5, "contracting"), (1 + 1e-7, "unimodular")])
    def test_tags(self, lam, tag):
        assert classify(lam, 1e-6) == tag


class TestReport:
    def test_example1_ambient(self, example1):
        r = spectral_report(example1, "ambient")
        assert r.eigenvalues == [(1 + 0j, 4)]
        assert r.all_unimodular and r.unimodular_margin <= 1e-9
        assert r.bases["zero"].shape == (4, 4)
        assert np.array_equal(r.dfo_matrix, [[1, 0, 1, 0], [-1, 1, -1, 1], [0, 0, 1, 0], [0, 0, -1, 1]])

    def test_example1_algebra(self, example1):
        r = spectral_report(example1)
        assert r.eigenvalues == [(1 + 0j, 3)]
        assert r.bases["zero"].shape == (3, 3)

    def test_hyperbolic(self, hyperbolic):
        r = spectral_report(hyperbolic)
        found = sorted((lam.real, mult, tag) for (lam, mult), tag in zip(r.eigenvalues, r.tags))
        assert [(m, t) for _, m, t in found] == [(1, "contracting"), (1, "unimodular"), (1, "expanding")]
        assert np.allclose([v for v, _, _ in found], [0.25, 1.0, 4.0], rtol=0, atol=1e-14)
        assert all(lam.imag == 0 for lam, _ in r.eigenvalues)
        # oracle: direct conjugation sends H, E, F to H, 4E, F/4
        assert _span_contains(r.bases["plus"], [0, 1, 0])
        assert _span_contains(r.bases["zero"], [1, 0, 0])
        assert _span_contains(r.bases["minus"], [0, 0, 1])
        (xp,) = r.basis_plus
        assert np.allclose(np.abs(xp.matrix), E, atol=1e-12)
        assert r.unimodular_margin == pytest.approx(3.0, abs=1e-12)
        assert not r.all_unimodular
        assert sorted(z.real for z in r.offending()) == [0.25, 4.0]

    def test_identity(self, example1):
        r = spectral_report(example1.with_conjugator(np.eye(2)))
        assert r.eigenvalues == [(1 + 0j, 3)] and r.all_unimodular

    def test_bad_tolerance(self, example1):
        with pytest.raises(ValueError):
            spectral_report(example1, tol_unimodular=0.0)

    def test_unknown_representation(self, example1):
        with pytest.raises(ValueError):
            spectral_report(example1, "dual")

    def test_random_invariants(self, example1, rng):
        for _ in range(50):
            sys = example1.with_conjugator(_random_h(rng))
            for rep, dim in (("algebra", 3), ("ambient", 4)):
                r = spectral_report(sys, rep)
                assert sum(b.shape[1] for b in r.bases.values()) == dim
                assert sum(m for _, m in r.eigenvalues) == dim
                for part in ("plus", "zero", "minus"):
                    assert r.invariance_residual(part) <= 1e-7
                if rep == "ambient":
                    assert abs(np.prod(r.all_eigenvalues) - 1) <= 1e-8

    def test_complex_spectrum(self, example1):
        # rotation-like h with scaling: complex eigenvalues off the unit circle are impossible
        # for conjugations of SL(2) except in reciprocal pairs; a rotation gives e^{+-2i theta}
        t = 0.3
        h = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        r = spectral_report(example1.with_conjugator(h))
        values = np.sort_complex(r.all_eigenvalues)
        expected = np.sort_complex(np.array([np.exp(-2j * t), 1.0, np.exp(2j * t)]))
        assert np.allclose(values, expected, atol=1e-12)
        assert r.all_unimodular

    def test_tags_stable_under_perturbation(self, example1, rng):
        for _ in range(50):
            h = _random_h(rng)
            a = spectral_report(example1.with_conjugator(h))
            b = spectral_report(example1.with_conjugator(h + 1e-12 * rng.normal(size=(2, 2))))
            for lam, tag in zip(a.all_eigenvalues, [t for (_, m), t in zip(a.eigenvalues, a.tags) for _ in range(m)]):
                if abs(abs(lam) - 1) > 10 * a.tol_unimodular:
                    j = int(np.argmin(np.abs(b.all_eigenvalues - lam)))
                    tags_b = [t for (_, m), t in zip(b.eigenvalues, b.tags) for _ in range(m)]
                    assert tags_b[j] == tag

    def test_contraction_dynamics(self, hyperbolic):
        r = spectral_report(hyperbolic)
        a = r.dfo_matrix
        a_inv = np.linalg.inv(a)
        for x in r.bases["minus"].T:
            norms = [np.linalg.norm(np.linalg.matrix_power(a, k) @ x) for k in range(21)]
            assert all(n1 < n0 for n0, n1 in zip(norms, norms[1:]))
        for x in r.bases["plus"].T:
            norms = [np.linalg.norm(np.linalg.matrix_power(a_inv, k) @ x) for k in range(21)]
            assert all(n1 < n0 for n0, n1 in zip(norms, norms[1:]))


class TestClosedForms:
    def test_lambda_diag(self):
        assert lambda_formulas(np.diag([2.0, 0.5])) == (0.25, 4.0)

    def test_lambda_unipotent(self):
        assert lambda_formulas([[1.0, 1.0], [0.0, 1.0]]) == (1.0, 1.0)

    def test_lambda_identity(self):
        assert lambda_formulas(np.eye(2)) == (1.0, 1.0)

    def test_lambda_shape(self):
        with pytest.raises(ValueError):
            lambda_formulas(np.eye(3))

    def test_lambda_product_and_adjoint(self, rng):
        for _ in range(100):
            h = _random_h(rng)
            l1, l2 = lambda_formulas(h)
            assert abs(l1 * l2 - 1) <= 1e-9
            nontrivial = np.linalg.eigvals(adjoint_matrix(h, SL2))
            nontrivial = np.delete(nontrivial, np.argmin(np.abs(nontrivial - 1)))
            assert np.allclose(np.sort_complex(nontrivial), np.sort_complex([l1, l2]), atol=1e-8)

    def test_closed_form_charpoly(self, rng):
        for _ in range(100):
            h = _random_h(rng)
            got = characteristic_polynomial(ambient_differential(h, 2)).coef
            assert np.allclose(got, closed_form_charpoly(h).coef, atol=1e-8, rtol=0)


class TestMurakami:
    def test_example1(self, example1):
        m = murakami_factor(example1)
        assert np.allclose(m.W.matrix, E, atol=1e-12)
        assert m.residual_norm <= 1e-8 and not m.degraded
        assert np.allclose(m.residual_outer, np.eye(3), atol=1e-8)

    def test_identity(self, example1):
        m = murakami_factor(example1.with_conjugator(np.eye(2)))
        assert np.allclose(m.W.matrix, 0, atol=1e-15)
        assert np.allclose(m.inner_matrix, np.eye(3)) and m.residual_norm <= 1e-14

    def test_hyperbolic(self, hyperbolic):
        m = murakami_factor(hyperbolic)
        assert np.allclose(m.W.matrix, np.log(2) * H, atol=1e-12)
        assert np.allclose(m.inner_matrix, np.diag([1, 4, 0.25]), atol=1e-12)
        assert m.residual_norm <= 1e-10

    def test_negative_eigenvalue(self, example1):
        # conjugation by a rotation through pi/2 acts on E with eigenvalue e^{i pi} = -1
        h = np.array([[0.0, -1.0], [1.0, 0.0]])
        with pytest.raises(NoRealLogarithmError):
            murakami_factor(example1.with_conjugator(h))

    def test_random_inner(self, example1, rng):
        for _ in range(20):
            x = 0.4 * rng.normal(size=(2, 2))
            x -= np.trace(x) / 2 * np.eye(2)
            from scipy.linalg import expm

            m = murakami_factor(example1.with_conjugator(expm(x)))
            assert m.residual_norm <= 1e-8


class TestSubgroups:
    def test_minus_is_lower_unipotent(self, hyperbolic):
        r = spectral_report(hyperbolic)
        for g in subgroup_samples(r, "minus", 10, seed=1):
            assert g[0, 0] == pytest.approx(1) and g[1, 1] == pytest.approx(1) and g[0, 1] == pytest.approx(0, abs=1e-15)
            assert group_membership(g, SL2)

    def test_zero_scale_is_identity(self, hyperbolic):
        r = spectral_report(hyperbolic)
        (g,) = subgroup_samples(r, "plus", 1, scale=0.0)
        assert np.array_equal(g, np.eye(2))

    def test_identity_drift_zero_part(self, example1):
        r = spectral_report(example1.with_conjugator(np.eye(2)))
        assert all(group_membership(g, SL2) for g in subgroup_samples(r, "zero", 20))

    def test_empty_part(self, example1):
        r = spectral_report(example1)
        with pytest.raises(ValueError):
            subgroup_samples(r, "plus", 3)

    def test_seeded(self, hyperbolic):
        r = spectral_report(hyperbolic)
        a = subgroup_samples(r, "minus", 5, seed=3)
        b = subgroup_samples(r, "minus", 5, seed=3)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_spectral_error_is_arithmetic():
    assert issubclass(SpectralError, ArithmeticError)
