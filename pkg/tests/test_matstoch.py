"""Matrix primitives checked against independent elementary routes.

Each numeric routine is compared with a reference computed a different
way: definition loops for Kronecker products, a hand eigendecomposition
and scipy's general expm for the exponential, and Simpson quadrature for
its time integral.
"""

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from vacrel.matstoch import (expm_generator, expm_integral, is_generator,
                             is_subgenerator, kron, kron_sum,
                             stationary_vector)


def ref_kron(a, b):
    """Kronecker product straight from the definition, four loops."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(b.shape[0]):
                for m in range(b.shape[1]):
                    out[i * b.shape[0] + k, j * b.shape[1] + m] = a[i, j] * b[k, m]
    return out


def random_generator(rng, n, scale=1.0):
    q = rng.uniform(0.0, scale, (n, n))
    np.fill_diagonal(q, 0.0)
    return q - np.diag(q.sum(axis=1))


def expm_2x2_switch(a, b, t):
    """exp(Qt) for Q = [[-a, a], [b, -b]] from its eigendecomposition.

    Eigenvalues are 0 and -(a+b); the closed form is elementary.
    """
    s = a + b
    decay = np.exp(-s * t)
    return np.array([[b + a * decay, a - a * decay],
                     [b - b * decay, a + b * decay]]) / s


class TestKron:
    def test_matches_definition_loops(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(2, 3))
        b = rng.normal(size=(4, 2))
        assert np.abs(kron(a, b) - ref_kron(a, b)).max() < 1e-14

    def test_kron_sum_matches_definition(self):
        rng = np.random.default_rng(12)
        a = random_generator(rng, 3)
        b = random_generator(rng, 2)
        ref = ref_kron(a, np.eye(2)) + ref_kron(np.eye(3), b)
        assert np.abs(kron_sum(a, b) - ref).max() < 1e-14

    def test_kron_sum_of_generators_is_generator(self):
        rng = np.random.default_rng(13)
        assert is_generator(kron_sum(random_generator(rng, 3),
                                     random_generator(rng, 4)))

    def test_kron_sum_rejects_non_square(self):
        with pytest.raises(ValueError):
            kron_sum(np.zeros((2, 3)), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            kron_sum(np.zeros((2, 2)), np.zeros((3, 2)))


class TestChecks:
    def test_is_generator(self):
        assert is_generator([[-1.0, 1.0], [2.0, -2.0]])
        assert not is_generator([[-1.0, 0.5], [2.0, -2.0]])
        assert not is_generator([[-1.0, -1.0], [2.0, -2.0]])
        assert not is_generator(np.zeros((2, 3)))

    def test_is_subgenerator(self):
        assert is_subgenerator([[-2.0, 1.0], [0.5, -1.0]])
        assert not is_subgenerator([[-1.0, 1.0], [1.0, -1.0]])
        assert not is_subgenerator([[0.0, 0.0], [0.5, -1.0]])


class TestExpm:
    def test_two_state_closed_form(self):
        a, b = 0.7, 1.9
        q = np.array([[-a, a], [b, -b]])
        for t in (0.0, 0.3, 1.0, 7.5):
            assert np.abs(expm_generator(q, t)
                          - expm_2x2_switch(a, b, t)).max() < 1e-13

    def test_matches_scipy_on_random_generators(self):
        rng = np.random.default_rng(21)
        for n in (2, 5, 9):
            q = random_generator(rng, n, scale=2.0)
            for t in (0.1, 1.0, 4.0):
                gap = np.abs(expm_generator(q, t)
                             - scipy.linalg.expm(q * t)).max()
                assert gap < 1e-12

    def test_matches_scipy_on_subgenerators(self):
        rng = np.random.default_rng(22)
        q = random_generator(rng, 4, scale=1.5)
        q[np.diag_indices(4)] -= rng.uniform(0.2, 1.0, 4)
        gap = np.abs(expm_generator(q, 2.0) - scipy.linalg.expm(q * 2.0)).max()
        assert gap < 1e-12

    def test_semigroup(self):
        rng = np.random.default_rng(23)
        q = random_generator(rng, 6)
        left = expm_generator(q, 1.3) @ expm_generator(q, 2.1)
        assert np.abs(left - expm_generator(q, 3.4)).max() < 1e-12

    def test_rows_sum_to_one_and_nonnegative(self):
        rng = np.random.default_rng(24)
        q = random_generator(rng, 7, scale=3.0)
        m = expm_generator(q, 5.0)
        assert m.min() >= 0.0
        assert np.abs(m.sum(axis=1) - 1.0).max() < 1e-12

    def test_permutation_conjugation(self):
        rng = np.random.default_rng(25)
        q = random_generator(rng, 5)
        perm = rng.permutation(5)
        p = np.eye(5)[perm]
        left = p @ expm_generator(q, 1.7) @ p.T
        right = expm_generator(p @ q @ p.T, 1.7)
        assert np.abs(left - right).max() < 1e-13

    def test_zero_time_is_identity(self):
        q = np.array([[-1.0, 1.0], [0.5, -0.5]])
        assert np.array_equal(expm_generator(q, 0.0), np.eye(2))

    def test_negative_time_rejected(self):
        q = np.array([[-1.0, 1.0], [0.5, -0.5]])
        with pytest.raises(ValueError):
            expm_generator(q, -0.1)
        with pytest.raises(ValueError):
            expm_integral(q, -0.1)


class TestExpmIntegral:
    def test_against_simpson_quadrature(self):
        rng = np.random.default_rng(31)
        q = random_generator(rng, 3, scale=1.2)
        t = 2.5
        grid = np.linspace(0.0, t, 401)
        samples = np.array([scipy.linalg.expm(q * u) for u in grid])
        ref = scipy.integrate.simpson(samples, x=grid, axis=0)
        assert np.abs(expm_integral(q, t) - ref).max() < 1e-7

    def test_derivative_is_the_exponential(self):
        rng = np.random.default_rng(32)
        q = random_generator(rng, 4)
        t, h = 1.8, 1e-5
        diff = (expm_integral(q, t + h) - expm_integral(q, t - h)) / (2 * h)
        assert np.abs(diff - expm_generator(q, t)).max() < 1e-9

    def test_rows_sum_to_t(self):
        rng = np.random.default_rng(33)
        q = random_generator(rng, 5, scale=2.0)
        for t in (0.0, 0.4, 3.0, 12.0):
            m = expm_integral(q, t)
            assert np.abs(m.sum(axis=1) - t).max() < 1e-10 * max(1.0, t)

    def test_long_horizon_window_fallback(self):
        # Large rate*t drives scipy's Poisson quantiles to NaN; the bound
        # fallback must keep the integral exact.
        rng = np.random.default_rng(34)
        q = random_generator(rng, 4, scale=6.0)
        t = 4000.0
        m = expm_integral(q, t)
        assert np.abs(m.sum(axis=1) - t).max() / t < 1e-9
        pi = stationary_vector(q)
        assert np.abs(m / t - np.outer(np.ones(4), pi)).max() < 1e-3

    def test_zero_matrix(self):
        assert np.array_equal(expm_integral(np.zeros((3, 3)), 2.0),
                              2.0 * np.eye(3))


class TestStationaryVector:
    def test_two_state_balance(self):
        a, b = 0.3, 1.1
        pi = stationary_vector([[-a, a], [b, -b]])
        assert np.abs(pi - np.array([b, a]) / (a + b)).max() < 1e-14

    def test_random_generator_properties(self):
        rng = np.random.default_rng(41)
        q = random_generator(rng, 8, scale=2.0)
        pi = stationary_vector(q)
        assert pi.min() >= -1e-14
        assert abs(pi.sum() - 1.0) < 1e-12
        assert np.abs(pi @ q).max() < 1e-12
