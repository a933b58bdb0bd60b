import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tplab import (
    DimensionError,
    DomainError,
    ScalarFnSpec,
    apply_spectral_fn,
    dilate,
    eigh,
    intdim,
    op_norm,
    psd_order_leq,
    symmetrize,
    trace_fn,
)
from tplab.spectral import rank_with_threshold

from conftest import random_symmetric


class TestSymmetrize:
    def test_averages_off_diagonal(self):
        np.testing.assert_array_equal(symmetrize([[1, 2], [0, 1]]), [[1, 1], [1, 1]])
        np.testing.assert_array_equal(symmetrize([[0, 4], [0, 0]]), [[0, 2], [2, 0]])

    def test_symmetric_input_unchanged(self):
        a = np.array([[2.0, -1.0], [-1.0, 3.0]])
        np.testing.assert_array_equal(symmetrize(a), a)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            symmetrize(np.zeros((2, 3)))

    @given(arrays(np.float64, (4, 4), elements=st.floats(-1e6, 1e6)))
    def test_output_symmetric_and_idempotent(self, raw):
        s = symmetrize(raw)
        np.testing.assert_array_equal(s, s.T)
        np.testing.assert_array_equal(symmetrize(s), s)


class TestEigh:
    def test_identity(self):
        dec = eigh(np.eye(3))
        np.testing.assert_allclose(dec.eigenvalues, [1, 1, 1])

    def test_diagonal_sorted_ascending(self):
        dec = eigh(np.diag([-2.0, 5.0]))
        np.testing.assert_allclose(dec.eigenvalues, [-2, 5])

    def test_swap_matrix(self):
        # characteristic polynomial s^2 - 1 by hand: eigenvalues -1, 1
        dec = eigh([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(dec.eigenvalues, [-1, 1], atol=1e-12)

    def test_invariants_on_random_matrices(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            d = int(rng.integers(1, 17))
            a = random_symmetric(rng, d, scale=10.0 ** rng.integers(-3, 4))
            dec = eigh(a)
            scale = 1.0 + op_norm(a)
            assert np.linalg.norm(dec.reconstruct() - a, 2) <= 1e-10 * scale
            assert np.linalg.norm(dec.eigenvectors.T @ dec.eigenvectors - np.eye(d), 2) <= 1e-10


class TestApplySpectralFn:
    def test_cosh_of_zero(self):
        np.testing.assert_allclose(apply_spectral_fn(np.zeros((4, 4)), ScalarFnSpec.cosh()),
                                   np.eye(4))

    def test_sinh_diagonal_action(self):
        out = apply_spectral_fn(np.diag([1.0, -1.0]), ScalarFnSpec.sinh())
        np.testing.assert_allclose(out, np.diag([math.sinh(1), -math.sinh(1)]), atol=1e-12)

    def test_signed_square_on_pm_one_spectrum(self):
        # eigenvalues +-1, and sgn(s)|s|^2 = s there, so the matrix is fixed
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(apply_spectral_fn(a, ScalarFnSpec.signed_pow(2)), a,
                                   atol=1e-12)

    def test_commutes_with_argument(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a = random_symmetric(rng, 5)
            fa = apply_spectral_fn(a, ScalarFnSpec.sinh(0.7))
            comm = a @ fa - fa @ a
            assert np.linalg.norm(comm, 2) <= 1e-9 * op_norm(a) * op_norm(fa) + 1e-15

    def test_affine_identity(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            a = random_symmetric(rng, 4)
            out = apply_spectral_fn(a, ScalarFnSpec.affine(2.5, -0.75))
            np.testing.assert_allclose(out, 2.5 * a - 0.75 * np.eye(4), atol=1e-9)

    def test_hyperbolic_pythagorean_identity(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            a = random_symmetric(rng, 4)
            c2 = apply_spectral_fn(a, ScalarFnSpec.cosh2())
            s2 = apply_spectral_fn(a, ScalarFnSpec.sinh2())
            np.testing.assert_allclose(c2 - s2, np.eye(4), atol=1e-9)


class TestScalarFnSpec:
    def test_exponent_must_be_positive(self):
        with pytest.raises(DomainError):
            ScalarFnSpec.abs_pow(0.0)
        with pytest.raises(DomainError):
            ScalarFnSpec.signed_pow(-1.0)

    def test_admissible_whitelist(self):
        assert ScalarFnSpec.sinh(2.0).convex_sq_derivative
        assert ScalarFnSpec.signed_pow(1.5).convex_sq_derivative
        assert ScalarFnSpec.affine(3.0, 1.0).convex_sq_derivative
        assert not ScalarFnSpec.signed_pow(1.2).convex_sq_derivative
        assert not ScalarFnSpec.cosh().convex_sq_derivative
        assert not ScalarFnSpec.abs_pow(2.0).convex_sq_derivative

    def test_derivatives_match_finite_differences(self):
        specs = [ScalarFnSpec.cosh(0.7), ScalarFnSpec.sinh(1.3), ScalarFnSpec.cosh2(0.5),
                 ScalarFnSpec.sinh2(0.9), ScalarFnSpec.abs_pow(2.5),
                 ScalarFnSpec.signed_pow(3.0), ScalarFnSpec.affine(2.0, -1.0)]
        xs = np.linspace(-2.0, 2.0, 41)
        xs = xs[np.abs(xs) > 1e-3]  # power kinds are not smooth at 0
        h = 1e-6
        for spec in specs:
            fd = (spec(xs + h) - spec(xs - h)) / (2 * h)
            np.testing.assert_allclose(spec.deriv(xs), fd, rtol=1e-5, atol=1e-6)

    def test_custom_function(self):
        spec = ScalarFnSpec.custom(np.exp, np.exp)
        a = np.diag([0.0, 1.0])
        np.testing.assert_allclose(apply_spectral_fn(a, spec), np.diag([1.0, math.e]),
                                   atol=1e-12)
        with pytest.raises(DomainError):
            ScalarFnSpec.custom(np.exp).deriv(1.0)


class TestOpNorm:
    def test_examples(self):
        assert op_norm(np.zeros((3, 3))) == 0.0
        assert op_norm(np.diag([3.0, -5.0])) == 5.0
        # eigenvalues of [[2,1],[1,2]] are 1 and 3 by hand
        assert abs(op_norm([[2.0, 1.0], [1.0, 2.0]]) - 3.0) <= 1e-12


class TestTraceFn:
    def test_cosh_of_zero(self):
        assert trace_fn(np.zeros((3, 3)), ScalarFnSpec.cosh()) == pytest.approx(3.0)
        assert trace_fn(np.zeros((3, 3)), ScalarFnSpec.cosh(), normalized=True) == pytest.approx(1.0)

    def test_abs_fourth_power(self):
        assert trace_fn(np.diag([2.0, -2.0]), ScalarFnSpec.abs_pow(4)) == pytest.approx(32.0)

    def test_sinh_squared_swap(self):
        # eigenvalues of theta*[[0,1],[1,0]] are +-theta and sinh^2 is even
        theta = 0.83
        a = theta * np.array([[0.0, 1.0], [1.0, 0.0]])
        assert trace_fn(a, ScalarFnSpec.sinh2()) == pytest.approx(2 * math.sinh(theta) ** 2)


class TestPsdOrder:
    def test_examples(self):
        assert psd_order_leq(np.zeros((2, 2)), np.eye(2), 1e-10)
        assert not psd_order_leq(np.eye(2), np.zeros((2, 2)), 1e-10)
        assert psd_order_leq(np.diag([1.0, 0.0]), np.diag([1.0, 1.0]), 1e-10)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            psd_order_leq(np.eye(2), np.eye(3))


class TestIntdim:
    def test_examples(self):
        assert intdim(np.eye(5)) == pytest.approx(5.0)
        assert intdim(np.diag([1.0, 0.0, 0.0])) == pytest.approx(1.0)
        assert intdim(np.diag([2.0, 1.0])) == pytest.approx(1.5)

    def test_zero_matrix(self):
        assert intdim(np.zeros((3, 3))) == 0.0

    def test_indefinite_rejected(self):
        with pytest.raises(DomainError):
            intdim(np.diag([1.0, -1.0]))

    def test_bounds_between_one_and_rank(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            d = int(rng.integers(1, 9))
            r = int(rng.integers(1, d + 1))
            b = rng.standard_normal((d, r))
            a = b @ b.T  # PSD with rank <= r
            if op_norm(a) == 0.0:
                continue
            val = intdim(a)
            rank = rank_with_threshold(a, 1e-10)
            assert 1.0 - 1e-12 <= val <= rank + 1e-12


class TestDilate:
    def test_scalar(self):
        out = dilate([[1.0]])
        np.testing.assert_array_equal(out, [[0, 1], [1, 0]])
        assert op_norm(out) == pytest.approx(1.0)

    def test_zero(self):
        np.testing.assert_array_equal(dilate(np.zeros((2, 3))), np.zeros((5, 5)))

    def test_norm_is_largest_singular_value(self):
        # singular values of diag(3, 4) are 3 and 4
        assert op_norm(dilate(np.diag([3.0, 4.0]))) == pytest.approx(4.0)
        rng = np.random.default_rng(29)
        for _ in range(100):
            h = rng.standard_normal((int(rng.integers(1, 5)), int(rng.integers(1, 5))))
            sv = np.linalg.svd(h, compute_uv=False)
            assert op_norm(dilate(h)) == pytest.approx(sv[0], abs=1e-10)

    @settings(max_examples=50)
    @given(arrays(np.float64, (3, 2), elements=st.floats(-100, 100)))
    def test_spectrum_symmetric_about_zero(self, h):
        w = np.linalg.eigvalsh(dilate(h))
        np.testing.assert_allclose(w, -w[::-1], atol=1e-9 * (1 + np.max(np.abs(w))))
