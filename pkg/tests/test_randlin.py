"""Stream reproducibility, sampler moments, and the small Hermitian solve."""

import math

import mpmath as mp
import numpy as np
import pytest

from fama_lab.randlin import (
    RngStream,
    SingularGramError,
    hermitian_inner,
    sample_cgauss_vec,
    sample_gamma_int,
    solve_gram,
)


class TestRngStream:
    def test_bit_identical_replay(self):
        a = sample_cgauss_vec(RngStream(421, 7), 16)
        b = sample_cgauss_vec(RngStream(421, 7), 16)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = sample_cgauss_vec(RngStream(421, 7), 16)
        b = sample_cgauss_vec(RngStream(421, 8), 16)
        assert not np.allclose(a, b)

    def test_stream_independence(self):
        n = 1_000_000
        x = RngStream(5, 1).generator().standard_normal(n)
        y = RngStream(5, 2).generator().standard_normal(n)
        corr = np.corrcoef(x, y)[0, 1]
        assert abs(corr) <= 3.0 / math.sqrt(n)


class TestComplexGaussian:
    def test_norm_mean(self):
        stream = RngStream(11, 0)
        sq = [np.linalg.norm(sample_cgauss_vec(stream, 8)) ** 2
              for _ in range(20_000)]
        assert np.mean(sq) == pytest.approx(8.0, abs=0.1)

    def test_component_variance(self):
        stream = RngStream(12, 0)
        z = np.concatenate([sample_cgauss_vec(stream, 64) for _ in range(400)])
        assert np.var(z.real) == pytest.approx(0.5, abs=0.01)
        assert np.var(z.imag) == pytest.approx(0.5, abs=0.01)

    def test_invalid_dim(self):
        with pytest.raises(ValueError):
            sample_cgauss_vec(RngStream(1, 0), 0)


class TestGammaInt:
    def test_exponential_mean(self):
        x = sample_gamma_int(RngStream(21, 0), 1, size=1_000_000)
        assert x.mean() == pytest.approx(1.0, abs=0.005)

    def test_shape_eight_moments(self):
        x = sample_gamma_int(RngStream(22, 0), 8, size=1_000_000)
        assert x.mean() == pytest.approx(8.0, abs=0.02)
        assert x.var() == pytest.approx(8.0, abs=0.1)

    def test_cdf_at_three(self):
        # Oracle: regularized lower incomplete gamma, gammainc(3,3)/Gamma(3).
        mp.mp.dps = 30
        ref = float(mp.gammainc(3, 0, 3, regularized=True))
        x = sample_gamma_int(RngStream(23, 0), 3, size=1_000_000)
        assert np.mean(x <= 3.0) == pytest.approx(ref, abs=0.005)

    def test_scalar_form(self):
        v = sample_gamma_int(RngStream(24, 0), 4)
        assert isinstance(v, float) and v > 0

    def test_domain(self):
        with pytest.raises(ValueError):
            sample_gamma_int(RngStream(1, 0), 0)


class TestHermitianInner:
    def test_orthonormal_basis(self):
        e1 = np.array([1.0, 0.0], dtype=complex)
        e2 = np.array([0.0, 1.0], dtype=complex)
        assert hermitian_inner(e1, e1) == 1.0
        assert hermitian_inner(e1, e2) == 0.0

    def test_conjugate_linearity(self):
        x = np.array([1 + 1j, 0.0])
        y = np.array([2j, 0.0])
        assert hermitian_inner(x, y) == pytest.approx(2 + 2j)

    def test_self_inner_nonnegative(self):
        gen = RngStream(3, 0)
        for _ in range(20):
            v = sample_cgauss_vec(gen, 6)
            s = hermitian_inner(v, v)
            assert s.imag == pytest.approx(0.0, abs=1e-12)
            assert s.real >= 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hermitian_inner(np.ones(3), np.ones(4))


class TestSolveGram:
    def test_orthonormal_columns(self):
        H = np.eye(4, 2, dtype=complex)
        assert np.allclose(solve_gram(H), H)

    def test_single_column(self):
        h = np.array([[3.0], [4.0j]], dtype=complex)
        expected = h / np.linalg.norm(h) ** 2
        assert np.allclose(solve_gram(h), expected)

    def test_hand_case(self):
        # Gram of [[1,1],[0,1]] is [[1,1],[1,2]]; its inverse gives
        # W = [[1,0],[-1,1]] and H^H W = I.
        H = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        W = solve_gram(H)
        assert np.allclose(W, np.array([[1.0, 0.0], [-1.0, 1.0]]))
        assert np.allclose(H.conj().T @ W, np.eye(2), atol=1e-12)

    def test_residual_over_random_draws(self):
        stream = RngStream(31, 0)
        worst = 0.0
        for _ in range(10_000):
            H = (stream.generator().standard_normal((8, 4))
                 + 1j * stream.generator().standard_normal((8, 4))) * np.sqrt(0.5)
            W = solve_gram(H)
            resid = np.max(np.abs(H.conj().T @ W - np.eye(4)))
            worst = max(worst, resid)
        assert worst <= 1e-10

    def test_singular_gram_raises(self):
        h = np.array([[1.0], [0.0]], dtype=complex)
        H = np.hstack([h, h])  # rank-1 Gram
        with pytest.raises(SingularGramError):
            solve_gram(H)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            solve_gram(np.ones((2, 3), dtype=complex))
