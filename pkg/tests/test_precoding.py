"""MRT/ZF precoder construction and the effective-gain laws."""

import math

import numpy as np
import pytest

from fama_lab.mc_engine import _reference_matrix, _weights_for_scheme
from fama_lab.precoding import mrt_precoders, zf_precoders
from fama_lab.randlin import RngStream, sample_cgauss_matrix


class TestMrt:
    def test_basis_vector(self):
        H = np.array([[1.0], [0.0]], dtype=complex)
        assert np.allclose(mrt_precoders(H).vectors, H)

    def test_normalization(self):
        H = np.array([[3.0], [4.0j]], dtype=complex)
        w = mrt_precoders(H).vector(0)
        assert np.allclose(w, [0.6, 0.8j])

    def test_alignment_property(self):
        stream = RngStream(1, 0)
        for _ in range(50):
            H = sample_cgauss_matrix(stream, (6, 3))
            ps = mrt_precoders(H)
            for u in range(3):
                gain = np.vdot(H[:, u], ps.vector(u))
                assert gain.imag == pytest.approx(0.0, abs=1e-12)
                assert gain.real == pytest.approx(np.linalg.norm(H[:, u]))

    def test_zero_column_rejected(self):
        H = np.zeros((4, 2), dtype=complex)
        with pytest.raises(ValueError):
            mrt_precoders(H)


class TestZf:
    def test_single_user_equals_mrt(self):
        stream = RngStream(2, 0)
        H = sample_cgauss_matrix(stream, (5, 1))
        assert np.allclose(zf_precoders(H).vectors, mrt_precoders(H).vectors)

    def test_orthonormal_columns(self):
        H = np.eye(4, 2, dtype=complex)
        assert np.allclose(zf_precoders(H).vectors, H)

    def test_hand_case(self):
        # Columns h1=(1,0), h2=(1,1): unnormalized solve gives
        # [[1,0],[-1,1]], so w1 = (1,-1)/sqrt(2), w2 = (0,1), and the
        # nulling h2^H w1 = 0 holds.
        H = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        ps = zf_precoders(H)
        assert np.allclose(ps.vector(0), np.array([1.0, -1.0]) / math.sqrt(2))
        assert np.allclose(ps.vector(1), [0.0, 1.0])
        assert abs(np.vdot(H[:, 1], ps.vector(0))) < 1e-12
        assert abs(np.vdot(H[:, 0], ps.vector(1))) < 1e-12

    def test_unit_norms_and_nulling_over_draws(self):
        stream = RngStream(3, 0)
        worst_norm = 0.0
        worst_null = 0.0
        for _ in range(2_000):
            H = sample_cgauss_matrix(stream, (8, 4))
            ps = zf_precoders(H)
            worst_norm = max(worst_norm, float(np.max(np.abs(
                np.linalg.norm(ps.vectors, axis=0) - 1.0))))
            proj = np.abs(H.conj().T @ ps.vectors)
            np.fill_diagonal(proj, 0.0)
            rel = proj / np.linalg.norm(H, axis=0)[:, None]
            worst_null = max(worst_null, float(rel.max()))
        assert worst_norm <= 1e-12
        assert worst_null <= 1e-10


class TestGainLaws:
    def test_zf_desired_gain_mean(self):
        n = 100_000
        gen = RngStream(4, 0).generator()
        H = _reference_matrix(gen, n, 8, 4, (1.0,) * 4)
        W, _ = _weights_for_scheme(gen, H, "ZF", (1.0,) * 4)
        gains = np.abs(np.einsum("nm,nm->n", H[:, :, 0].conj(), W[:, :, 0])) ** 2
        # Gamma(M-U+1, 1): mean 5, variance 5
        assert gains.mean() == pytest.approx(5.0, abs=3 * math.sqrt(5.0 / n))

    def test_mrt_reference_gain_mean(self):
        n = 100_000
        gen = RngStream(5, 0).generator()
        H = _reference_matrix(gen, n, 8, 4, (1.0,) * 4)
        W, _ = _weights_for_scheme(gen, H, "MRT", (1.0,) * 4)
        gains = np.abs(np.einsum("nm,nm->n", H[:, :, 0].conj(), W[:, :, 0])) ** 2
        assert gains.mean() == pytest.approx(8.0, abs=3 * math.sqrt(8.0 / n))

    def test_batched_zf_matches_contract_op(self):
        gen = RngStream(6, 0).generator()
        H = _reference_matrix(gen, 64, 8, 4, (1.0,) * 4)
        W, resampled = _weights_for_scheme(gen, H.copy(), "ZF", (1.0,) * 4)
        assert resampled == 0
        for i in (0, 17, 63):
            assert np.allclose(W[i], zf_precoders(H[i]).vectors, atol=1e-10)
