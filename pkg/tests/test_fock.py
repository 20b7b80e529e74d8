import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from keylog_sim import fock
from keylog_sim.errors import DimensionMismatch, DimensionTooSmall, TruncationRisk
from keylog_sim.phase_algebra import compose, displacement

from .oracles import coherent_series, expm_displacement, fock_coefficients_by_quadrature

R = math.sqrt(math.pi / 2)
TAU_TRUNC = 1e-8

# frozen from a dense-expm oracle at N = 150 (independent of the package's displacement code)
S_X_EXPECTATION = {0.5: 0.38339935002, 0.35: 0.67609888991, 0.25: 0.82171332177}
S_Z_EXPECTATION = {0.5: 0.45593812777, 0.35: 0.68055604613, 0.25: 0.82172483652}


class TestLadder:
    def test_two_levels(self):
        np.testing.assert_array_equal(fock.ladder_lower(2), [[0, 1], [0, 0]])

    def test_entry(self):
        assert fock.ladder_lower(3)[1, 2] == pytest.approx(math.sqrt(2))

    def test_raise_is_adjoint(self):
        np.testing.assert_array_equal(fock.ladder_raise(5), fock.ladder_lower(5).conj().T)

    @pytest.mark.parametrize("N", [2, 5, 40])
    def test_commutator_block(self, N):
        a = fock.ladder_lower(N)
        c = a @ a.conj().T - a.conj().T @ a
        np.testing.assert_allclose(c[: N - 1, : N - 1], np.eye(N - 1), atol=1e-12)

    def test_too_small(self):
        with pytest.raises(DimensionTooSmall):
            fock.ladder_lower(1)
        with pytest.raises(DimensionTooSmall):
            fock.quadratures(1)

    def test_read_only(self):
        with pytest.raises(ValueError):
            fock.ladder_lower(4)[0, 1] = 5


class TestQuadratures:
    def test_entry(self):
        q, _ = fock.quadratures(4)
        assert q[0, 1] == pytest.approx(1 / math.sqrt(2))

    def test_hermitian(self):
        q, p = fock.quadratures(10)
        np.testing.assert_allclose(q, q.conj().T)
        np.testing.assert_allclose(p, p.conj().T)
        off = p[~np.eye(10, dtype=bool)]
        assert np.all(off.real == 0)

    def test_canonical_commutator(self):
        N = 30
        q, p = fock.quadratures(N)
        c = q @ p - p @ q
        np.testing.assert_allclose(c[: N - 1, : N - 1], 1j * np.eye(N - 1), atol=1e-12)

    def test_vacuum_variance(self):
        q, _ = fock.quadratures(6)
        v = fock.vacuum(6)
        assert (v.conj() @ q @ q @ v).real == pytest.approx(0.5)


class TestNumberOperator:
    def test_diagonal(self):
        np.testing.assert_array_equal(fock.number_operator(3), np.diag([0, 1, 2]))

    def test_eigenstates(self):
        n = fock.number_operator(7)
        for j in range(7):
            np.testing.assert_array_equal(n @ fock.fock_state(j, 7), j * fock.fock_state(j, 7))

    def test_commutes_with_diagonal(self):
        n = fock.number_operator(5)
        d = np.diag(np.arange(5.0) ** 2 - 3j)
        np.testing.assert_array_equal(n @ d, d @ n)


@pytest.mark.parametrize("method", [fock.EXPONENTIAL, fock.ANALYTIC])
class TestDisplacementMatrix:
    def test_zero_is_identity(self, method):
        np.testing.assert_allclose(fock.displacement_matrix(0, 20, method), np.eye(20), atol=1e-14)

    def test_vacuum_overlap(self, method):
        assert fock.displacement_matrix(1, 100, method)[0, 0].real == pytest.approx(0.6065306597126334, abs=1e-12)

    def test_coherent_series(self, method):
        N = 100
        out = fock.displacement_matrix(R, N, method) @ fock.vacuum(N)
        np.testing.assert_allclose(out[:60], coherent_series(R, 60), atol=1e-12)

    def test_against_expm(self, method):
        N, K = 120, 60
        alpha = 1.1 - 1.7j
        np.testing.assert_allclose(
            fock.displacement_matrix(alpha, N, method)[:K, :K], expm_displacement(alpha, N)[:K, :K], atol=TAU_TRUNC
        )

    def test_truncation_guard(self, method):
        with pytest.raises(TruncationRisk):
            fock.displacement_matrix(3.0, 30, method)

    def test_too_small(self, method):
        with pytest.raises(DimensionTooSmall):
            fock.displacement_matrix(0.1, 7, method)

    def test_unitary_on_low_energy_vectors(self, method):
        N = 120
        v = fock.normalize(np.exp(-np.arange(N) / 3) * (1 + 0.2j))
        for alpha in (2.5, -1.8 + 1.6j, 2.5j):
            assert abs(np.linalg.norm(fock.displacement_matrix(alpha, N, method) @ v) - 1) < TAU_TRUNC


class TestDisplacementProperties:
    def test_methods_agree(self):
        # 50 random amplitudes |alpha| <= 2 on the low-energy block at N = 120
        rng = np.random.default_rng(7)
        N = 120
        K = fock.low_energy_block(N)
        for _ in range(50):
            alpha = 2 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
            a = fock.displacement_matrix(alpha, N, fock.EXPONENTIAL)
            b = fock.displacement_matrix(alpha, N, fock.ANALYTIC)
            assert np.max(np.abs(a[:K, :K] - b[:K, :K])) < TAU_TRUNC

    @settings(max_examples=40, deadline=None)
    @given(
        st.builds(complex, st.floats(-1.2, 1.2), st.floats(-1.2, 1.2)),
        st.builds(complex, st.floats(-1.2, 1.2), st.floats(-1.2, 1.2)),
    )
    def test_composition_oracle(self, alpha, beta):
        N = 120
        K = fock.low_energy_block(N)
        lhs = fock.displacement_matrix(alpha, N) @ fock.displacement_matrix(beta, N)
        rhs = fock.phased_displacement_matrix(compose(displacement(alpha), displacement(beta)), N)
        assert np.max(np.abs(lhs[:K, :K] - rhs[:K, :K])) < TAU_TRUNC

    def test_phased_matrix(self):
        d = compose(displacement(R), displacement(1j * R))
        np.testing.assert_allclose(
            fock.phased_displacement_matrix(d, 40), -1j * fock.displacement_matrix((1 + 1j) * R, 40), atol=1e-14
        )


class TestStates:
    def test_fock_state(self):
        np.testing.assert_array_equal(fock.fock_state(2, 4), [0, 0, 1, 0])
        with pytest.raises(ValueError):
            fock.fock_state(4, 4)

    def test_coherent_state(self):
        np.testing.assert_allclose(fock.coherent_state(0.7j, 30), coherent_series(0.7j, 30), atol=1e-15)

    @pytest.mark.parametrize("center, width", [(0.0, 0.25), (math.sqrt(math.pi), 0.35), (-2 * math.sqrt(math.pi), 0.5)])
    def test_squeezed_matches_quadrature(self, center, width):
        N = 60

        def psi(x):
            return (math.pi * width**2) ** -0.25 * np.exp(-((x - center) ** 2) / (2 * width**2))

        np.testing.assert_allclose(
            fock.squeezed_position_state(center, width, N), fock_coefficients_by_quadrature(psi, N), atol=1e-9
        )


class TestGkpParams:
    @pytest.mark.parametrize("delta, s_max", [(0.25, 8), (0.35, 5), (0.5, 4)])
    def test_default_s_max(self, delta, s_max):
        assert fock.GkpParams(delta=delta).s_max == s_max
        assert math.exp(-math.pi * delta**2 * (2 * s_max + 2) ** 2 / 2) < 1e-12
        assert math.exp(-math.pi * delta**2 * (2 * s_max) ** 2 / 2) >= 1e-12

    @pytest.mark.parametrize("kwargs", [{"mu": 2}, {"delta": 0.0}, {"delta": -1}, {"cutoff": 7}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            fock.GkpParams(**kwargs)


class TestGkpCodeword:
    def test_normalized_and_contained(self):
        v = fock.gkp_codeword(fock.GkpParams())
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert fock.leakage(v) < 1e-6

    def test_returns_copy(self):
        params = fock.GkpParams()
        fock.gkp_codeword(params)[0] = 99
        assert abs(fock.gkp_codeword(params)[0]) < 1

    def test_position_mean(self):
        q, _ = fock.quadratures(150)
        assert abs(fock.expectation(q, fock.gkp_codeword(fock.GkpParams(mu=0)))) < 1e-8

    @pytest.mark.parametrize("delta", [0.5, 0.35, 0.25])
    def test_stabilizer_values(self, delta):
        v = fock.gkp_codeword(fock.GkpParams(delta=delta))
        sx = fock.expectation(fock.displacement_matrix(math.sqrt(2 * math.pi), 150), v)
        sz = fock.expectation(fock.displacement_matrix(1j * math.sqrt(2 * math.pi), 150), v)
        assert sx.real == pytest.approx(S_X_EXPECTATION[delta], abs=1e-8)
        assert sz.real == pytest.approx(S_Z_EXPECTATION[delta], abs=1e-8)

    def test_convergence_monotone(self):
        sx = [S_X_EXPECTATION[d] for d in (0.5, 0.35, 0.25)]
        sz = [S_Z_EXPECTATION[d] for d in (0.5, 0.35, 0.25)]
        assert sx == sorted(sx) and sz == sorted(sz)

    def test_stabilizer_imaginary_part(self):
        v = fock.gkp_codeword(fock.GkpParams(delta=0.3))
        assert abs(fock.expectation(fock.displacement_matrix(math.sqrt(2 * math.pi), 150), v).imag) < 1e-6

    def test_codewords_nearly_orthogonal(self):
        zero = fock.gkp_codeword(fock.GkpParams(mu=0))
        one = fock.gkp_codeword(fock.GkpParams(mu=1))
        assert fock.fidelity(zero, one) < 0.01

    @pytest.mark.parametrize("delta", [0.25, 0.35])
    def test_logical_x_action(self, delta):
        zero = fock.gkp_codeword(fock.GkpParams(mu=0, delta=delta))
        one = fock.gkp_codeword(fock.GkpParams(mu=1, delta=delta))
        moved = fock.displacement_matrix(R, 150) @ zero
        assert fock.fidelity(moved, one) > fock.fidelity(moved, zero)

    def test_low_cutoff_fails_loudly(self):
        with pytest.raises(TruncationRisk):
            fock.gkp_codeword(fock.GkpParams(delta=0.25, cutoff=40))


class TestDiagnostics:
    def test_fidelity_examples(self):
        v = fock.normalize(np.arange(1, 11) + 1j)
        assert fock.fidelity(v, v) == pytest.approx(1)
        assert fock.fidelity(fock.fock_state(0, 10), fock.fock_state(1, 10)) == 0
        coh = fock.normalize(fock.coherent_state(1, 60))
        assert fock.fidelity(fock.vacuum(60), coh) == pytest.approx(0.36787944117144233, abs=1e-12)

    def test_fidelity_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fock.fidelity(fock.vacuum(8), fock.vacuum(9))

    def test_expectation_examples(self):
        assert fock.expectation(fock.number_operator(6), fock.fock_state(3, 6)) == 3
        v = fock.normalize(np.ones(9))
        assert fock.expectation(np.eye(9), v) == pytest.approx(1)
        with pytest.raises(DimensionMismatch):
            fock.expectation(np.eye(3), v)

    def test_leakage_uses_top_tenth(self):
        assert fock.tail_size(150) == 15
        assert fock.tail_size(11) == 2
        v = np.zeros(20)
        v[18] = 0.6
        v[0] = 0.8
        assert fock.leakage(v) == pytest.approx(0.36)

    def test_normalize(self):
        v = fock.normalize(np.array([3.0, 4j]))
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        with pytest.raises(ValueError):
            fock.normalize(np.zeros(3))

    def test_pad(self):
        np.testing.assert_array_equal(fock.pad(np.array([1, 2]), 4), [1, 2, 0, 0])
