import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stsbench import linalg
from stsbench.assemblage import pauli_assemblage, signaling_D
from stsbench.errors import IncompleteTomography, InvalidState
from stsbench.tomography import (
    ShotCounts,
    project_bloch,
    reconstruct_state,
    sample_counts,
    tomographic_assemblage,
)

PLUS = linalg.projector([1 / np.sqrt(2), 1 / np.sqrt(2)])


def exact_counts(rho, shots=10**6):
    out = []
    for b in "XYZ":
        p = np.real(np.trace(0.5 * (np.eye(2) + linalg.PAULIS[b]) @ rho))
        n_plus = int(round(p * shots))
        out.append(ShotCounts(b, shots, {1: n_plus, -1: shots - n_plus}))
    return out


class TestSampling:
    def test_eigenstate(self):
        c = sample_counts(np.diag([1, 0]), "Z", 8000, 17)
        assert c.counts == {1: 8000, -1: 0}

    def test_binomial_mean(self):
        c = sample_counts(np.eye(2) / 2, "X", 10**6, 3)
        assert abs(c.counts[1] / 10**6 - 0.5) <= 3 * 0.5 / np.sqrt(10**6)

    def test_plus_in_y(self):
        c = sample_counts(PLUS, "Y", 10**6, 99)
        assert abs(c.expectation) <= 3 / np.sqrt(10**6)

    def test_deterministic(self):
        rho = linalg.random_density_matrix(2, np.random.default_rng(0))
        assert sample_counts(rho, "X", 500, 5, (1, 2)) == sample_counts(rho, "X", 500, 5, (1, 2))
        assert sample_counts(rho, "X", 500, 5, (1, 2)) != sample_counts(rho, "X", 500, 5, (2, 1))

    def test_bad_state(self):
        with pytest.raises(InvalidState):
            sample_counts(np.eye(4) / 4, "X", 10, 0)

    def test_counts_validation(self):
        with pytest.raises(ValueError):
            ShotCounts("X", 10, {1: 3, -1: 3})
        with pytest.raises(ValueError):
            ShotCounts("W", 10, {1: 5, -1: 5})

    def test_round_trip(self):
        c = sample_counts(PLUS, "Z", 100, 4, (0, 1, 2))
        assert ShotCounts.from_dict(c.to_dict()) == c


class TestReconstruction:
    def test_exact(self):
        np.testing.assert_allclose(reconstruct_state(exact_counts(np.diag([1, 0]))), np.diag([1, 0]), atol=1e-12)

    def test_projection(self):
        r = project_bloch(np.array([0.9, 0.3, 0.4]))
        np.testing.assert_allclose(r, np.array([0.9, 0.3, 0.4]) / np.sqrt(1.06), atol=1e-12)
        np.testing.assert_allclose(r, [0.8742, 0.2914, 0.3885], atol=1e-3)
        assert np.linalg.norm(r) == pytest.approx(1)

    @pytest.mark.xfail(strict=True, reason="quoted vector has norm 0.9956, not a unit rescaling")
    def test_projection_quoted_value(self):
        r = project_bloch(np.array([0.9, 0.3, 0.4]))
        np.testing.assert_allclose(r, [0.8704, 0.2901, 0.3868], atol=1e-3)

    def test_frobenius_projection_agrees(self):
        # nearest unit-trace PSD matrix via eigenvalue simplex projection
        raw = linalg.from_bloch([0.9, 0.3, 0.4])
        w, v = np.linalg.eigh(raw)
        w = np.clip(w - (w.sum() - 1) / 2, 0, None)
        w = w / w.sum()
        np.testing.assert_allclose(linalg.bloch_vector((v * w) @ v.conj().T), project_bloch([0.9, 0.3, 0.4]), atol=1e-12)

    def test_projected_state_is_physical(self):
        counts = [ShotCounts("X", 10, {1: 10}), ShotCounts("Y", 10, {1: 8, -1: 2}), ShotCounts("Z", 10, {1: 9, -1: 1})]
        rho = reconstruct_state(counts)
        linalg.DensityMatrix(rho)

    def test_missing_basis(self):
        with pytest.raises(IncompleteTomography):
            reconstruct_state(exact_counts(PLUS)[:2])

    def test_convergence(self):
        rng = np.random.default_rng(8)
        worst = 0.0
        for k in range(100):
            rho = linalg.random_density_matrix(2, rng)
            counts = [sample_counts(rho, b, 10**6, 1000 + k, (i,)) for i, b in enumerate("XYZ")]
            worst = max(worst, linalg.trace_distance(reconstruct_state(counts), rho))
        assert worst <= 0.005


class TestTomographicAssemblage:
    def test_large_shot_limit(self):
        asm = pauli_assemblage()
        est = tomographic_assemblage(asm, 10**7, 1)
        for x in range(3):
            for a in range(2):
                assert linalg.trace_distance(est.members[x, a], asm.members[x, a]) <= 1e-3

    def test_deterministic(self):
        a = tomographic_assemblage(pauli_assemblage(), 8000, 42)
        b = tomographic_assemblage(pauli_assemblage(), 8000, 42)
        assert a == b
        assert a != tomographic_assemblage(pauli_assemblage(), 8000, 43)

    def test_floor_small_sample(self):
        # the 1000-seed version is an acceptance criterion
        Ds = [signaling_D(tomographic_assemblage(pauli_assemblage(), 8000, s)) for s in range(50)]
        assert 0 < np.median(Ds) < 0.05


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(1, 50),
        st.integers(0, 50),
        st.integers(0, 50),
        st.integers(0, 50),
    )
    def test_reconstruction_always_physical(self, shots, nx, ny, nz):
        counts = [ShotCounts(b, shots, {1: min(k, shots), -1: shots - min(k, shots)}) for b, k in zip("XYZ", (nx, ny, nz))]
        linalg.DensityMatrix(reconstruct_state(counts))

    def test_error_scales_as_inverse_sqrt_shots(self):
        rng = np.random.default_rng(12)
        states = [linalg.random_density_matrix(2, rng) for _ in range(40)]
        shots = np.array([10**2, 10**3, 10**4, 10**5])
        med = []
        for n in shots:
            errs = [
                linalg.trace_distance(
                    reconstruct_state([sample_counts(r, b, int(n), 31 + k, (i,)) for i, b in enumerate("XYZ")]), r
                )
                for k, r in enumerate(states)
            ]
            med.append(np.median(errs))
        slope = np.polyfit(np.log(shots), np.log(med), 1)[0]
        assert -0.6 <= slope <= -0.4

    def test_bit_for_bit(self):
        rho = linalg.random_density_matrix(2, np.random.default_rng(3))
        a = [sample_counts(rho, b, 777, 2**63 + 5, (i,)) for i, b in enumerate("XYZ")]
        b = [sample_counts(rho, b, 777, 2**63 + 5, (i,)) for i, b in enumerate("XYZ")]
        assert a == b
        assert np.array_equal(reconstruct_state(a), reconstruct_state(b))

    def test_mle_reserved(self):
        with pytest.raises(NotImplementedError):
            tomographic_assemblage(pauli_assemblage(), 100, 0, method="mle")
