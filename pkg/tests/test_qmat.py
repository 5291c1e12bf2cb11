import json

import numpy as np
import pytest

from conftest import random_density, random_pure
from discordlab import qmat
from discordlab.errors import BadSpec, DimensionMismatch, InvalidState, NonHermitian, NotPSD
from discordlab.states import SIGMA_X, SIGMA_Z, bell

PHI_PLUS = bell("phi")


def test_eig_identity():
    spec = qmat.eig_hermitian(np.eye(4))
    assert np.allclose(spec.eigenvalues, np.ones(4))


def test_eig_pauli_x():
    spec = qmat.eig_hermitian(SIGMA_X)
    assert np.allclose(spec.eigenvalues, [-1.0, 1.0])


def test_eig_diagonal_ascending():
    spec = qmat.eig_hermitian(np.diag([0.125, 0.125, 0.125, 0.625]))
    assert np.allclose(spec.eigenvalues, [0.125, 0.125, 0.125, 0.625])


def test_eig_random_hermitian_properties():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = m + m.conj().T
        spec = qmat.eig_hermitian(m)
        w, v = spec.eigenvalues, spec.eigenvectors
        assert abs(w.sum() - np.trace(m).real) <= 1e-9 * max(1.0, abs(w).max())
        assert np.max(np.abs(v.conj().T @ v - np.eye(4))) <= 1e-9
        assert np.max(np.abs((v * w) @ v.conj().T - m)) <= 1e-9 * max(1.0, abs(w).max())
        assert np.all(np.diff(w) >= -1e-12)


def test_eig_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NonHermitian):
        qmat.eig_hermitian(m)


def test_kron_identity():
    assert np.array_equal(qmat.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_sigma_z():
    assert np.allclose(qmat.kron(SIGMA_Z, SIGMA_Z), np.diag([1.0, -1.0, -1.0, 1.0]))


def test_kron_maximally_mixed():
    out = qmat.kron(np.eye(2) / 2, np.eye(2) / 2)
    assert np.allclose(out, np.diag([0.25, 0.25, 0.25, 0.25]))


def test_kron_index_convention():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    out = qmat.kron(a, b)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    assert out[2 * i + k, 2 * j + l] == pytest.approx(a[i, j] * b[k, l])


def test_kron_rejects_wrong_shapes():
    with pytest.raises(DimensionMismatch):
        qmat.kron(np.eye(4), np.eye(2))


def _ptrace_by_summation(rho, keep):
    # Independent oracle: explicit index summation over the traced party.
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                if keep == "A":
                    out[i, j] += rho[2 * i + k, 2 * j + k]
                else:
                    out[i, j] += rho[2 * k + i, 2 * k + j]
    return out


def test_partial_trace_bell_marginal():
    assert np.allclose(qmat.partial_trace(PHI_PLUS, "B"), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product_state():
    rng = np.random.default_rng(5)
    ra, rb = random_density(rng, 2), random_density(rng, 2)
    rho = np.kron(ra, rb)
    assert np.allclose(qmat.partial_trace(rho, "B"), rb, atol=1e-12)
    assert np.allclose(qmat.partial_trace(rho, "A"), ra, atol=1e-12)


def test_partial_trace_werner_marginal_all_p():
    from discordlab.states import werner

    for p in np.linspace(0.0, 1.0, 11):
        rho = werner(p)
        got = qmat.partial_trace(rho, "A")
        assert np.allclose(got, _ptrace_by_summation(rho, "A"), atol=1e-14)
        assert np.allclose(got, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_matches_summation_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rho = random_density(rng)
        for keep in ("A", "B"):
            assert np.allclose(
                qmat.partial_trace(rho, keep), _ptrace_by_summation(rho, keep), atol=1e-13
            )


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(9)
    for _ in range(20):
        rho = random_density(rng)
        assert abs(np.trace(qmat.partial_trace(rho, "A")).real - 1.0) <= 1e-10


def test_kron_partial_trace_roundtrip():
    rng = np.random.default_rng(13)
    a, b = random_density(rng, 2), random_density(rng, 2)
    rho = qmat.kron(a, b)
    assert np.allclose(qmat.partial_trace(rho, "A"), a, atol=1e-12)


def test_sqrt_psd_identity():
    assert np.allclose(qmat.sqrt_psd(np.eye(4)), np.eye(4))


def test_sqrt_psd_diagonal():
    assert np.allclose(qmat.sqrt_psd(np.diag([4.0, 1.0, 0.0, 0.0])), np.diag([2.0, 1.0, 0.0, 0.0]))


def test_sqrt_psd_projector_is_own_root():
    assert np.allclose(qmat.sqrt_psd(PHI_PLUS), PHI_PLUS, atol=1e-12)


def test_sqrt_psd_squares_back():
    rng = np.random.default_rng(17)
    for _ in range(50):
        m = random_density(rng) * rng.uniform(0.5, 3.0)
        root = qmat.sqrt_psd(m)
        assert np.max(np.abs(root @ root - m)) <= 1e-8
        assert np.min(np.linalg.eigvalsh(root)) >= -1e-12


def test_sqrt_psd_rejects_negative():
    with pytest.raises(NotPSD):
        qmat.sqrt_psd(np.diag([1.0, -0.5]))


def test_validate_density_matrix_accepts_valid():
    rng = np.random.default_rng(19)
    qmat.validate_density_matrix(random_density(rng))
    qmat.validate_density_matrix(random_pure(rng, 2), dim=2)


def test_validate_density_matrix_rejects():
    with pytest.raises(NonHermitian):
        qmat.validate_density_matrix(np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(InvalidState):
        qmat.validate_density_matrix(np.eye(4))  # trace 4
    with pytest.raises(NotPSD):
        qmat.validate_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionMismatch):
        qmat.validate_density_matrix(np.eye(3) / 3)


def test_clip_spectrum_policy():
    w = qmat.clip_spectrum(np.array([-5e-10, 0.2, 0.8]))
    assert w[0] == 0.0
    with pytest.raises(NotPSD):
        qmat.clip_spectrum(np.array([-1e-8, 1.0]))


def test_density_json_roundtrip(tmp_path):
    rng = np.random.default_rng(23)
    rho = random_density(rng)
    path = tmp_path / "rho.json"
    qmat.save_density(path, rho)
    back = qmat.load_density(path)
    assert np.max(np.abs(back - rho)) <= 1e-15
    data = json.loads(path.read_text())
    assert data["dim"] == 4 and len(data["re"]) == 4


def test_density_json_missing_field():
    with pytest.raises(BadSpec, match="'im'"):
        qmat.density_from_dict({"dim": 2, "re": [[1, 0], [0, 0]]})
