"""Dense complex linear algebra for 2x2 and 4x4 Hermitian matrices.

Everything operates on plain ``numpy`` arrays of ``complex128``.  A density
matrix is an ordinary array that passes :func:`validate_density_matrix`:
Hermitian to 1e-10, unit trace to 1e-10, and positive semidefinite up to a
-1e-9 eigenvalue floor (smaller negative values are treated as roundoff and
clipped to zero before logarithms or square roots).

Basis convention: the two-qubit computational basis is ordered
``|HH>, |HV>, |VH>, |VV>`` and element ``(2a+b, 2a'+b')`` refers to qubit A
(the first, transmitted arm) indices ``a, a'`` and qubit B indices ``b, b'``.

All functions are pure; there is no shared mutable state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidState, NonHermitian, NotPSD

# Tolerances for the density-matrix invariants.
DM_HERMITIAN_ATOL = 1e-10
DM_TRACE_ATOL = 1e-10
EIG_NEGATIVE_FLOOR = -1e-9

# Looser Hermiticity precondition for generic eigendecomposition inputs.
EIG_HERMITIAN_ATOL = 1e-8


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (m + m^dag)/2."""
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: np.ndarray, atol: float = DM_HERMITIAN_ATOL) -> bool:
    """Max-entry check of ``|m - m^dag| <= atol``."""
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are real and ascending; ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eig_hermitian(m: np.ndarray, atol: float = EIG_HERMITIAN_ATOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian within ``atol`` (max entry of ``m - m^dag``).

    Returns
    -------
    Spectrum
        Real ascending eigenvalues and unitary eigenvector matrix ``V`` such
        that ``V diag(w) V^dag`` reproduces the Hermitian part of ``m``.

    Raises
    ------
    NonHermitian
        If the symmetry check fails.
    DimensionMismatch
        If ``m`` is not square.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, atol):
        dev = float(np.max(np.abs(m - m.conj().T)))
        raise NonHermitian(f"matrix deviates from Hermiticity by {dev:.3e} (atol={atol:.1e})")
    w, v = np.linalg.eigh(hermitize(m))
    return Spectrum(eigenvalues=w, eigenvectors=v)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two 2x2 matrices.

    Indexing follows ``(A kron B)[2i+k, 2j+l] = A[i,j] * B[k,l]``, i.e. the
    first factor is qubit A.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionMismatch(f"kron expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace(rho: np.ndarray, keep: str = "A") -> np.ndarray:
    """Reduced state of one qubit of a two-qubit density matrix.

    Parameters
    ----------
    rho : array_like
        Valid 4x4 density matrix.
    keep : {"A", "B"}
        Which party's reduced state to return (the other is traced out).
    """
    rho = validate_density_matrix(rho, dim=4)
    r = rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.trace(r, axis1=1, axis2=3)
    if keep == "B":
        return np.trace(r, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def clip_spectrum(w: np.ndarray, floor: float = EIG_NEGATIVE_FLOOR) -> np.ndarray:
    """Clip roundoff-negative eigenvalues to zero.

    Values in ``[floor, 0)`` become exactly 0; anything below ``floor`` is a
    genuine positivity violation and raises :class:`NotPSD`.
    """
    w = np.asarray(w, dtype=float)
    if w.min(initial=0.0) < floor:
        raise NotPSD(f"eigenvalue {w.min():.3e} below the tolerated floor {floor:.1e}")
    return np.where(w < 0.0, 0.0, w)


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Hermitian square root of a positive-semidefinite matrix.

    Eigenvalues in ``[-1e-9, 0)`` are clipped to zero; anything more negative
    raises :class:`NotPSD`.  The result squares back to ``m`` (up to the
    clipping) and is itself Hermitian PSD.
    """
    spec = eig_hermitian(m)
    w = clip_spectrum(spec.eigenvalues)
    v = spec.eigenvectors
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def validate_density_matrix(m: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Check the density-matrix invariants and return the array as complex128.

    Raises
    ------
    DimensionMismatch, NonHermitian, InvalidState, NotPSD
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if n not in (2, 4):
        raise DimensionMismatch(f"density matrix dimension must be 2 or 4, got {n}")
    if dim is not None and n != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {n}")
    if not is_hermitian(m, DM_HERMITIAN_ATOL):
        dev = float(np.max(np.abs(m - m.conj().T)))
        raise NonHermitian(f"density matrix deviates from Hermiticity by {dev:.3e}")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > DM_TRACE_ATOL:
        raise InvalidState(f"density matrix trace {tr:.12f} is not 1 within {DM_TRACE_ATOL:.1e}")
    w = np.linalg.eigvalsh(hermitize(m))
    if w.min() < EIG_NEGATIVE_FLOOR:
        raise NotPSD(f"density matrix has eigenvalue {w.min():.3e} < {EIG_NEGATIVE_FLOOR:.1e}")
    return m


# ---------------------------------------------------------------------------
# JSON persistence: {"dim": 4, "re": [[...]x4], "im": [[...]x4]}, row-major.
# ---------------------------------------------------------------------------

def density_to_dict(rho: np.ndarray) -> dict:
    """Serialize a density matrix to the shared JSON structure."""
    rho = np.asarray(rho, dtype=np.complex128)
    return {
        "dim": int(rho.shape[0]),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }


def density_from_dict(data: dict) -> np.ndarray:
    """Rebuild and validate a density matrix from its JSON structure."""
    from .errors import BadSpec

    for key in ("dim", "re", "im"):
        if key not in data:
            raise BadSpec(f"density-matrix JSON missing field '{key}'")
    dim = int(data["dim"])
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise BadSpec(
            f"density-matrix JSON fields 're'/'im' must be {dim}x{dim} "
            f"(got {re.shape} and {im.shape})"
        )
    return validate_density_matrix(re + 1j * im, dim=dim)


def save_density(path, rho: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(density_to_dict(rho), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_density(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return density_from_dict(json.load(fh))
