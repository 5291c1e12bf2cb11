"""Maximum-likelihood two-qubit tomography and partial single-qubit tomography.

Full reconstruction writes the candidate state as ``T^dag T / Tr[T^dag T]``
with T complex lower-triangular (16 real parameters, which makes any
parameter vector a physical state) and minimizes the Gaussian-approximation
objective

    N_T * sum_nu (p_nu(t) - n_nu / N_T)^2 / (2 p_nu(t))

with derivative-free simplex descent: one warm start from linear inversion
projected to physicality plus ``n_restarts`` random starts, merged by
minimum objective (ties break toward the lowest start index) and polished
until a restart from the solution improves the objective by less than
``polish_tol``.  Predicted probabilities are floored at 1e-10 so observed
counts on a projector the trial state assigns ~zero probability cannot blow
up the objective.

Partial tomography reconstructs only the single-qubit conditional states
from the frequencies of the joint projectors P_k (x) |b><b| via Stokes
inversion, projecting onto the Bloch ball when noise pushes |s| above 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateParams, InconsistentConditionals, NotConverged
from .measure import (
    CountRecord,
    PartialCountRecord,
    ProjectorSet,
    standard_projector_set,
    two_qubit_pauli_basis,
)
from .qmat import hermitize, validate_density_matrix
from .states import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z

# Strict-lower-triangle slots of T in row-major order; t[4+2i], t[5+2i] are
# the real and imaginary parts of entry LOWER_SLOTS[i].
LOWER_SLOTS = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`ml_reconstruct` (defaults are the contract)."""

    n_restarts: int = 5
    max_evals: int = 50_000
    diameter_tol: float = 1e-9
    spread_tol: float = 1e-12
    init_step: float = 0.1
    polish_step: float = 1e-3
    polish_tol: float = 1e-10
    polish_rounds: int = 3
    warm_start: bool = True
    seed: int = 0


@dataclass(frozen=True)
class ReconstructionResult:
    """Outcome of a maximum-likelihood reconstruction."""

    rho: np.ndarray
    final_loglike: float
    iterations: int
    converged: bool
    n_starts: int
    best_start: int


def rho_from_cholesky(t) -> np.ndarray:
    """Density matrix ``T^dag T / Tr[T^dag T]`` for any 16-parameter vector."""
    t = np.asarray(t, dtype=float)
    if t.shape != (16,):
        raise ValueError(f"expected 16 parameters, got shape {t.shape}")
    norm = float(t @ t)
    if norm <= 1e-30:
        raise DegenerateParams(f"Tr[T^dag T] = {norm:.3e} is numerically zero")
    T = _kernels.cholesky_lower(t)
    return validate_density_matrix(T.conj().T @ T / norm, dim=4)


def cholesky_from_density(rho: np.ndarray) -> np.ndarray:
    """Parameter vector whose reconstruction reproduces ``rho``.

    Rank-deficient states get a diagonal jitter before factoring; the result
    is normalized to the unit sphere (the parameterization is scale free).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    flipped = rho[::-1, ::-1]
    T = None
    for eps in (0.0, 1e-12, 1e-10, 1e-8, 1e-6):
        try:
            jittered = flipped + eps * np.eye(4)
            jittered = jittered / np.trace(jittered).real
            low = np.linalg.cholesky(jittered)
        except np.linalg.LinAlgError:
            continue
        T = low[::-1, ::-1].conj().T
        break
    if T is None:
        raise DegenerateParams("state could not be Cholesky-factored even with jitter")
    t = np.empty(16)
    t[0:4] = T.diagonal().real
    for i, (r, c) in enumerate(LOWER_SLOTS):
        t[4 + 2 * i] = T[r, c].real
        t[5 + 2 * i] = T[r, c].imag
    return t / np.linalg.norm(t)


def _record_kets(counts: CountRecord, pset: ProjectorSet) -> np.ndarray:
    """Projector state vectors in the order the record lists its labels."""
    return np.ascontiguousarray(
        np.array([pset.kets[pset.index(lbl)] for lbl in counts.labels])
    )


def neg_log_likelihood(t, counts: CountRecord, pset: ProjectorSet | None = None) -> float:
    """Objective value for parameters ``t`` against a count record."""
    t = np.asarray(t, dtype=float)
    pset = pset or standard_projector_set()
    kets = _record_kets(counts, pset)
    return float(
        _kernels.nll_value(t, kets, counts.freqs.astype(float), float(counts.n_total))
    )


def linear_inversion(counts: CountRecord, pset: ProjectorSet | None = None) -> np.ndarray:
    """Direct linear estimate of the state (Hermitian, possibly not PSD)."""
    pset = pset or standard_projector_set()
    kets = _record_kets(counts, pset)
    basis = two_qubit_pauli_basis()
    design = np.einsum("ni,mij,nj->nm", kets.conj(), basis, kets).real
    coeff = np.linalg.solve(design, counts.freqs)
    return hermitize(np.einsum("m,mij->ij", coeff, basis))


def project_to_physical(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    w, v = np.linalg.eigh(hermitize(np.asarray(rho, dtype=np.complex128)))
    w = np.clip(w, 0.0, None)
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateParams("projection produced the zero matrix")
    return validate_density_matrix(hermitize((v * (w / total)) @ v.conj().T))


def ml_reconstruct(
    counts: CountRecord,
    config: OptimizerConfig | None = None,
    pset: ProjectorSet | None = None,
) -> ReconstructionResult:
    """Maximum-likelihood state estimate from a 16-projector count record.

    Deterministic for a given ``config.seed``.  Raises :class:`NotConverged`
    if no simplex start met the tolerances and polishing failed to stabilize.
    """
    config = config or OptimizerConfig()
    pset = pset or standard_projector_set()
    kets = _record_kets(counts, pset)
    freqs = counts.freqs.astype(float)
    n_total = float(counts.n_total)

    starts: list[np.ndarray] = []
    if config.warm_start:
        try:
            warm = project_to_physical(linear_inversion(counts, pset))
            starts.append(cholesky_from_density(warm))
        except (np.linalg.LinAlgError, DegenerateParams):
            pass
    rng = np.random.default_rng(config.seed)
    for _ in range(config.n_restarts):
        v = rng.standard_normal(16)
        starts.append(v / np.linalg.norm(v))
    if not starts:
        raise NotConverged("no usable starting points")

    best_x = None
    best_f = np.inf
    best_idx = -1
    any_converged = False
    total_evals = 0
    for idx, x0 in enumerate(starts):
        x, f, evals, conv = _kernels.nm_minimize_nll(
            np.asarray(x0, dtype=float),
            config.init_step,
            kets,
            freqs,
            n_total,
            config.max_evals,
            config.diameter_tol,
            config.spread_tol,
        )
        total_evals += int(evals)
        any_converged = any_converged or bool(conv)
        if f < best_f:
            best_x, best_f, best_idx = x, float(f), idx

    # Restarting from the solution must not improve it noticeably.
    stable = False
    for _ in range(config.polish_rounds):
        x, f, evals, _ = _kernels.nm_minimize_nll(
            best_x,
            config.polish_step,
            kets,
            freqs,
            n_total,
            config.max_evals,
            config.diameter_tol,
            config.spread_tol,
        )
        total_evals += int(evals)
        improvement = best_f - float(f)
        if f < best_f:
            best_x, best_f = x, float(f)
        if improvement < config.polish_tol:
            stable = True
            break
    if not (any_converged or stable):
        raise NotConverged(
            f"no start converged within {config.max_evals} evaluations x "
            f"{len(starts)} starts"
        )

    return ReconstructionResult(
        rho=rho_from_cholesky(best_x),
        final_loglike=best_f,
        iterations=total_evals,
        converged=bool(any_converged and stable),
        n_starts=len(starts),
        best_start=best_idx,
    )


def linear_singlequbit_tomo(freqs) -> np.ndarray:
    """Stokes reconstruction of one qubit from (f_H, f_V, f_D, f_L).

    f_H and f_V must come from one complete basis setting (their sum is
    renormalized away); the Bloch vector is projected back onto the unit
    ball if sampling noise pushes it outside.
    """
    f = np.asarray(freqs, dtype=float)
    if f.shape != (4,):
        raise ValueError(f"expected four frequencies (H, V, D, L), got shape {f.shape}")
    z_sum = f[0] + f[1]
    if not 0.95 <= z_sum <= 1.05:
        raise InconsistentConditionals(f"f_H + f_V = {z_sum:.6f} is not ~1")
    s = np.array([2.0 * f[2] - 1.0, 2.0 * f[3] - 1.0, (f[0] - f[1]) / z_sum])
    r = float(np.linalg.norm(s))
    if r > 1.0:
        s /= r
    rho = 0.5 * (
        IDENTITY_2 + s[0] * SIGMA_X + s[1] * SIGMA_Y + s[2] * SIGMA_Z
    )
    return validate_density_matrix(rho, dim=2)


def conditional_states_from_partial(
    record: PartialCountRecord,
) -> list[tuple[float, np.ndarray]]:
    """(probability, conditional state) pairs from partial-tomography counts.

    Outcome probabilities are the z-setting marginals (they sum to one by
    construction); the D and L settings share the acquisition budget, so
    their conditional frequencies are normalized by the same z-setting total.
    Outcomes with zero observed events are omitted.
    """
    counts = record.counts.astype(float)
    z_tot = counts[:, 0] + counts[:, 1]
    grand = float(z_tot.sum())
    if grand <= 0.0:
        raise InconsistentConditionals("partial record has no events in the z setting")
    pairs = []
    for k in range(2):
        if z_tot[k] <= 0.0:
            continue
        f = np.array(
            [
                counts[k, 0] / z_tot[k],
                counts[k, 1] / z_tot[k],
                counts[k, 2] / z_tot[k],
                counts[k, 3] / z_tot[k],
            ]
        )
        pairs.append((float(z_tot[k] / grand), linear_singlequbit_tomo(f)))
    return pairs
