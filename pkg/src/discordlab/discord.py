"""Entropic correlation measures and the three discord estimators.

For a bipartite state the total correlations are the quantum mutual
information I = S(rho_A) + S(rho_B) - S(rho); the classical correlations
J_A = S(rho_B) - min over projective measurements of sum_k p_k S(rho_B|k);
and the entropic discord is D = I - J (all in bits).  Three estimators are
provided:

* ``discord_full`` (method TT): numerical minimization over all projective
  axes, assuming nothing about the state.
* ``discord_partial`` (method PT): no minimization; the conditional states
  come from partial tomography at a fixed axis (the z axis is exactly
  optimal for the depolarized and dephased Bell families).
* ``discord_xmodel`` (method XModel): a single mixing parameter p is fitted
  from designated coincidence counts and pushed through the closed-form
  discord of the assumed family.

The closed forms (base-2 logs, 0 log 0 := 0):

* depolarized: D = 1/4 [3(1-p) lg(1-p) + (1+3p) lg(1+3p)]
               - 1/2 [(1-p) lg(1-p) + (1+p) lg(1+p)]
* dephased:    D = 1/2 [(1-p) lg(1-p) + (1+p) lg(1+p)]

Count-to-p relations used by the X-model estimator (probabilities of the
designated projectors, with N_T the computational-basis total):

* depolarized phi family: p(HH) = p(VV) = (1+p)/4, p(HV) = p(VH) = (1-p)/4;
  the psi family swaps the signs.
* dephased family: p(DD) = (1+p)/4 for both kinds; p(LL) = (1-p)/4 for the
  phi family and (1+p)/4 for the psi family (within the H/V/D/L product
  set those are the only coherence-sensitive projectors).

Each relation inverts to one estimate of p; the randomized estimator draws
one relation uniformly (seeded), clips to [0, 1], and is deterministic for
a given seed.  A mean combiner is available for bias studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import MinimizationError, InconsistentConditionals, MissingProjectors, OutOfRange
from .measure import (
    CountRecord,
    MeasurementAxis,
    canonical_axis,
    resample_counts,
)
from .qmat import clip_spectrum, hermitize, partial_trace, validate_density_matrix
from .tomo import OptimizerConfig, ml_reconstruct

# Coarse search grid for the measurement optimization; the best grid points
# seed a simplex refinement with 1e-9 tolerance on the objective.
_GRID_THETAS = np.linspace(0.0, np.pi, 32)
_GRID_PHIS = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
_GRID_FLAT_TOL = 1e-9
_AXIS_STEP = 0.06
_AXIS_MAX_EVALS = 600

# Clamping policy: discord in [-1e-6, 0) reports as 0 (with a diagnostic
# flag); anything more negative means the minimization is broken.
NEGATIVE_DISCORD_TOL = -1e-6


def _xlog2(x: float) -> float:
    return x * math.log2(x) if x > 0.0 else 0.0


@dataclass(frozen=True)
class DiscordEstimate:
    """A discord value with its decomposition and provenance.

    ``discord = mutual_info - classical_corr`` holds exactly for the
    tomographic methods; ``clamped`` marks results where a small negative
    value was clipped to zero.  ``optimal_axis`` is the minimizing
    measurement (absent for the X-model); ``fitted_p`` the mixing parameter
    (X-model only).
    """

    discord: float
    mutual_info: float
    classical_corr: float
    method: str
    optimal_axis: MeasurementAxis | None = None
    fitted_p: float | None = None
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "discord": self.discord,
            "mutual_info": self.mutual_info,
            "classical_corr": self.classical_corr,
            "method": self.method,
            "optimal_axis": None if self.optimal_axis is None else self.optimal_axis.to_dict(),
            "fitted_p": self.fitted_p,
            "clamped": self.clamped,
        }


def entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits, with roundoff-negative eigenvalues clipped."""
    rho = validate_density_matrix(rho)
    w = clip_spectrum(np.linalg.eigvalsh(hermitize(rho)))
    s = -sum(_xlog2(float(x)) for x in w)
    return max(s, 0.0)


def mutual_information(rho: np.ndarray) -> float:
    """I = S(rho_A) + S(rho_B) - S(rho) in bits."""
    rho = validate_density_matrix(rho, dim=4)
    return entropy(partial_trace(rho, "A")) + entropy(partial_trace(rho, "B")) - entropy(rho)


def _optimize_axis(rho: np.ndarray, measured_party: str) -> tuple[float, float, float, bool]:
    """Minimize the average conditional entropy over projective axes.

    Returns (objective, theta, phi, degenerate) with the axis folded onto
    the upper hemisphere (theta <= pi/2; the projector pair is unordered).
    Grid ties break toward the first minimizer in scan order (theta outer,
    phi inner); a grid variation below 1e-9 marks the optimum as degenerate
    and skips refinement.
    """
    if measured_party not in ("A", "B"):
        raise ValueError(f"measured_party must be 'A' or 'B', got {measured_party!r}")
    measure_b = measured_party == "B"
    rho_c = np.ascontiguousarray(rho, dtype=np.complex128)
    grid = _kernels.conditional_entropy_grid(rho_c, _GRID_THETAS, _GRID_PHIS, measure_b)
    flat = np.asarray(grid).ravel()
    i_best = int(np.argmin(flat))
    degenerate = bool(flat.max() - flat.min() < _GRID_FLAT_TOL)
    best_f = float(flat[i_best])
    best_t = float(_GRID_THETAS[i_best // len(_GRID_PHIS)])
    best_p = float(_GRID_PHIS[i_best % len(_GRID_PHIS)])
    if not degenerate:
        for idx in np.argsort(flat, kind="stable")[:3]:
            t0 = float(_GRID_THETAS[idx // len(_GRID_PHIS)])
            p0 = float(_GRID_PHIS[idx % len(_GRID_PHIS)])
            t, p, f, _, _ = _kernels.nm_minimize_axis(
                rho_c, t0, p0, _AXIS_STEP, measure_b, _AXIS_MAX_EVALS, 1e-9, 1e-9
            )
            if f < best_f:
                best_f, best_t, best_p = float(f), float(t), float(p)
    theta, phi = canonical_axis(best_t, best_p, hemisphere=True)
    return best_f, theta, phi, degenerate


def classical_correlations(
    rho: np.ndarray, measured_party: str = "A"
) -> tuple[float, MeasurementAxis]:
    """Classical correlations J and the minimizing measurement axis.

    J = S(rho_other) - min_axis sum_k p_k S(rho_other|k), measuring
    ``measured_party`` and conditioning the partner qubit.
    """
    rho = validate_density_matrix(rho, dim=4)
    other = "B" if measured_party == "A" else "A"
    s_other = entropy(partial_trace(rho, other))
    obj, theta, phi, degenerate = _optimize_axis(rho, measured_party)
    j = max(s_other - obj, 0.0)
    return j, MeasurementAxis(theta, phi, degenerate=degenerate)


def _clamped_estimate(i: float, j: float, method: str, **kwargs) -> DiscordEstimate:
    """Assemble an estimate, applying the negative-discord clamping policy."""
    j = max(j, 0.0)
    d = i - j
    clamped = False
    if d < 0.0:
        if d < NEGATIVE_DISCORD_TOL:
            raise MinimizationError(
                f"discord {d:.3e} below {NEGATIVE_DISCORD_TOL:.1e}; "
                "measurement minimization looks broken"
            )
        d, j, clamped = 0.0, i, True
    return DiscordEstimate(
        discord=d, mutual_info=i, classical_corr=j, method=method, clamped=clamped, **kwargs
    )


def discord_full(rho: np.ndarray, measured_party: str = "A") -> DiscordEstimate:
    """Discord from the state alone, minimizing over all projective axes (TT)."""
    rho = validate_density_matrix(rho, dim=4)
    i = mutual_information(rho)
    j, axis = classical_correlations(rho, measured_party)
    return _clamped_estimate(i, j, "TT", optimal_axis=axis)


def discord_partial(
    rho_full: np.ndarray,
    axis: MeasurementAxis,
    cond_states: list[tuple[float, np.ndarray]],
    measured_party: str = "A",
) -> DiscordEstimate:
    """Discord with externally supplied conditional states (PT).

    The mutual information and the partner marginal come from ``rho_full``
    (the full reconstruction); the average conditional entropy comes from
    the (probability, state) pairs measured at the designated ``axis`` with
    no minimization.
    """
    rho_full = validate_density_matrix(rho_full, dim=4)
    if not cond_states:
        raise InconsistentConditionals("no conditional states supplied")
    total_p = float(sum(p for p, _ in cond_states))
    if abs(total_p - 1.0) > 1e-6:
        raise InconsistentConditionals(
            f"conditional probabilities sum to {total_p:.8f}, expected 1"
        )
    other = "B" if measured_party == "A" else "A"
    s_other = entropy(partial_trace(rho_full, other))
    avg = sum(p * entropy(validate_density_matrix(c, dim=2)) for p, c in cond_states)
    i = mutual_information(rho_full)
    return _clamped_estimate(i, s_other - avg, "PT", optimal_axis=axis)


def discord_analytic_werner(p: float) -> float:
    """Closed-form discord of the depolarized Bell family (bits)."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p={p} outside [0, 1]")
    return 0.25 * (3.0 * _xlog2(1.0 - p) + _xlog2(1.0 + 3.0 * p)) - 0.5 * (
        _xlog2(1.0 - p) + _xlog2(1.0 + p)
    )


def discord_analytic_damped(p: float) -> float:
    """Closed-form discord of the dephased Bell family (bits)."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p={p} outside [0, 1]")
    return 0.5 * (_xlog2(1.0 - p) + _xlog2(1.0 + p))


def _binary_entropy(x: float) -> float:
    return -_xlog2(x) - _xlog2(1.0 - x)


def xmodel_information(family: str, p: float) -> tuple[float, float]:
    """Closed-form (I, J) for a family member with mixing parameter p."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p={p} outside [0, 1]")
    if family == "werner":
        s = -(
            _xlog2((1.0 + 3.0 * p) / 4.0) + 3.0 * _xlog2((1.0 - p) / 4.0)
        )
        return 2.0 - s, 1.0 - _binary_entropy((1.0 + p) / 2.0)
    if family == "damped":
        return 2.0 - _binary_entropy((1.0 + p) / 2.0), 1.0
    raise ValueError(f"family must be 'werner' or 'damped', got {family!r}")


# Designated projector labels and relation signs: probability (1 + s*p)/4.
_RELATION_SIGNS = {
    ("werner", "phi"): (("HH", +1), ("HV", -1), ("VH", -1), ("VV", +1)),
    ("werner", "psi"): (("HH", -1), ("HV", +1), ("VH", +1), ("VV", -1)),
    ("damped", "phi"): (("DD", +1), ("LL", -1)),
    ("damped", "psi"): (("DD", +1), ("LL", +1)),
}


def estimate_p(
    counts: CountRecord,
    family: str,
    kind: str,
    rng=0,
    combiner: str = "random",
) -> float:
    """Randomized single-parameter estimate of the mixing parameter p.

    Each designated projector gives one estimate via (1 + s*p)/4 = n/N_T;
    ``combiner="random"`` draws one uniformly (the default), ``"mean"``
    averages all of them.  The result is clipped to [0, 1] and deterministic
    for a given seed.
    """
    key = (family, kind)
    if key not in _RELATION_SIGNS:
        raise ValueError(f"unsupported family/kind combination {key!r}")
    relations = _RELATION_SIGNS[key]
    missing = [lbl for lbl, _ in relations if lbl not in counts.labels]
    if missing:
        raise MissingProjectors(f"count record lacks projectors {missing}")
    n_total = float(counts.n_total)
    estimates = []
    for lbl, sign in relations:
        n = float(counts.counts[counts.labels.index(lbl)])
        estimates.append(sign * (4.0 * n / n_total - 1.0))
    if combiner == "random":
        gen = np.random.default_rng(rng)
        value = estimates[int(gen.integers(len(estimates)))]
    elif combiner == "mean":
        value = float(np.mean(estimates))
    else:
        raise ValueError(f"combiner must be 'random' or 'mean', got {combiner!r}")
    return float(min(max(value, 0.0), 1.0))


def discord_xmodel(
    counts: CountRecord,
    family: str,
    kind: str,
    rng=0,
    combiner: str = "random",
) -> DiscordEstimate:
    """Discord from the fitted single-parameter family model (XModel)."""
    p = estimate_p(counts, family, kind, rng=rng, combiner=combiner)
    if family == "werner":
        d = discord_analytic_werner(p)
    else:
        d = discord_analytic_damped(p)
    i, j = xmodel_information(family, p)
    return DiscordEstimate(
        discord=d,
        mutual_info=i,
        classical_corr=j,
        method="XModel",
        optimal_axis=None,
        fitted_p=p,
    )


def optimal_angle_distribution(
    counts: CountRecord,
    n_samples: int = 900,
    rng_seed: int = 0,
    measured_party: str = "A",
    config: OptimizerConfig | None = None,
) -> list[MeasurementAxis]:
    """Distribution of optimal measurement axes under count resampling.

    Each sample Poisson-resamples the record, reconstructs by maximum
    likelihood, and reports the axis minimizing the conditional entropy,
    folded onto the upper hemisphere.  Flat landscapes (within 1e-9 across
    the grid) are flagged degenerate.  Sample i uses seed ``rng_seed + i``.
    """
    axes = []
    for i in range(n_samples):
        rng = np.random.default_rng(rng_seed + i)
        rec = resample_counts(counts, rng)
        result = ml_reconstruct(rec, config)
        _, theta, phi, degenerate = _optimize_axis(result.rho, measured_party)
        axes.append(MeasurementAxis(theta, phi, degenerate=degenerate))
    return axes
