"""State-comparison metrics and Monte Carlo uncertainty propagation.

Uncertainties follow the count-resampling recipe: counts are redrawn from
Poisson distributions whose means are the recorded values, the full pipeline
(reconstruction plus estimator) reruns on every resample, and the sample
standard deviation of the results is reported as the 1-sigma uncertainty.
Sample i derives its seed as ``rng_seed + i * seed_stride``, so runs are
reproducible and samples may be evaluated concurrently.

Fidelity uses the squared-overlap convention F = (Tr sqrt(sqrt(rho) sigma
sqrt(rho)))^2, which reduces to <psi|sigma|psi> for a pure reference; the
unsquared variant is available via ``root=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discord import (
    classical_correlations,
    discord_full,
    discord_partial,
    discord_xmodel,
    estimate_p,
)
from .errors import BadSpec, DimensionMismatch
from .measure import (
    CountRecord,
    PartialCountRecord,
    Z_AXIS,
    born_probabilities,
    exact_counts,
    resample_counts,
    resample_partial_counts,
    sample_counts,
    simulate_partial_counts,
)
from .qmat import clip_spectrum, hermitize, sqrt_psd, validate_density_matrix
from .states import StateSpec, parse_state_spec, purity_from_p
from .tomo import OptimizerConfig, conditional_states_from_partial, ml_reconstruct

QUANTITIES = (
    "purity",
    "fidelity-to",
    "discord-tt",
    "discord-pt",
    "discord-xmodel",
    "optimal-angle",
)


def purity(rho: np.ndarray) -> float:
    """Tr[rho^2], between 1/dim (maximally mixed) and 1 (pure)."""
    rho = validate_density_matrix(rho)
    return float(np.trace(rho @ rho).real)


def fidelity(rho: np.ndarray, sigma: np.ndarray, root: bool = False) -> float:
    """Uhlmann fidelity between two states of equal dimension.

    Returns the squared convention by default (1 iff the states coincide);
    ``root=True`` gives the unsquared Tr sqrt(sqrt(rho) sigma sqrt(rho)).
    """
    rho = validate_density_matrix(rho)
    sigma = validate_density_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(
            f"fidelity needs equal dimensions, got {rho.shape} and {sigma.shape}"
        )
    a = sqrt_psd(rho)
    w = clip_spectrum(np.linalg.eigvalsh(hermitize(a @ sigma @ a)))
    f_root = min(float(np.sum(np.sqrt(w))), 1.0)
    return f_root if root else f_root * f_root


@dataclass(frozen=True)
class UncertainValue:
    """Sample mean and 1-sigma sample standard deviation of a pipeline output."""

    mean: float
    std: float
    n_samples: int
    quantity_tag: str

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")
        if self.std < 0.0:
            raise ValueError(f"std must be >= 0, got {self.std}")

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "n_samples": self.n_samples,
            "quantity": self.quantity_tag,
        }


@dataclass(frozen=True)
class FDPoint:
    """One neighbour state in the fidelity-discord plane."""

    fidelity: float
    discord: float
    reference_tag: str


def _summarize(values, n_samples: int, tag: str) -> UncertainValue:
    arr = np.asarray(values, dtype=float)
    return UncertainValue(
        mean=float(arr.mean()),
        std=float(arr.std(ddof=1)),
        n_samples=n_samples,
        quantity_tag=tag,
    )


def _mc_inputs(
    base_counts: CountRecord,
    cond_counts: PartialCountRecord | None,
    i: int,
    rng_seed: int,
    seed_stride: int,
    resample: bool,
):
    gen = np.random.default_rng(rng_seed + i * seed_stride)
    if resample:
        rec = resample_counts(base_counts, gen)
        cond = None if cond_counts is None else resample_partial_counts(cond_counts, gen)
    else:
        rec, cond = base_counts, cond_counts
    return rec, cond, gen


def mc_uncertainty(
    base_counts: CountRecord,
    quantity: str,
    n_samples: int = 100,
    rng_seed: int = 0,
    *,
    target: np.ndarray | None = None,
    cond_counts: PartialCountRecord | None = None,
    family: str | None = None,
    kind: str | None = None,
    measured_party: str = "A",
    config: OptimizerConfig | None = None,
    combiner: str = "random",
    seed_stride: int = 1,
    resample: bool = True,
) -> UncertainValue:
    """Monte Carlo mean and standard deviation of a named pipeline quantity.

    ``quantity`` is one of ``purity``, ``fidelity-to`` (requires ``target``),
    ``discord-tt``, ``discord-pt`` (requires ``cond_counts``),
    ``discord-xmodel`` (requires ``family`` and ``kind``), or
    ``optimal-angle`` (the optimal theta, upper hemisphere).  Setting
    ``resample=False`` evaluates the pipeline on the base record itself
    (infinite-statistics check); ``seed_stride=0`` forces identical samples.
    """
    if quantity not in QUANTITIES:
        raise BadSpec(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if n_samples < 2:
        raise BadSpec(f"mc_uncertainty needs n_samples >= 2, got {n_samples}")
    if quantity == "fidelity-to" and target is None:
        raise BadSpec("quantity 'fidelity-to' requires a target state")
    if quantity == "discord-pt" and cond_counts is None:
        raise BadSpec("quantity 'discord-pt' requires partial-tomography counts")
    if quantity == "discord-xmodel" and (family is None or kind is None):
        raise BadSpec("quantity 'discord-xmodel' requires family and kind")

    values = []
    for i in range(n_samples):
        rec, cond, gen = _mc_inputs(base_counts, cond_counts, i, rng_seed, seed_stride, resample)
        if quantity == "discord-xmodel":
            values.append(discord_xmodel(rec, family, kind, rng=gen, combiner=combiner).discord)
            continue
        rho = ml_reconstruct(rec, config).rho
        if quantity == "purity":
            values.append(purity(rho))
        elif quantity == "fidelity-to":
            values.append(fidelity(rho, target))
        elif quantity == "discord-tt":
            values.append(discord_full(rho, measured_party).discord)
        elif quantity == "discord-pt":
            pairs = conditional_states_from_partial(cond)
            values.append(discord_partial(rho, cond.axis, pairs, measured_party).discord)
        elif quantity == "optimal-angle":
            _, axis = classical_correlations(rho, measured_party)
            values.append(axis.theta)
    return _summarize(values, n_samples, quantity)


def fd_scatter(
    reference: np.ndarray,
    base_counts: CountRecord,
    n_points: int = 500,
    rng_seed: int = 0,
    reference_tag: str = "",
    measured_party: str = "A",
    config: OptimizerConfig | None = None,
    resample: bool = True,
    fidelity_root: bool = False,
) -> list[FDPoint]:
    """Neighbour states in the fidelity-discord plane.

    Every point Poisson-resamples the base counts, reconstructs by maximum
    likelihood, and reports (F(state, reference), discord of the state).
    """
    reference = validate_density_matrix(reference, dim=4)
    if n_points < 1:
        raise BadSpec(f"fd_scatter needs n_points >= 1, got {n_points}")
    points = []
    for i in range(n_points):
        rec, _, _ = _mc_inputs(base_counts, None, i, rng_seed, 1, resample)
        rho = ml_reconstruct(rec, config).rho
        points.append(
            FDPoint(
                fidelity=fidelity(rho, reference, root=fidelity_root),
                discord=discord_full(rho, measured_party).discord,
                reference_tag=reference_tag,
            )
        )
    return points


@dataclass(frozen=True)
class MethodComparison:
    """One table row comparing the three discord estimators on one state."""

    label: str
    family: str
    kind: str
    mu_th: float
    tt: UncertainValue
    pt: UncertainValue
    x: UncertainValue
    n_total: int
    n_mc: int
    seed: int


def _resolve_family_spec(state_spec) -> StateSpec:
    spec = parse_state_spec(state_spec) if isinstance(state_spec, str) else state_spec
    if spec.family is None:
        if spec.label.startswith("bell"):
            # A Bell state is the p = 1 member of either family.
            return StateSpec(
                label=spec.label, rho=spec.rho, family="werner", kind=spec.kind, p=1.0, mu=1.0
            )
        raise BadSpec(
            f"state spec {spec.label!r} has no single-parameter family; "
            "use a werner/damped/bell spec"
        )
    return spec


def compare_methods(
    state_spec,
    n_total: int = 40_000,
    n_mc: int = 100,
    rng_seed: int = 0,
    exact_base: bool = True,
    config: OptimizerConfig | None = None,
    measured_party: str = "A",
    resample: bool = True,
) -> MethodComparison:
    """TT / PT / X-model discord estimates for one simulated experiment.

    The base record holds the expected counts of the target state (or one
    Poisson draw of them with ``exact_base=False``); partial-tomography
    counts for PT share the same acquisition budget.  The three methods use
    seed blocks ``rng_seed``, ``rng_seed + n_mc`` and ``rng_seed + 2 n_mc``.
    """
    spec = _resolve_family_spec(state_spec)
    probs = born_probabilities(spec.rho)
    if exact_base:
        base = exact_counts(probs, n_total)
        cond_base = simulate_partial_counts(spec.rho, n_total, Z_AXIS, None, measured_party)
    else:
        base = sample_counts(probs, n_total, rng_seed + 3 * n_mc)
        cond_base = simulate_partial_counts(
            spec.rho, n_total, Z_AXIS, rng_seed + 3 * n_mc + 1, measured_party
        )
    tt = mc_uncertainty(
        base, "discord-tt", n_mc, rng_seed,
        measured_party=measured_party, config=config, resample=resample,
    )
    pt = mc_uncertainty(
        base, "discord-pt", n_mc, rng_seed + n_mc,
        cond_counts=cond_base, measured_party=measured_party, config=config,
        resample=resample,
    )
    x = mc_uncertainty(
        base, "discord-xmodel", n_mc, rng_seed + 2 * n_mc,
        family=spec.family, kind=spec.kind, resample=resample,
    )
    return MethodComparison(
        label=spec.label,
        family=spec.family,
        kind=spec.kind,
        mu_th=float(spec.mu),
        tt=tt,
        pt=pt,
        x=x,
        n_total=n_total,
        n_mc=n_mc,
        seed=rng_seed,
    )


@dataclass(frozen=True)
class ModelMetrics:
    """Fidelity and purity of reconstructed states against the family model."""

    label: str
    family: str
    kind: str
    mu_th: float
    fidelity_to_model: UncertainValue
    purity_tomo: UncertainValue
    purity_xmodel: UncertainValue
    n_total: int
    n_mc: int
    seed: int


def model_metrics(
    state_spec,
    n_total: int = 40_000,
    n_mc: int = 100,
    rng_seed: int = 0,
    exact_base: bool = True,
    config: OptimizerConfig | None = None,
    resample: bool = True,
) -> ModelMetrics:
    """Per-state fidelity/purity study sharing one reconstruction per sample.

    ``purity_tomo`` is Tr[rho_hat^2] of the reconstructed state;
    ``purity_xmodel`` maps the fitted mixing parameter through the exact
    family purity relation.
    """
    spec = _resolve_family_spec(state_spec)
    probs = born_probabilities(spec.rho)
    if exact_base:
        base = exact_counts(probs, n_total)
    else:
        base = sample_counts(probs, n_total, rng_seed + 3 * n_mc)
    fids, mu_t, mu_x = [], [], []
    for i in range(n_mc):
        rec, _, gen = _mc_inputs(base, None, i, rng_seed, 1, resample)
        rho = ml_reconstruct(rec, config).rho
        fids.append(fidelity(rho, spec.rho))
        mu_t.append(purity(rho))
        p_hat = estimate_p(rec, spec.family, spec.kind, rng=gen)
        mu_x.append(purity_from_p(p_hat, spec.family))
    return ModelMetrics(
        label=spec.label,
        family=spec.family,
        kind=spec.kind,
        mu_th=float(spec.mu),
        fidelity_to_model=_summarize(fids, n_mc, "fidelity-to-model"),
        purity_tomo=_summarize(mu_t, n_mc, "purity-tomo"),
        purity_xmodel=_summarize(mu_x, n_mc, "purity-xmodel"),
        n_total=n_total,
        n_mc=n_mc,
        seed=rng_seed,
    )
