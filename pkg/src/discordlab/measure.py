"""Projective measurements, Born probabilities, and coincidence-count simulation.

The tomography projector set is the 16 product projectors |a><a| (x) |b><b|
with a, b drawn from H, V, D = (H+V)/sqrt2 and L = (H+iV)/sqrt2.  The fixed
ordering below puts the computational basis first (so the first four counts
sum to the run total N_T), the |DD> projector at slot 10 and |LL> at slot 16
(1-based); those two slots double as the coherence probes of the dephased
families, where they carry probability (1 +/- p)/4.

Counts are simulated as independent Poisson draws of the Born-rule means.
The sampler uses inversion by sequential search below mean 30 and a normal
approximation with continuity correction above, and is bit-reproducible for
a given seed; concurrent trials must use distinct seeds
(seed = base_seed + trial_index).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSpec, ConditionalOnNullEvent
from .qmat import validate_density_matrix
from .states import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z

_SQRT_HALF = 1.0 / math.sqrt(2.0)

SINGLE_QUBIT_KETS = {
    "H": np.array([1.0, 0.0], dtype=np.complex128),
    "V": np.array([0.0, 1.0], dtype=np.complex128),
    "D": np.array([_SQRT_HALF, _SQRT_HALF], dtype=np.complex128),
    "L": np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=np.complex128),
}

# Fixed projector ordering (1-based slots 1..16 in comments).
PROJECTOR_ORDER = (
    "HH", "HV", "VH", "VV",          # 1-4: computational basis
    "HD", "HL", "VD", "VL",          # 5-8
    "DH", "DD", "DV", "DL",          # 9-12, DD at slot 10
    "LH", "LV", "LD", "LL",          # 13-16, LL at slot 16
)

PARTIAL_BASIS = ("H", "V", "D", "L")


@dataclass(frozen=True)
class ProjectorSet:
    """Sixteen labelled rank-1 product projectors.

    ``kets`` holds the two-qubit state vectors as rows (in label order);
    ``projectors`` the corresponding 4x4 rank-1 matrices.
    """

    labels: tuple[str, ...]
    kets: np.ndarray
    projectors: np.ndarray

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise BadSpec(f"unknown projector label {label!r}") from exc


def _product_ket(label: str) -> np.ndarray:
    a, b = label[0], label[1]
    return np.kron(SINGLE_QUBIT_KETS[a], SINGLE_QUBIT_KETS[b])


_STANDARD_SET: ProjectorSet | None = None


def standard_projector_set() -> ProjectorSet:
    """The informationally complete product set in the fixed order above."""
    global _STANDARD_SET
    if _STANDARD_SET is None:
        kets = np.array([_product_ket(lbl) for lbl in PROJECTOR_ORDER])
        projs = np.array([np.outer(k, k.conj()) for k in kets])
        _STANDARD_SET = ProjectorSet(labels=PROJECTOR_ORDER, kets=kets, projectors=projs)
    return _STANDARD_SET


PAULI_1Q = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)


def two_qubit_pauli_basis() -> np.ndarray:
    """The 16 Hermitian products sigma_i (x) sigma_j, index m = 4i + j."""
    return np.array([np.kron(a, b) for a in PAULI_1Q for b in PAULI_1Q])


def design_matrix(pset: ProjectorSet | None = None) -> np.ndarray:
    """Real 16x16 matrix of projector overlaps with the Pauli basis.

    Row nu maps the Pauli expansion coefficients of rho to the probability
    p_nu; full rank is equivalent to informational completeness of the set.
    """
    pset = pset or standard_projector_set()
    basis = two_qubit_pauli_basis()
    m = np.einsum("nij,mji->nm", pset.projectors, basis)
    return np.ascontiguousarray(m.real)


def born_probabilities(rho: np.ndarray, pset: ProjectorSet | None = None) -> np.ndarray:
    """Born-rule probabilities p_nu = <psi_nu| rho |psi_nu> for the set."""
    rho = validate_density_matrix(rho, dim=4)
    pset = pset or standard_projector_set()
    p = np.einsum("ni,ij,nj->n", pset.kets.conj(), rho, pset.kets).real
    return np.clip(p, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Poisson count simulation
# ---------------------------------------------------------------------------

def poisson_sample(lam: float, rng: np.random.Generator) -> int:
    """One Poisson draw: sequential-search inversion for lam < 30, normal
    approximation with continuity correction otherwise."""
    if lam <= 0.0:
        return 0
    if lam < 30.0:
        u = rng.random()
        p = math.exp(-lam)
        cdf = p
        k = 0
        while u > cdf and k < 400:
            k += 1
            p *= lam / k
            cdf += p
        return k
    z = rng.standard_normal()
    return max(0, int(math.floor(lam + math.sqrt(lam) * z + 0.5)))


def poisson_counts(means, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson draws for an array of means."""
    means = np.asarray(means, dtype=float)
    out = np.empty(means.shape, dtype=np.int64)
    flat = means.ravel()
    oflat = out.ravel()
    for i in range(flat.size):
        oflat[i] = poisson_sample(float(flat[i]), rng)
    return out


@dataclass(frozen=True)
class CountRecord:
    """Simulated or ingested coincidence counts for the 16 projectors.

    ``n_total`` is the run total N_T, the sum of the four computational-basis
    counts; ``seed`` records the RNG seed used (None for exact counts or
    external data).
    """

    labels: tuple[str, ...]
    counts: np.ndarray
    n_total: int
    seed: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != counts.size:
            raise BadSpec(
                f"count record has {len(self.labels)} labels but {counts.size} counts"
            )
        if counts.min(initial=0) < 0:
            raise BadSpec("count record contains negative counts")
        basis = ("HH", "HV", "VH", "VV")
        if all(lbl in self.labels for lbl in basis):
            total = int(sum(int(counts[self.labels.index(lbl)]) for lbl in basis))
            if total != int(self.n_total):
                raise BadSpec(
                    f"n_total={self.n_total} inconsistent with basis counts sum {total}"
                )

    @property
    def freqs(self) -> np.ndarray:
        return self.counts / float(self.n_total)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "counts": [int(c) for c in self.counts],
            "n_total": int(self.n_total),
            "seed": None if self.seed is None else int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CountRecord":
        for key in ("labels", "counts", "n_total"):
            if key not in data:
                raise BadSpec(f"count-record JSON missing field '{key}'")
        return cls(
            labels=tuple(data["labels"]),
            counts=np.asarray(data["counts"], dtype=np.int64),
            n_total=int(data["n_total"]),
            seed=data.get("seed"),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CountRecord":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _basis_total(labels, counts) -> int:
    labels = tuple(labels)
    if all(lbl in labels for lbl in ("HH", "HV", "VH", "VV")):
        return int(sum(int(counts[labels.index(lbl)]) for lbl in ("HH", "HV", "VH", "VV")))
    return int(np.sum(counts))


def sample_counts(probs, n_total: int, rng_seed, labels=PROJECTOR_ORDER) -> CountRecord:
    """Draw n_nu ~ Poisson(n_total * p_nu) independently for each projector."""
    if n_total <= 0:
        raise BadSpec(f"n_total must be positive, got {n_total}")
    probs = np.asarray(probs, dtype=float)
    rng = np.random.default_rng(rng_seed)
    counts = poisson_counts(n_total * probs, rng)
    seed = int(rng_seed) if isinstance(rng_seed, (int, np.integer)) else None
    return CountRecord(
        labels=labels, counts=counts, n_total=_basis_total(labels, counts), seed=seed
    )


def exact_counts(probs, n_total: int, labels=PROJECTOR_ORDER) -> CountRecord:
    """Noiseless counts n_nu = round(n_total * p_nu)."""
    if n_total <= 0:
        raise BadSpec(f"n_total must be positive, got {n_total}")
    probs = np.asarray(probs, dtype=float)
    counts = np.rint(n_total * probs).astype(np.int64)
    return CountRecord(
        labels=labels, counts=counts, n_total=_basis_total(labels, counts), seed=None
    )


def resample_counts(record: CountRecord, rng) -> CountRecord:
    """Poisson resample with means equal to the recorded counts."""
    rng = np.random.default_rng(rng)
    counts = poisson_counts(record.counts.astype(float), rng)
    return CountRecord(
        labels=record.labels,
        counts=counts,
        n_total=_basis_total(record.labels, counts),
        seed=None,
    )


# ---------------------------------------------------------------------------
# Parameterized single-qubit measurements and conditional states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementAxis:
    """Bloch-sphere measurement axis n = (sin t cos f, sin t sin f, cos t).

    theta = 0 is the z axis (H/V measurement).  ``degenerate`` marks axes
    from an optimization whose objective was flat across the search grid
    (the optimum is then ill-defined and reported by scan-order convention).
    """

    theta: float
    phi: float
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi={self.phi} outside [0, 2*pi)")

    def to_dict(self) -> dict:
        return {"theta": self.theta, "phi": self.phi, "degenerate": self.degenerate}


Z_AXIS = MeasurementAxis(0.0, 0.0)


def canonical_axis(theta: float, phi: float, hemisphere: bool = False) -> tuple[float, float]:
    """Map arbitrary angles onto theta in [0, pi], phi in [0, 2 pi).

    With ``hemisphere=True`` the axis is further folded onto theta <= pi/2
    using n ~ -n (the projector pair is unordered).
    """
    st = math.sin(theta)
    n = np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])
    if hemisphere and n[2] < 0.0:
        n = -n
    t = math.acos(max(-1.0, min(1.0, n[2])))
    f = math.atan2(n[1], n[0]) % (2.0 * math.pi)
    if f >= 2.0 * math.pi:  # roundoff from the modulo
        f = 0.0
    return t, f


def axis_kets(axis: MeasurementAxis) -> np.ndarray:
    """Rows are the eigenvectors of n . sigma for outcomes 0 (+n) and 1 (-n)."""
    ch = math.cos(0.5 * axis.theta)
    sh = math.sin(0.5 * axis.theta)
    e = complex(math.cos(axis.phi), math.sin(axis.phi))
    return np.array([[ch, sh * e], [sh, -ch * e]], dtype=np.complex128)


def axis_projectors(axis: MeasurementAxis) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal rank-1 projector pair (P0, P1) with P0 + P1 = I."""
    k = axis_kets(axis)
    return np.outer(k[0], k[0].conj()), np.outer(k[1], k[1].conj())


def conditional_state(
    rho: np.ndarray,
    axis: MeasurementAxis,
    outcome: int,
    measured_party: str = "A",
) -> tuple[float, np.ndarray]:
    """Outcome probability and conditional state of the unmeasured qubit.

    Raises :class:`ConditionalOnNullEvent` when the outcome probability is
    below 1e-12.
    """
    rho = validate_density_matrix(rho, dim=4)
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    v = axis_kets(axis)[outcome]
    r = rho.reshape(2, 2, 2, 2)
    if measured_party == "A":
        cond = np.einsum("a,c,aicj->ij", v.conj(), v, r)
    elif measured_party == "B":
        cond = np.einsum("b,d,ibjd->ij", v.conj(), v, r)
    else:
        raise ValueError(f"measured_party must be 'A' or 'B', got {measured_party!r}")
    p = float(np.trace(cond).real)
    if p <= 1e-12:
        raise ConditionalOnNullEvent(
            f"outcome {outcome} on party {measured_party} has probability {p:.3e}"
        )
    return p, validate_density_matrix(cond / p, dim=2)


# ---------------------------------------------------------------------------
# Partial (conditional single-qubit) tomography counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialCountRecord:
    """Coincidence counts for the joint projectors P_k (x) |b><b|.

    One axis measurement on ``measured_party`` (outcomes k = 0, 1) against
    the four tomography projectors b in H, V, D, L on the partner qubit; the
    acquisition budget ``n_total`` is split evenly over the four b settings.
    ``counts[k, j]`` is the count for outcome k with basis ``PARTIAL_BASIS[j]``.
    """

    theta: float
    phi: float
    counts: np.ndarray
    n_total: int
    measured_party: str = "A"
    seed: int | None = None
    basis_labels: tuple[str, ...] = PARTIAL_BASIS

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (2, len(self.basis_labels)):
            raise BadSpec(f"partial counts must have shape (2, 4), got {counts.shape}")
        if counts.min(initial=0) < 0:
            raise BadSpec("partial count record contains negative counts")

    @property
    def axis(self) -> MeasurementAxis:
        return MeasurementAxis(self.theta, self.phi)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "phi": self.phi,
            "measured_party": self.measured_party,
            "basis_labels": list(self.basis_labels),
            "counts": [[int(c) for c in row] for row in self.counts],
            "n_total": int(self.n_total),
            "seed": None if self.seed is None else int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PartialCountRecord":
        for key in ("theta", "phi", "counts", "n_total"):
            if key not in data:
                raise BadSpec(f"partial-count JSON missing field '{key}'")
        return cls(
            theta=float(data["theta"]),
            phi=float(data["phi"]),
            counts=np.asarray(data["counts"], dtype=np.int64),
            n_total=int(data["n_total"]),
            measured_party=data.get("measured_party", "A"),
            seed=data.get("seed"),
            basis_labels=tuple(data.get("basis_labels", PARTIAL_BASIS)),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PartialCountRecord":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def resample_partial_counts(record: PartialCountRecord, rng) -> PartialCountRecord:
    """Poisson resample of a partial-tomography record around its counts."""
    rng = np.random.default_rng(rng)
    counts = poisson_counts(record.counts.astype(float), rng)
    return PartialCountRecord(
        theta=record.theta,
        phi=record.phi,
        counts=counts,
        n_total=record.n_total,
        measured_party=record.measured_party,
        seed=None,
        basis_labels=record.basis_labels,
    )


def partial_count_means(
    rho: np.ndarray,
    n_total: int,
    axis: MeasurementAxis = Z_AXIS,
    measured_party: str = "A",
) -> np.ndarray:
    """Expected counts (2, 4) for the joint partial-tomography projectors."""
    rho = validate_density_matrix(rho, dim=4)
    kets = axis_kets(axis)
    per_setting = n_total / 4.0
    means = np.empty((2, 4))
    for k in range(2):
        for j, b in enumerate(PARTIAL_BASIS):
            if measured_party == "A":
                joint = np.kron(kets[k], SINGLE_QUBIT_KETS[b])
            else:
                joint = np.kron(SINGLE_QUBIT_KETS[b], kets[k])
            p = float(np.real(joint.conj() @ rho @ joint))
            means[k, j] = per_setting * max(p, 0.0)
    return means


def simulate_partial_counts(
    rho: np.ndarray,
    n_total: int,
    axis: MeasurementAxis = Z_AXIS,
    rng_seed=None,
    measured_party: str = "A",
) -> PartialCountRecord:
    """Partial-tomography counts; exact (rounded means) when rng_seed is None."""
    means = partial_count_means(rho, n_total, axis, measured_party)
    if rng_seed is None:
        counts = np.rint(means).astype(np.int64)
        seed = None
    else:
        rng = np.random.default_rng(rng_seed)
        counts = poisson_counts(means, rng)
        seed = int(rng_seed) if isinstance(rng_seed, (int, np.integer)) else None
    return PartialCountRecord(
        theta=axis.theta,
        phi=axis.phi,
        counts=counts,
        n_total=int(n_total),
        measured_party=measured_party,
        seed=seed,
    )
