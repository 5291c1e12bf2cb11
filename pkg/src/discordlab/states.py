"""Factories for the two-qubit state families and purity conversions.

Families
--------
* ``bell``: maximally entangled |Phi+> = (|HH>+|VV>)/sqrt2 or
  |Psi+> = (|HV>+|VH>)/sqrt2.
* ``werner``: depolarized Bell state ``p |B><B| + (1-p) I/4`` with purity
  ``mu = (1 + 3 p^2) / 4``.
* ``phase_damped``: Bell state whose off-diagonal coherence is scaled by
  ``p`` (the diagonal is untouched); purity ``mu = (1 + p^2) / 2``.
* ``x_state``: ``(I + c1 XX + c2 YY + c3 ZZ) / 4`` with Pauli products
  ``XX = sigma_x kron sigma_x`` etc.

Sign convention for the correlation coefficients (c1, c2, c3) = (cx, cy, cz):

=========  ======  ==================
family     kind    (c1, c2, c3)
=========  ======  ==================
werner     phi     (p, -p,  p)
damped     phi     (p, -p,  1)
werner     psi     (p,  p, -p)
damped     psi     (p,  p, -1)
=========  ======  ==================

so ``x_state(p, -p, p) == werner(p, "phi")`` and
``x_state(p, -p, 1) == phase_damped(p, "phi")`` hold entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import BadSpec, NotPSD, OutOfRange
from .qmat import validate_density_matrix

BELL_KINDS = ("phi", "psi")
FAMILIES = ("werner", "damped")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


def _check_kind(kind: str) -> str:
    if kind not in BELL_KINDS:
        raise ValueError(f"kind must be one of {BELL_KINDS}, got {kind!r}")
    return kind


def _check_family(family: str) -> str:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    return family


def bell_ket(kind: str = "phi") -> np.ndarray:
    """State vector of the requested Bell state."""
    _check_kind(kind)
    if kind == "phi":
        return np.array([1, 0, 0, 1], dtype=np.complex128) / sqrt(2.0)
    return np.array([0, 1, 1, 0], dtype=np.complex128) / sqrt(2.0)


def bell(kind: str = "phi") -> np.ndarray:
    """Density matrix of a Bell state (rank 1, purity 1)."""
    k = bell_ket(kind)
    return np.outer(k, k.conj())


def source_state(theta: float, phi: float) -> np.ndarray:
    """Pure state cos(theta)|HH> + e^{i phi} sin(theta)|VV> as a density matrix."""
    k = np.array(
        [np.cos(theta), 0.0, 0.0, np.exp(1j * phi) * np.sin(theta)], dtype=np.complex128
    )
    return np.outer(k, k.conj())


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"mixing parameter p={p} outside [0, 1]")
    return p


def werner(p: float, kind: str = "phi") -> np.ndarray:
    """Depolarized Bell state ``p |B><B| + (1-p) I/4``."""
    p = _check_p(p)
    return p * bell(kind) + (1.0 - p) * np.eye(4, dtype=np.complex128) / 4.0


def phase_damped(p: float, kind: str = "phi") -> np.ndarray:
    """Bell state with off-diagonal coherence scaled by ``p``.

    Equivalent to mixing the Bell state with its fully dephased version
    (projection onto the computational-basis diagonal) with weight ``1-p``.
    """
    p = _check_p(p)
    b = bell(kind)
    return p * b + (1.0 - p) * np.diag(np.diag(b))


def x_state(c1: float, c2: float, c3: float) -> np.ndarray:
    """State ``(I + c1 XX + c2 YY + c3 ZZ)/4``; raises NotPSD if unphysical."""
    rho = 0.25 * (
        np.eye(4, dtype=np.complex128)
        + c1 * np.kron(SIGMA_X, SIGMA_X)
        + c2 * np.kron(SIGMA_Y, SIGMA_Y)
        + c3 * np.kron(SIGMA_Z, SIGMA_Z)
    )
    return validate_density_matrix(rho, dim=4)


def x_coeffs(family: str, kind: str, p: float) -> tuple[float, float, float]:
    """(c1, c2, c3) reproducing the given family member (see module table)."""
    _check_family(family)
    _check_kind(kind)
    p = _check_p(p)
    if kind == "phi":
        return (p, -p, p) if family == "werner" else (p, -p, 1.0)
    return (p, p, -p) if family == "werner" else (p, p, -1.0)


def purity_from_p(p: float, family: str) -> float:
    """Purity Tr[rho^2] of a family member with mixing parameter ``p``."""
    p = _check_p(p)
    _check_family(family)
    if family == "werner":
        return (1.0 + 3.0 * p * p) / 4.0
    return (1.0 + p * p) / 2.0


def purity_to_p(mu: float, family: str) -> float:
    """Invert the purity relation, returning the non-negative root.

    Werner states require ``mu`` in [1/4, 1]; phase-damped states require
    ``mu`` in [1/2, 1].
    """
    mu = float(mu)
    _check_family(family)
    lo = 0.25 if family == "werner" else 0.5
    # Tiny slack so exact boundary values survive float parsing.
    if mu < lo - 1e-12 or mu > 1.0 + 1e-12:
        raise OutOfRange(f"purity {mu} outside [{lo}, 1] for family {family!r}")
    mu = min(max(mu, lo), 1.0)
    if family == "werner":
        return sqrt((4.0 * mu - 1.0) / 3.0)
    return sqrt(2.0 * mu - 1.0)


# ---------------------------------------------------------------------------
# CLI state specification strings:
#   werner:phi:0.83   damped:psi:0.66   bell:phi   x:0.5,-0.5,1.0
# The numeric suffix of the named families is the purity mu; fractions like
# 2/3 are accepted to express exact rationals.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpec:
    """Parsed state specification: target state plus family metadata."""

    label: str
    rho: np.ndarray
    family: str | None = None
    kind: str | None = None
    p: float | None = None
    mu: float | None = None


def _parse_number(text: str) -> float:
    try:
        if "/" in text:
            num, den = text.split("/")
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise BadSpec(f"cannot parse number {text!r} in state spec") from exc


def parse_state_spec(text: str) -> StateSpec:
    """Parse a state specification string (see module docstring)."""
    parts = text.strip().lower().split(":")
    name = parts[0]
    try:
        if name == "bell":
            if len(parts) != 2 or parts[1] not in BELL_KINDS:
                raise BadSpec(f"bell spec must be 'bell:phi' or 'bell:psi', got {text!r}")
            kind = parts[1]
            return StateSpec(label=text.strip(), rho=bell(kind), kind=kind, p=1.0, mu=1.0)
        if name in ("werner", "damped"):
            if len(parts) != 3 or parts[1] not in BELL_KINDS:
                raise BadSpec(
                    f"{name} spec must look like '{name}:phi:0.83' "
                    f"(kind then purity), got {text!r}"
                )
            kind = parts[1]
            mu = _parse_number(parts[2])
            p = purity_to_p(mu, name)
            rho = werner(p, kind) if name == "werner" else phase_damped(p, kind)
            return StateSpec(label=text.strip(), rho=rho, family=name, kind=kind, p=p, mu=mu)
        if name == "x":
            if len(parts) != 2:
                raise BadSpec(f"x spec must look like 'x:c1,c2,c3', got {text!r}")
            coeffs = [_parse_number(c) for c in parts[1].split(",")]
            if len(coeffs) != 3:
                raise BadSpec(f"x spec needs exactly three coefficients, got {text!r}")
            return StateSpec(label=text.strip(), rho=x_state(*coeffs))
    except (OutOfRange, NotPSD) as exc:
        raise BadSpec(f"invalid state spec {text!r}: {exc}") from exc
    raise BadSpec(f"unknown state family {name!r} in spec {text!r}")
