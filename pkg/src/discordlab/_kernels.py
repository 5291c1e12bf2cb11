"""Hot numeric kernels: likelihood evaluation, simplex descent, conditional entropy.

These inner loops dominate the runtime of maximum-likelihood reconstruction
and of the measurement optimization, so they are compiled with numba by
default.  Setting the environment variable ``DISCORDLAB_NUMBA=0`` (before
import) selects the pure-numpy fallback: the same source executed without JIT
compilation.  Results agree between backends to floating-point roundoff;
``benchmarks/bench_backends.py`` compares their speed.

The 16 Cholesky-style parameters fill a complex lower-triangular matrix T:
t[0..3] are the real diagonal, t[4..15] are (re, im) pairs for the strict
lower triangle in row-major order (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
The candidate state is ``T^dag T / Tr[T^dag T]``, which is invariant under
rescaling of t, so the simplex search is confined to the unit sphere in t.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _flag(name: str, default: str = "1") -> bool:
    return os.environ.get(name, default).strip().lower() not in ("0", "false", "off", "no")


NUMBA_ENABLED = _flag("DISCORDLAB_NUMBA")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):  # noqa: D103 - decorator shim for the numpy fallback
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

BACKEND = "numba" if NUMBA_ENABLED else "numpy"

# Probability floor for the likelihood denominator.
PROB_FLOOR = 1e-10


@njit(cache=True)
def cholesky_lower(t):
    """Complex lower-triangular T from the 16 real parameters."""
    T = np.zeros((4, 4), dtype=np.complex128)
    T[0, 0] = t[0]
    T[1, 1] = t[1]
    T[2, 2] = t[2]
    T[3, 3] = t[3]
    T[1, 0] = t[4] + 1j * t[5]
    T[2, 0] = t[6] + 1j * t[7]
    T[2, 1] = t[8] + 1j * t[9]
    T[3, 0] = t[10] + 1j * t[11]
    T[3, 1] = t[12] + 1j * t[13]
    T[3, 2] = t[14] + 1j * t[15]
    return T


@njit(cache=True)
def nll_value(t, kets, freqs, n_total):
    """Gaussian-approximation objective N_T * sum_nu (p_nu - f_nu)^2 / (2 p_nu).

    ``kets`` holds the 16 projector state vectors as rows; the predicted
    probability is p_nu = |T ket_nu|^2 / Tr[T^dag T], floored at PROB_FLOOR.
    """
    norm = 0.0
    for i in range(16):
        norm += t[i] * t[i]
    if norm < 1e-30:
        return 1e300
    T = cholesky_lower(t)
    total = 0.0
    for nu in range(16):
        p = 0.0
        for i in range(4):
            acc = 0.0 + 0.0j
            for j in range(i + 1):
                acc += T[i, j] * kets[nu, j]
            p += acc.real * acc.real + acc.imag * acc.imag
        p /= norm
        if p < PROB_FLOOR:
            p = PROB_FLOOR
        d = p - freqs[nu]
        total += d * d / (2.0 * p)
    return n_total * total


@njit(cache=True)
def _unit(v):
    s = 0.0
    for i in range(v.shape[0]):
        s += v[i] * v[i]
    n = math.sqrt(s)
    out = np.empty_like(v)
    if n < 1e-12:
        # Degenerate candidate; fall back to a fixed unit vector.
        for i in range(v.shape[0]):
            out[i] = 0.0
        out[0] = 1.0
        return out
    for i in range(v.shape[0]):
        out[i] = v[i] / n
    return out


@njit(cache=True)
def nm_minimize_nll(x0, step, kets, freqs, n_total, max_evals, diam_tol, spread_tol):
    """Nelder-Mead descent of :func:`nll_value` on the unit sphere in t.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 0.5, 0.5).  Converged when the simplex diameter (max-abs deviation
    from the best vertex) drops below ``diam_tol`` or the function spread
    below ``spread_tol``.  Returns (x_best, f_best, n_evals, converged).
    """
    n = 16
    m = n + 1
    simplex = np.empty((m, n))
    fvals = np.empty(m)
    simplex[0] = _unit(x0)
    for i in range(n):
        v = simplex[0].copy()
        v[i] += step
        simplex[i + 1] = _unit(v)
    for i in range(m):
        fvals[i] = nll_value(simplex[i], kets, freqs, n_total)
    evals = m
    converged = False
    while evals < max_evals:
        order = np.argsort(fvals)
        simplex = simplex[order].copy()
        fvals = fvals[order].copy()

        diam = 0.0
        for i in range(1, m):
            for j in range(n):
                d = abs(simplex[i, j] - simplex[0, j])
                if d > diam:
                    diam = d
        if diam < diam_tol or fvals[m - 1] - fvals[0] < spread_tol:
            converged = True
            break

        cen = np.zeros(n)
        for i in range(m - 1):
            for j in range(n):
                cen[j] += simplex[i, j]
        for j in range(n):
            cen[j] /= m - 1

        xr = _unit(2.0 * cen - simplex[m - 1])
        fr = nll_value(xr, kets, freqs, n_total)
        evals += 1
        if fr < fvals[0]:
            xe = _unit(3.0 * cen - 2.0 * simplex[m - 1])
            fe = nll_value(xe, kets, freqs, n_total)
            evals += 1
            if fe < fr:
                simplex[m - 1] = xe
                fvals[m - 1] = fe
            else:
                simplex[m - 1] = xr
                fvals[m - 1] = fr
        elif fr < fvals[m - 2]:
            simplex[m - 1] = xr
            fvals[m - 1] = fr
        else:
            if fr < fvals[m - 1]:
                xc = _unit(cen + 0.5 * (xr - cen))
            else:
                xc = _unit(cen - 0.5 * (cen - simplex[m - 1]))
            fc = nll_value(xc, kets, freqs, n_total)
            evals += 1
            if fc < min(fr, fvals[m - 1]):
                simplex[m - 1] = xc
                fvals[m - 1] = fc
            else:
                for i in range(1, m):
                    simplex[i] = _unit(simplex[0] + 0.5 * (simplex[i] - simplex[0]))
                    fvals[i] = nll_value(simplex[i], kets, freqs, n_total)
                evals += n
    best = 0
    for i in range(1, m):
        if fvals[i] < fvals[best]:
            best = i
    return simplex[best].copy(), fvals[best], evals, converged


@njit(cache=True)
def conditional_entropy_avg(rho, theta, phi, measure_b):
    """Average conditional entropy sum_k p_k S(rho_cond_k) in bits.

    The projective measurement is along the Bloch axis (theta, phi) on party
    A (or on party B when ``measure_b``); the entropy is of the remaining
    qubit's conditional state.  Outcomes with probability below 1e-14
    contribute zero.
    """
    ch = math.cos(0.5 * theta)
    sh = math.sin(0.5 * theta)
    e = complex(math.cos(phi), math.sin(phi))
    total = 0.0
    for k in range(2):
        if k == 0:
            v0 = complex(ch, 0.0)
            v1 = sh * e
        else:
            v0 = complex(sh, 0.0)
            v1 = -ch * e
        c00 = 0.0 + 0.0j
        c01 = 0.0 + 0.0j
        c11 = 0.0 + 0.0j
        for a in range(2):
            va = v0 if a == 0 else v1
            for b in range(2):
                vb = v0 if b == 0 else v1
                w = np.conj(va) * vb
                if measure_b:
                    c00 += w * rho[a, b]
                    c01 += w * rho[a, 2 + b]
                    c11 += w * rho[2 + a, 2 + b]
                else:
                    c00 += w * rho[2 * a, 2 * b]
                    c01 += w * rho[2 * a, 2 * b + 1]
                    c11 += w * rho[2 * a + 1, 2 * b + 1]
        pk = c00.real + c11.real
        if pk < 1e-14:
            continue
        aa = c00.real / pk
        dd = c11.real / pk
        disc = 0.25 * (aa - dd) * (aa - dd) + (c01.real * c01.real + c01.imag * c01.imag) / (pk * pk)
        s = math.sqrt(disc) if disc > 0.0 else 0.0
        lam1 = 0.5 * (aa + dd) + s
        lam2 = 0.5 * (aa + dd) - s
        ent = 0.0
        if lam1 > 1e-15:
            ent -= lam1 * math.log2(lam1)
        if lam2 > 1e-15:
            ent -= lam2 * math.log2(lam2)
        total += pk * ent
    return total


@njit(cache=True)
def conditional_entropy_grid(rho, thetas, phis, measure_b):
    """Objective of :func:`conditional_entropy_avg` over an angle grid."""
    out = np.empty((thetas.shape[0], phis.shape[0]))
    for i in range(thetas.shape[0]):
        for j in range(phis.shape[0]):
            out[i, j] = conditional_entropy_avg(rho, thetas[i], phis[j], measure_b)
    return out


@njit(cache=True)
def nm_minimize_axis(rho, theta0, phi0, step, measure_b, max_evals, diam_tol, spread_tol):
    """2-D Nelder-Mead refinement of the conditional-entropy objective.

    Angles are unconstrained here (the objective is periodic); callers
    canonicalize the returned axis.  Returns (theta, phi, f, n_evals,
    converged).
    """
    n = 2
    m = n + 1
    simplex = np.empty((m, n))
    fvals = np.empty(m)
    simplex[0, 0] = theta0
    simplex[0, 1] = phi0
    simplex[1, 0] = theta0 + step
    simplex[1, 1] = phi0
    simplex[2, 0] = theta0
    simplex[2, 1] = phi0 + step
    for i in range(m):
        fvals[i] = conditional_entropy_avg(rho, simplex[i, 0], simplex[i, 1], measure_b)
    evals = m
    converged = False
    while evals < max_evals:
        order = np.argsort(fvals)
        simplex = simplex[order].copy()
        fvals = fvals[order].copy()

        diam = 0.0
        for i in range(1, m):
            for j in range(n):
                d = abs(simplex[i, j] - simplex[0, j])
                if d > diam:
                    diam = d
        if diam < diam_tol or fvals[m - 1] - fvals[0] < spread_tol:
            converged = True
            break

        cen = 0.5 * (simplex[0] + simplex[1])
        xr = 2.0 * cen - simplex[2]
        fr = conditional_entropy_avg(rho, xr[0], xr[1], measure_b)
        evals += 1
        if fr < fvals[0]:
            xe = 3.0 * cen - 2.0 * simplex[2]
            fe = conditional_entropy_avg(rho, xe[0], xe[1], measure_b)
            evals += 1
            if fe < fr:
                simplex[2] = xe
                fvals[2] = fe
            else:
                simplex[2] = xr
                fvals[2] = fr
        elif fr < fvals[1]:
            simplex[2] = xr
            fvals[2] = fr
        else:
            if fr < fvals[2]:
                xc = cen + 0.5 * (xr - cen)
            else:
                xc = cen - 0.5 * (cen - simplex[2])
            fc = conditional_entropy_avg(rho, xc[0], xc[1], measure_b)
            evals += 1
            if fc < min(fr, fvals[2]):
                simplex[2] = xc
                fvals[2] = fc
            else:
                for i in range(1, m):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = conditional_entropy_avg(rho, simplex[i, 0], simplex[i, 1], measure_b)
                evals += n
    best = 0
    for i in range(1, m):
        if fvals[i] < fvals[best]:
            best = i
    return simplex[best, 0], simplex[best, 1], fvals[best], evals, converged


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    t = np.zeros(16)
    t[:4] = 1.0
    kets = np.eye(4, dtype=np.complex128)[np.arange(16) % 4].copy()
    freqs = np.full(16, 1.0 / 16.0)
    nll_value(t, kets, freqs, 100.0)
    nm_minimize_nll(t, 0.1, kets, freqs, 100.0, 50, 1e-3, 1e-6)
    rho = np.eye(4, dtype=np.complex128) / 4.0
    conditional_entropy_avg(rho, 0.3, 0.2, False)
    conditional_entropy_grid(rho, np.array([0.0, 1.0]), np.array([0.0, 1.0]), True)
    nm_minimize_axis(rho, 0.3, 0.2, 0.1, False, 20, 1e-3, 1e-6)
