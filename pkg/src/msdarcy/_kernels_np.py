"""Pure-numpy implementations of the hot solver kernels.

These are the fallback backend; `msdarcy._kernels_cy` mirrors the exact same
signatures in Cython. Arrays are (n, cells) float64 throughout, d = 1.
Ghost cells are already applied by the caller: the hyperbolic update expects
two per side, the parabolic update one per side.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularSystemError

BACKEND_NAME = "python"


def lambda_field(r, lam0, lami, lamj):
    """Friction coefficients per cell: (n, n, N) from densities (n, N)."""
    lam = (
        lam0[:, :, None]
        + lami[:, :, None] * r[:, None, :]
        + lamj[:, :, None] * r[None, :, :]
    )
    n = r.shape[0]
    lam[np.arange(n), np.arange(n), :] = 0.0
    return lam


def btilde_field(r, M, lam0, lami, lamj):
    """Mobility matrices per cell: (N, n, n) from densities (n, N)."""
    n = r.shape[0]
    lam = lambda_field(r, lam0, lami, lamj)
    bt = -lam * r[:, None, :]
    idx = np.arange(n)
    bt[idx, idx, :] = M[:, None] + np.einsum("ijc,jc->ic", lam, r)
    return np.ascontiguousarray(bt.transpose(2, 0, 1))


def _solve_cellwise(a, b):
    """Solve a[c] x[c] = b[:, c] for every cell; a is (N, n, n), b is (n, N)."""
    n = b.shape[0]
    if n == 1:
        diag = a[:, 0, 0]
        if np.any(diag == 0.0):
            raise SingularSystemError("singular 1x1 cellwise system")
        return (b[0] / diag)[None, :]
    if n == 2:
        a11, a12 = a[:, 0, 0], a[:, 0, 1]
        a21, a22 = a[:, 1, 0], a[:, 1, 1]
        det = a11 * a22 - a12 * a21
        if np.any(det == 0.0):
            raise SingularSystemError("singular 2x2 cellwise system")
        x1 = (a22 * b[0] - a12 * b[1]) / det
        x2 = (a11 * b[1] - a21 * b[0]) / det
        return np.stack([x1, x2])
    try:
        return np.linalg.solve(a, b.T[:, :, None])[:, :, 0].T
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc


def max_signal_speed(r, m, k, gamma):
    """max over cells and species of |v| + sqrt(p'(rho))."""
    c = np.sqrt(k * gamma)[:, None] * r ** (0.5 * (gamma[:, None] - 1.0))
    return float(np.max(np.abs(m / r) + c))


def _minmod(a, b):
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def hyperbolic_update(r_pad, m_pad, k, gamma, coef, muscl):
    """One conservative explicit update with the local Lax-Friedrichs flux.

    ``r_pad``/``m_pad`` carry two ghost cells per side; ``coef`` is
    dt / (eps * dx). Returns the updated interior (n, N) arrays. With
    ``muscl`` the interface states are minmod-limited linear reconstructions.
    """
    kc = k[:, None]
    gc = gamma[:, None]

    if muscl:
        dr = r_pad[:, 1:] - r_pad[:, :-1]
        dm = m_pad[:, 1:] - m_pad[:, :-1]
        sr = _minmod(dr[:, :-1], dr[:, 1:])
        sm = _minmod(dm[:, :-1], dm[:, 1:])
        rl = r_pad[:, 1:-2] + 0.5 * sr[:, :-1]
        rr = r_pad[:, 2:-1] - 0.5 * sr[:, 1:]
        ml = m_pad[:, 1:-2] + 0.5 * sm[:, :-1]
        mr = m_pad[:, 2:-1] - 0.5 * sm[:, 1:]
    else:
        rl, rr = r_pad[:, 1:-2], r_pad[:, 2:-1]
        ml, mr = m_pad[:, 1:-2], m_pad[:, 2:-1]

    vl, vr = ml / rl, mr / rr
    pl = kc * rl**gc
    pr = kc * rr**gc
    cl = np.sqrt(kc * gc) * rl ** (0.5 * (gc - 1.0))
    cr = np.sqrt(kc * gc) * rr ** (0.5 * (gc - 1.0))
    a = np.maximum(np.abs(vl) + cl, np.abs(vr) + cr).max(axis=0)

    flux_r = 0.5 * (ml + mr) - 0.5 * a * (rr - rl)
    flux_m = 0.5 * (ml * vl + pl + mr * vr + pr) - 0.5 * a * (mr - ml)

    r_new = r_pad[:, 2:-2] - coef * (flux_r[:, 1:] - flux_r[:, :-1])
    m_new = m_pad[:, 2:-2] - coef * (flux_m[:, 1:] - flux_m[:, :-1])
    return r_new, m_new


def source_update(r, m, M, lam0, lami, lamj, coef):
    """Implicit friction update: solve (I + coef * Btilde(r)) m_new = m per cell.

    ``coef`` is dt / eps^2 (or half that for a Strang substep); densities are
    untouched. The solve is exact, so the substep is unconditionally stable.
    """
    n = r.shape[0]
    if n == 1:
        return m / (1.0 + coef * M[0])
    a = btilde_field(r, M, lam0, lami, lamj) * coef
    idx = np.arange(n)
    a[:, idx, idx] += 1.0
    return _solve_cellwise(a, m)


def parabolic_update(r_pad, M, k, gamma, lam0, lami, lamj, coef):
    """One explicit conservative step of the nonlinear diffusion limit.

    ``r_pad`` carries one ghost cell per side; ``coef`` is dt / dx^2. Face
    mobilities use the arithmetic density mean.
    """
    rf = 0.5 * (r_pad[:, :-1] + r_pad[:, 1:])
    p = k[:, None] * r_pad ** gamma[:, None]
    dp = p[:, 1:] - p[:, :-1]
    n = r_pad.shape[0]
    if n == 1:
        j = dp / M[0]
    elif not (lam0.any() or lami.any() or lamj.any()):
        j = dp / M[:, None]
    else:
        j = _solve_cellwise(btilde_field(rf, M, lam0, lami, lamj), dp)
    return r_pad[:, 1:-1] + coef * (j[:, 1:] - j[:, :-1])
