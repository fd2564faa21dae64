"""Small dense matrix algebra and discrete differential operators.

Everything here works on plain float arrays; n (species) and d (space
dimension) are small, so storage is dense throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = [
    "kron",
    "hadamard",
    "blockdiag_vec",
    "blockdiag_mat",
    "grad_general",
    "div_general",
    "div_total",
    "verify_product_rules",
]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product: block (i, j) of the result is a[i, j] * b."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product of two identically shaped matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"hadamard operands differ in shape: {a.shape} vs {b.shape}")
    return a * b


def blockdiag_vec(vectors) -> np.ndarray:
    """Stack n vectors of length d into the nd x n block-diagonal matrix.

    Column i carries vector i in rows i*d .. (i+1)*d - 1, zeros elsewhere.
    """
    vecs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in vectors]
    if not vecs:
        raise DimensionError("blockdiag_vec needs at least one vector")
    d = vecs[0].size
    if any(v.ndim != 1 or v.size != d for v in vecs):
        raise DimensionError("blockdiag_vec vectors must share one length")
    n = len(vecs)
    out = np.zeros((n * d, n))
    for i, v in enumerate(vecs):
        out[i * d : (i + 1) * d, i] = v
    return out


def blockdiag_mat(matrices) -> np.ndarray:
    """Place n square d x d matrices on the diagonal of an nd x nd matrix."""
    mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in matrices]
    if not mats:
        raise DimensionError("blockdiag_mat needs at least one matrix")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionError("blockdiag_mat blocks must be square and equal-sized")
    n = len(mats)
    out = np.zeros((n * d, n * d))
    for i, m in enumerate(mats):
        out[i * d : (i + 1) * d, i * d : (i + 1) * d] = m
    return out


def _axis_gradient(f: np.ndarray, dx: float, axis: int, periodic: bool) -> np.ndarray:
    if f.shape[axis] < 3:
        raise DimensionError("gradient needs at least 3 samples per axis")
    if periodic:
        fp = np.roll(f, -1, axis=axis)
        fm = np.roll(f, 1, axis=axis)
        return (fp - fm) / (2.0 * dx)
    return np.gradient(f, dx, axis=axis, edge_order=2)


def grad_general(f: np.ndarray, dx, periodic: bool = False) -> np.ndarray:
    """Componentwise gradient of a sampled field.

    ``f`` has shape (n, N_1, ..., N_d) on a uniform grid with spacings ``dx``
    (scalar or length d). Returns shape (n*d, N_1, ..., N_d) with row i*d + a
    holding the a-th partial derivative of component i: the stacked layout of
    per-component gradients. Interior stencils are second-order central;
    boundaries either wrap (periodic) or use one-sided second-order formulas.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim < 2:
        raise DimensionError("field must have shape (components, grid...)")
    n = f.shape[0]
    d = f.ndim - 1
    spacing = np.broadcast_to(np.asarray(dx, dtype=float), (d,))
    out = np.empty((n * d,) + f.shape[1:])
    for i in range(n):
        for a in range(d):
            out[i * d + a] = _axis_gradient(f[i], spacing[a], axis=a, periodic=periodic)
    return out


def div_general(v: np.ndarray, dx, n: int, periodic: bool = False) -> np.ndarray:
    """Per-component divergence of an (n*d, grid...) field, returning (n, grid...).

    Component i of the result is div(v_i) where v_i occupies rows
    i*d .. (i+1)*d - 1. This is the stacked variant the limit system needs;
    see :func:`div_total` for the scalar-sum reduction.
    """
    v = np.asarray(v, dtype=float)
    d = v.ndim - 1
    if v.shape[0] % n != 0 or v.shape[0] // n != d:
        raise DimensionError(
            f"field with {v.shape[0]} rows and {d} grid axes is not an (n*d) stack for n={n}"
        )
    spacing = np.broadcast_to(np.asarray(dx, dtype=float), (d,))
    out = np.zeros((n,) + v.shape[1:])
    for i in range(n):
        for a in range(d):
            out[i] += _axis_gradient(v[i * d + a], spacing[a], axis=a, periodic=periodic)
    return out


def div_total(v: np.ndarray, dx, n: int, periodic: bool = False) -> np.ndarray:
    """Scalar divergence sum over all components: sum_i div(v_i)."""
    return div_general(v, dx, n, periodic=periodic).sum(axis=0)


def verify_product_rules(n_cells: int, length: float = 2.0) -> float:
    """Max relative residual of the discrete gradient product/chain rules.

    Checks, with the discrete operators on ``n_cells`` points over
    [0, length]:

    * grad(alpha * a) = a (x) grad(alpha) + alpha * grad(a)
    * grad(c(b)) = (Dc (x) I_d) grad(b)

    for polynomial test functions in 1D (cubic terms included so the central
    stencil has a genuine O(dx^2) error to measure).
    """
    x = np.linspace(0.0, length, n_cells)
    dx = x[1] - x[0]

    alpha = x
    a = np.stack([x, x**2, x**3])
    lhs = grad_general((alpha[None, :] * a), dx)
    rhs = a * grad_general(alpha[None, :], dx)[0] + alpha[None, :] * grad_general(a, dx)
    scale = max(np.max(np.abs(rhs)), 1.0)
    res = np.max(np.abs(lhs - rhs)) / scale

    b = np.stack([x, 1.0 + x**2])
    cb = np.stack([b[0] ** 2 * b[1], b[0] ** 3])
    lhs2 = grad_general(cb, dx)
    grad_b = grad_general(b, dx)
    # (Dc (x) I_1) grad b, assembled pointwise: Dc rows are (2 b0 b1, b0^2), (3 b0^2, 0)
    rhs2 = np.stack(
        [
            2.0 * b[0] * b[1] * grad_b[0] + b[0] ** 2 * grad_b[1],
            3.0 * b[0] ** 2 * grad_b[0] + 0.0 * grad_b[1],
        ]
    )
    scale2 = max(np.max(np.abs(rhs2)), 1.0)
    res2 = np.max(np.abs(lhs2 - rhs2)) / scale2
    return max(res, res2)
