"""Constitutive closure and thermodynamic functionals of the mixture.

A mixture is n isothermal species, each with an isentropic partial pressure
p_i(rho) = k_i rho**gamma_i, coupled through pairwise friction coefficients
lambda_ij(rho_i, rho_j) >= 0 (constant or affine) and damped by per-species
mobilities M_i. This module is the pointwise reference implementation: the
solvers carry vectorized fast paths that are tested against it.

All functions are pure; models and states are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DomainError
from .sampling import halton

__all__ = [
    "PressureLaw",
    "MixtureModel",
    "CellState",
    "StateBox",
    "lambda_values",
    "lambda_matrix",
    "maxwell_stefan_matrix",
    "mobility_matrix",
    "mobility_matrix_full",
    "source",
    "entropy",
    "entropy_flux",
    "entropy_gradient",
    "entropy_production",
    "dissipation_pairing",
    "relative_entropy",
    "relative_entropy_flux",
    "flux_vector",
    "momentum_flux_collection",
    "momentum_flux_jacobian",
    "relative_flux",
    "stefan_diffusivity",
    "convexity_bounds",
]


def _check_positive(rho, what="density"):
    rho = np.asarray(rho, dtype=float)
    if rho.size == 0 or not np.all(rho > 0.0) or not np.all(np.isfinite(rho)):
        raise DomainError(f"{what} must be positive and finite, got {rho!r}")
    return rho


@dataclass(frozen=True)
class PressureLaw:
    """Isentropic pressure p(rho) = k * rho**gamma with k > 0, gamma >= 1.

    The free energy density h is fixed by rho*h'(rho) - h(rho) = p(rho) with
    the additive constant set to zero, giving k*rho**gamma/(gamma-1) for
    gamma > 1 and k*rho*log(rho) for gamma = 1. The growth bound
    p''(rho) <= a * p'(rho)/rho holds with a = gamma.
    """

    k: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0.0):
            raise DomainError(f"pressure stiffness k must be positive, got {self.k}")
        if not (np.isfinite(self.gamma) and self.gamma >= 1.0):
            raise DomainError(f"pressure exponent gamma must be >= 1, got {self.gamma}")

    @property
    def growth_exponent(self) -> float:
        """The constant a in p''(rho) <= a p'(rho)/rho."""
        return self.gamma

    def pressure(self, rho):
        rho = _check_positive(rho)
        return self.k * rho**self.gamma

    def dpressure(self, rho):
        rho = _check_positive(rho)
        return self.k * self.gamma * rho ** (self.gamma - 1.0)

    def d2pressure(self, rho):
        rho = _check_positive(rho)
        return self.k * self.gamma * (self.gamma - 1.0) * rho ** (self.gamma - 2.0)

    def sound_speed(self, rho):
        return np.sqrt(self.dpressure(rho))

    def free_energy(self, rho):
        rho = _check_positive(rho)
        if self.gamma == 1.0:
            return self.k * rho * np.log(rho)
        return self.k * rho**self.gamma / (self.gamma - 1.0)

    def free_energy_prime(self, rho):
        rho = _check_positive(rho)
        if self.gamma == 1.0:
            return self.k * (np.log(rho) + 1.0)
        return self.k * self.gamma * rho ** (self.gamma - 1.0) / (self.gamma - 1.0)

    def relative_free_energy(self, rho, rho_ref):
        """Second-order remainder h(rho) - h(rho_ref) - h'(rho_ref)(rho - rho_ref)."""
        return (
            self.free_energy(rho)
            - self.free_energy(rho_ref)
            - self.free_energy_prime(rho_ref) * (np.asarray(rho, dtype=float) - rho_ref)
        )

    def relative_pressure(self, rho, rho_ref):
        """Second-order remainder p(rho) - p(rho_ref) - p'(rho_ref)(rho - rho_ref)."""
        return (
            self.pressure(rho)
            - self.pressure(rho_ref)
            - self.dpressure(rho_ref) * (np.asarray(rho, dtype=float) - rho_ref)
        )


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """Immutable mixture description: pressure laws, mobilities, friction table.

    The friction coefficients are lambda_ij(rho_i, rho_j) =
    lam_const[i,j] + lam_di[i,j]*rho_i + lam_dj[i,j]*rho_j. Nonnegative
    coefficients are required entrywise, which is equivalent to
    lambda_ij >= 0 on the whole positive quadrant for affine functions.
    Symmetry lambda_ij(a, b) = lambda_ji(b, a) translates to lam_const
    symmetric and lam_di = lam_dj^T. Diagonal entries are unused and must
    be zero.
    """

    pressure_laws: tuple
    mobilities: np.ndarray
    lam_const: np.ndarray
    lam_di: np.ndarray
    lam_dj: np.ndarray
    d: int = 1

    def __post_init__(self):
        n = len(self.pressure_laws)
        if n < 1:
            raise DomainError("need at least one species")
        if self.d < 1:
            raise DomainError("spatial dimension must be >= 1")
        if not all(isinstance(p, PressureLaw) for p in self.pressure_laws):
            raise DomainError("pressure_laws must be PressureLaw instances")
        object.__setattr__(self, "pressure_laws", tuple(self.pressure_laws))
        mob = np.asarray(self.mobilities, dtype=float).reshape(n)
        if not np.all(np.isfinite(mob)) or np.any(mob < 0.0):
            raise DomainError("mobilities must be finite and >= 0")
        for name in ("lam_const", "lam_di", "lam_dj"):
            tab = np.asarray(getattr(self, name), dtype=float)
            if tab.shape != (n, n):
                raise DomainError(f"{name} must have shape ({n}, {n}), got {tab.shape}")
            if not np.all(np.isfinite(tab)) or np.any(tab < 0.0):
                raise DomainError(f"{name} entries must be finite and >= 0")
            if np.any(np.diag(tab) != 0.0):
                raise DomainError(f"{name} diagonal must be zero (self-friction is not a thing)")
            object.__setattr__(self, name, _readonly(tab))
        if not np.array_equal(self.lam_const, self.lam_const.T):
            raise DomainError("lam_const must be symmetric")
        if not np.array_equal(self.lam_di, self.lam_dj.T):
            raise DomainError("lam_di must equal lam_dj^T (pair symmetry)")
        object.__setattr__(self, "mobilities", _readonly(mob))

    @classmethod
    def constant_lambda(cls, pressure_laws, mobilities, lam, d: int = 1) -> "MixtureModel":
        """Model with density-independent friction coefficients ``lam`` (n x n)."""
        n = len(pressure_laws)
        lam = np.asarray(lam, dtype=float) * np.ones((n, n))
        np.fill_diagonal(lam, 0.0)
        zero = np.zeros((n, n))
        return cls(tuple(pressure_laws), np.asarray(mobilities, float), lam, zero, zero, d=d)

    @property
    def n(self) -> int:
        return len(self.pressure_laws)

    @property
    def stiffness(self) -> np.ndarray:
        return np.array([p.k for p in self.pressure_laws])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([p.gamma for p in self.pressure_laws])

    def lambda_is_constant(self) -> bool:
        return not (self.lam_di.any() or self.lam_dj.any())

    def pressure(self, r):
        r = _check_positive(r)
        return np.stack([law.pressure(r[i]) for i, law in enumerate(self.pressure_laws)])

    def dpressure(self, r):
        r = _check_positive(r)
        return np.stack([law.dpressure(r[i]) for i, law in enumerate(self.pressure_laws)])

    def free_energy(self, r):
        r = _check_positive(r)
        return np.stack([law.free_energy(r[i]) for i, law in enumerate(self.pressure_laws)])

    def free_energy_prime(self, r):
        r = _check_positive(r)
        return np.stack(
            [law.free_energy_prime(r[i]) for i, law in enumerate(self.pressure_laws)]
        )

    def permuted(self, perm) -> "MixtureModel":
        """Same mixture with species relabeled by ``perm`` (new index i is old perm[i])."""
        perm = list(perm)
        ix = np.ix_(perm, perm)
        return MixtureModel(
            tuple(self.pressure_laws[p] for p in perm),
            self.mobilities[perm],
            self.lam_const[ix],
            self.lam_di[ix],
            self.lam_dj[ix],
            d=self.d,
        )


@dataclass(frozen=True)
class CellState:
    """Densities r (n,) and per-species momenta m (n, d) at one point."""

    r: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        r = _readonly(np.atleast_1d(np.asarray(self.r, dtype=float)))
        m = np.asarray(self.m, dtype=float)
        if m.ndim == 1:
            m = m[:, None]
        m = _readonly(m)
        if r.ndim != 1 or m.shape[0] != r.shape[0]:
            raise DomainError(f"state shapes do not conform: r {r.shape}, m {m.shape}")
        if not np.all(r > 0.0) or not np.all(np.isfinite(r)):
            raise DomainError("densities must be positive and finite")
        if not np.all(np.isfinite(m)):
            raise DomainError("momenta must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def d(self) -> int:
        return self.m.shape[1]

    @property
    def velocities(self) -> np.ndarray:
        """Always derived as m / rho; never stored."""
        return self.m / self.r[:, None]

    def as_vector(self) -> np.ndarray:
        """Flatten to (rho_1..rho_n, m_1, ..., m_n) in R^{n(d+1)}."""
        return np.concatenate([self.r, self.m.reshape(-1)])

    @classmethod
    def from_vector(cls, u: np.ndarray, n: int, d: int) -> "CellState":
        u = np.asarray(u, dtype=float)
        return cls(u[:n], u[n:].reshape(n, d))


@dataclass(frozen=True)
class StateBox:
    """Compact, convex box of states: per-species density intervals and momentum bounds."""

    rho_lo: np.ndarray
    rho_hi: np.ndarray
    m_bound: np.ndarray

    def __post_init__(self):
        lo = _readonly(np.atleast_1d(self.rho_lo))
        hi = _readonly(np.atleast_1d(self.rho_hi))
        mb = _readonly(np.atleast_1d(self.m_bound))
        if not (lo.shape == hi.shape == mb.shape):
            raise DomainError("box arrays must share one shape")
        if not np.all(lo > 0.0) or not np.all(hi >= lo) or not np.all(mb >= 0.0):
            raise DomainError("box needs 0 < lo <= hi and momentum bounds >= 0")
        object.__setattr__(self, "rho_lo", lo)
        object.__setattr__(self, "rho_hi", hi)
        object.__setattr__(self, "m_bound", mb)

    @property
    def n(self) -> int:
        return self.rho_lo.shape[0]

    def is_degenerate(self) -> bool:
        return bool(np.all(self.rho_lo == self.rho_hi) and np.all(self.m_bound == 0.0))

    def contains(self, state: CellState) -> bool:
        return bool(
            np.all(state.r >= self.rho_lo)
            and np.all(state.r <= self.rho_hi)
            and np.all(np.linalg.norm(state.m, axis=1) <= self.m_bound + 1e-15)
        )

    def sample(self, count: int, d: int, seed: int = 0):
        """(count, n) densities and (count, n, d) momenta, seeded low-discrepancy."""
        n = self.n
        u = halton(n * (d + 1), count, seed=seed)
        r = self.rho_lo + u[:, :n] * (self.rho_hi - self.rho_lo)
        m = (2.0 * u[:, n:].reshape(count, n, d) - 1.0) * self.m_bound[None, :, None]
        if d > 1:
            norms = np.linalg.norm(m, axis=2)
            over = norms > self.m_bound[None, :]
            scale = np.where(over, self.m_bound[None, :] / np.where(norms == 0, 1, norms), 1.0)
            m = m * scale[:, :, None]
        return r, m


def lambda_values(model: MixtureModel, r) -> np.ndarray:
    """Friction coefficients lambda_ij(rho_i, rho_j) as an (n, n) array, zero diagonal."""
    r = _check_positive(np.atleast_1d(r))
    lam = model.lam_const + model.lam_di * r[:, None] + model.lam_dj * r[None, :]
    np.fill_diagonal(lam, 0.0)
    return lam


def lambda_matrix(model: MixtureModel, r) -> np.ndarray:
    """Coupling matrix: off-diagonal lambda_ij, diagonal -sum_j lambda_ij rho_j / rho_i.

    Symmetric by construction and expected negative semi-definite; the
    identity battery checks the NSD property by sampling.
    """
    r = _check_positive(np.atleast_1d(r))
    lam = lambda_values(model, r)
    out = lam.copy()
    np.fill_diagonal(out, -(lam @ r) / r)
    return out


def maxwell_stefan_matrix(model: MixtureModel, r) -> np.ndarray:
    """Friction matrix with entries -lambda_ij rho_i rho_j off the diagonal.

    The diagonal completes every row and column sum to zero, which makes the
    matrix symmetric positive semi-definite with kernel containing (1,...,1).
    """
    r = _check_positive(np.atleast_1d(r))
    lam = lambda_values(model, r)
    tau = -lam * r[:, None] * r[None, :]
    np.fill_diagonal(tau, 0.0)
    np.fill_diagonal(tau, -tau.sum(axis=1))
    return tau


def mobility_matrix(model: MixtureModel, r, check: bool = True) -> np.ndarray:
    """diag(M) - diag(r) Lambda(r); the Darcy mobility of the limit system.

    With ``check`` the symmetric part is verified positive definite (the
    quadratic-form sense; the matrix itself need not be symmetric). A failure
    signals an invalid friction table for this density.
    """
    from .errors import SingularSystemError

    r = _check_positive(np.atleast_1d(r))
    bt = np.diag(model.mobilities) - r[:, None] * lambda_matrix(model, r)
    if check:
        sym_min = float(np.linalg.eigvalsh(0.5 * (bt + bt.T))[0])
        if sym_min <= 0.0:
            raise SingularSystemError(
                f"mobility matrix lost quadratic-form positivity "
                f"(min symmetric-part eigenvalue {sym_min:.3e}); invalid lambda table at r={r}"
            )
    return bt


def mobility_matrix_full(model: MixtureModel, r, check: bool = True) -> np.ndarray:
    """The nd x nd extension: mobility_matrix (x) I_d."""
    return linalg.kron(mobility_matrix(model, r, check=check), np.eye(model.d))


def source(model: MixtureModel, state: CellState) -> np.ndarray:
    """Momentum production (n, d): -M_i m_i - sum_j lambda_ij (rho_j m_i - rho_i m_j)."""
    lam = lambda_values(model, state.r)
    r, m = state.r, state.m
    exchange = (lam * r[None, :]).sum(axis=1)[:, None] * m - r[:, None] * (lam @ m)
    return -model.mobilities[:, None] * m - exchange


def source_vector(model: MixtureModel, state: CellState) -> np.ndarray:
    """Full balance-law source (0, s) in R^{n(d+1)}."""
    return np.concatenate([np.zeros(state.n), source(model, state).reshape(-1)])


def entropy(model: MixtureModel, state: CellState) -> float:
    """Strictly convex entropy: sum_i |m_i|^2 / (2 rho_i) + h_i(rho_i)."""
    kinetic = 0.5 * float(np.sum(np.sum(state.m**2, axis=1) / state.r))
    return kinetic + float(np.sum(model.free_energy(state.r)))


def entropy_flux(model: MixtureModel, state: CellState) -> np.ndarray:
    """Entropy flux (d,): sum_i m_i |m_i|^2 / (2 rho_i^2) + m_i h_i'(rho_i)."""
    msq = np.sum(state.m**2, axis=1)
    hp = model.free_energy_prime(state.r)
    return np.sum(state.m * (0.5 * msq / state.r**2 + hp)[:, None], axis=0)


def entropy_gradient(model: MixtureModel, state: CellState) -> np.ndarray:
    """Gradient of the entropy wrt (r, m), length n(d+1)."""
    v = state.velocities
    dr = model.free_energy_prime(state.r) - 0.5 * np.sum(v**2, axis=1)
    return np.concatenate([dr, v.reshape(-1)])


def entropy_production(model: MixtureModel, state: CellState) -> float:
    """Friction heating: 0.5 sum_ij lambda_ij rho_i rho_j |v_i - v_j|^2 >= 0."""
    lam = lambda_values(model, state.r)
    v = state.velocities
    dv2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=2)
    return 0.5 * float(np.sum(lam * state.r[:, None] * state.r[None, :] * dv2))


def dissipation_pairing(model: MixtureModel, state: CellState, equilibrium: CellState) -> float:
    """-(Deta(U) - Deta(U_eq)) . S(U) for a zero-momentum equilibrium.

    Coincides with sum_i M_i |m_i|^2/rho_i + entropy_production(U) up to
    rounding; the identity battery pins that down.
    """
    if np.any(equilibrium.m != 0.0):
        raise DomainError("equilibrium state must have zero momenta")
    if equilibrium.n != state.n:
        raise DomainError("state and equilibrium must have the same species count")
    diff = entropy_gradient(model, state) - entropy_gradient(model, equilibrium)
    return -float(diff @ source_vector(model, state))


def relative_entropy(model: MixtureModel, state: CellState, ref: CellState) -> float:
    """Second-order entropy remainder; nonnegative, zero iff the states agree."""
    v, vbar = state.velocities, ref.velocities
    kinetic = 0.5 * float(np.sum(state.r * np.sum((v - vbar) ** 2, axis=1)))
    rel_h = sum(
        float(law.relative_free_energy(state.r[i], ref.r[i]))
        for i, law in enumerate(model.pressure_laws)
    )
    return kinetic + rel_h


def relative_entropy_flux(model: MixtureModel, state: CellState, ref: CellState) -> np.ndarray:
    """Three-term relative entropy flux (d,)."""
    v, vbar = state.velocities, ref.velocities
    dv = v - vbar
    hp = model.free_energy_prime(state.r) - model.free_energy_prime(ref.r)
    rel_h = np.array(
        [
            law.relative_free_energy(state.r[i], ref.r[i])
            for i, law in enumerate(model.pressure_laws)
        ]
    )
    term1 = 0.5 * np.sum(state.m * np.sum(dv**2, axis=1)[:, None], axis=0)
    term2 = np.sum((state.r * hp)[:, None] * dv, axis=0)
    term3 = np.sum(vbar * rel_h[:, None], axis=0)
    return term1 + term2 + term3


def flux_vector(model: MixtureModel, state: CellState, alpha: int) -> np.ndarray:
    """Directional flux F_alpha(U) in R^{n(d+1)} (alpha is 0-based)."""
    d = state.d
    if not 0 <= alpha < d:
        raise DomainError(f"flux direction {alpha} out of range for d={d}")
    p = model.pressure(state.r)
    v = state.velocities
    mom = v[:, alpha : alpha + 1] * state.m
    mom[:, alpha] += p
    return np.concatenate([state.m[:, alpha], mom.reshape(-1)])


def momentum_flux_collection(model: MixtureModel, state: CellState) -> np.ndarray:
    """All momentum fluxes stacked: per species, vec(m m^T / rho + p I_d); length n d^2."""
    d = state.d
    p = model.pressure(state.r)
    blocks = [
        (np.outer(state.m[i], state.m[i]) / state.r[i] + p[i] * np.eye(d)).reshape(-1)
        for i in range(state.n)
    ]
    return np.concatenate(blocks)


def momentum_flux_jacobian(model: MixtureModel, state: CellState) -> np.ndarray:
    """Derivative of momentum_flux_collection wrt (r, m); shape (n d^2, n(d+1))."""
    n, d = state.n, state.d
    dp = model.dpressure(state.r)
    v = state.velocities
    out = np.zeros((n * d * d, n * (d + 1)))
    eye = np.eye(d)
    for i in range(n):
        rows = slice(i * d * d, (i + 1) * d * d)
        drho = (-np.outer(v[i], v[i]) + dp[i] * eye).reshape(-1)
        out[rows, i] = drho
        # d(m^b m^g / rho)/dm^a = delta_ab v^g + v^b delta_ag
        dm = np.einsum("ba,g->bga", eye, v[i]) + np.einsum("b,ga->bga", v[i], eye)
        out[rows, n + i * d : n + (i + 1) * d] = dm.reshape(d * d, d)
    return out


def relative_flux(model: MixtureModel, state: CellState, ref: CellState) -> np.ndarray:
    """Second-order remainder of the momentum flux collection, length n d^2.

    Equals, per species, vec(rho (v - vbar)(v - vbar)^T + p(rho|rho_ref) I_d).
    """
    du = state.as_vector() - ref.as_vector()
    return (
        momentum_flux_collection(model, state)
        - momentum_flux_collection(model, ref)
        - momentum_flux_jacobian(model, ref) @ du
    )


def stefan_diffusivity(
    model: MixtureModel,
    i: int,
    j: int,
    total_molar_concentration: float,
    molar_masses,
    gas_constant: float,
) -> float:
    """Binary diffusivity D_ij = R / (c * Mw_i * Mw_j * lambda_ij) for constant lambda_ij."""
    if i == j:
        raise DomainError("diffusivity is defined for distinct species only")
    if model.lam_di[i, j] != 0.0 or model.lam_dj[i, j] != 0.0:
        raise DomainError("diffusivity conversion requires a constant lambda_ij")
    lam = model.lam_const[i, j]
    if lam <= 0.0:
        raise DomainError("diffusivity conversion requires lambda_ij > 0")
    mw = np.asarray(molar_masses, dtype=float)
    if total_molar_concentration <= 0.0 or gas_constant <= 0.0 or np.any(mw <= 0.0):
        raise DomainError("concentration, gas constant and molar masses must be positive")
    return float(gas_constant / (total_molar_concentration * mw[i] * mw[j] * lam))


def convexity_bounds(model: MixtureModel, box: StateBox, samples: int = 256, seed: int = 0):
    """(c, C) with c |dU|^2 <= eta(U|Ubar) <= C |dU|^2 on the box.

    Half the extreme eigenvalues of the entropy Hessian over sampled box
    states; the Hessian is evaluated by the certificate assembler.
    """
    from .certificate import entropy_hessian

    r, m = box.sample(samples, model.d, seed=seed)
    lo, hi = np.inf, 0.0
    for s in range(samples):
        w = np.linalg.eigvalsh(entropy_hessian(model, CellState(r[s], m[s])))
        lo = min(lo, w[0])
        hi = max(hi, w[-1])
    return 0.5 * lo, 0.5 * hi
