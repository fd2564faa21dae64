"""Numerical certificate for the structural wellposedness conditions.

At a zero-momentum equilibrium the global-existence machinery asks for four
things, checked here numerically over a compact state box:

1. the momentum block of the source Jacobian is invertible,
2. the entropy Hessian symmetrizes every flux Jacobian,
3. the entropy gradient pairs strictly dissipatively with the source,
4. no density-only direction is an eigenvector of any directional flux
   Jacobian at the equilibrium.

Condition 3 over a sampled box is a falsification procedure, not a proof;
its passing verdict is reported as "pass (sampled)".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg, mixture
from .errors import DomainError
from .mixture import CellState, MixtureModel, StateBox
from .sampling import unit_sphere

__all__ = [
    "flux_jacobian",
    "entropy_hessian",
    "source_momentum_jacobian",
    "certify",
    "CertificateReport",
    "ConditionResult",
]

SYMMETRY_TOL = 1e-10
MOMENTUM_MASS_TOL = 1e-8
SINGULAR_VALUE_TOL = 1e-10


def flux_jacobian(model: MixtureModel, state: CellState, alpha: int) -> np.ndarray:
    """Jacobian of the directional flux F_alpha, shape n(d+1) x n(d+1).

    Block layout: zero density-density block, I_n (x) e_alpha^T coupling to the
    momenta, block-diagonal pressure/velocity blocks below.
    """
    n, d = state.n, state.d
    if not 0 <= alpha < d:
        raise DomainError(f"flux direction {alpha} out of range for d={d}")
    dp = model.dpressure(state.r)
    v = state.velocities
    e = np.zeros(d)
    e[alpha] = 1.0

    out = np.zeros((n * (d + 1), n * (d + 1)))
    out[:n, n:] = linalg.kron(np.eye(n), e[None, :])
    out[n:, :n] = linalg.blockdiag_vec(
        [-v[i, alpha] * v[i] + dp[i] * e for i in range(n)]
    )
    out[n:, n:] = linalg.blockdiag_mat(
        [v[i, alpha] * np.eye(d) + np.outer(v[i], e) for i in range(n)]
    )
    return out


def entropy_hessian(model: MixtureModel, state: CellState) -> np.ndarray:
    """Hessian of the entropy wrt (r, m); symmetric positive definite on the state space."""
    n, d = state.n, state.d
    dp = model.dpressure(state.r)
    v = state.velocities
    msq = np.sum(state.m**2, axis=1)

    out = np.zeros((n * (d + 1), n * (d + 1)))
    out[:n, :n] = np.diag(dp / state.r + msq / state.r**3)
    cross = linalg.blockdiag_vec([-v[i] / state.r[i] for i in range(n)])
    out[n:, :n] = cross
    out[:n, n:] = cross.T
    out[n:, n:] = linalg.blockdiag_mat([np.eye(d) / state.r[i] for i in range(n)])
    return out


def source_momentum_jacobian(model: MixtureModel, equilibrium: CellState) -> np.ndarray:
    """Momentum block of the source Jacobian at a zero-momentum equilibrium.

    Equals (-diag(M) + diag(rho) Lambda(rho)) (x) I_d.
    """
    if np.any(equilibrium.m != 0.0):
        raise DomainError("source momentum Jacobian is defined at zero-momentum equilibria")
    core = -np.diag(model.mobilities) + equilibrium.r[:, None] * mixture.lambda_matrix(
        model, equilibrium.r
    )
    return linalg.kron(core, np.eye(equilibrium.d))


@dataclass
class ConditionResult:
    name: str
    margin: float
    tolerance: float
    verdict: str
    worst_sample: object = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict.startswith("pass")

    def as_dict(self) -> dict:
        out = {
            "margin": self.margin,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "worst_sample": self.worst_sample,
        }
        out.update(self.extra)
        return out


@dataclass
class CertificateReport:
    equilibrium: CellState
    box: StateBox
    samples: int
    seed: int
    conditions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def as_dict(self) -> dict:
        return {
            "schema_version": 1,
            "equilibrium_densities": self.equilibrium.r.tolist(),
            "box": {
                "rho_lo": self.box.rho_lo.tolist(),
                "rho_hi": self.box.rho_hi.tolist(),
                "m_bound": self.box.m_bound.tolist(),
            },
            "samples": self.samples,
            "seed": self.seed,
            "overall": "pass" if self.passed else "fail",
            **{f"condition{i + 1}": c.as_dict() for i, c in enumerate(self.conditions)},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _check_source_invertibility(model, equilibrium) -> ConditionResult:
    jac = source_momentum_jacobian(model, equilibrium)
    svals = np.linalg.svd(jac, compute_uv=False)
    sym_eigs = np.linalg.eigvalsh(0.5 * (jac + jac.T))
    margin = float(svals[-1]) if svals.size else 0.0
    verdict = "pass" if margin > SINGULAR_VALUE_TOL else "fail"
    return ConditionResult(
        "source momentum Jacobian invertible",
        margin,
        SINGULAR_VALUE_TOL,
        verdict,
        extra={"sym_max_eigenvalue": float(sym_eigs[-1])},
    )


def _check_symmetrization(model, box, r_samples, m_samples) -> ConditionResult:
    worst = 0.0
    worst_sample = None
    d = m_samples.shape[2]
    for s in range(r_samples.shape[0]):
        state = CellState(r_samples[s], m_samples[s])
        hess = entropy_hessian(model, state)
        for alpha in range(d):
            a = hess @ flux_jacobian(model, state, alpha)
            scale = max(np.max(np.abs(a)), 1.0)
            asym = float(np.max(np.abs(a - a.T))) / scale
            if asym > worst:
                worst = asym
                worst_sample = {
                    "r": r_samples[s].tolist(),
                    "m": m_samples[s].tolist(),
                    "alpha": alpha,
                }
    verdict = "pass" if worst < SYMMETRY_TOL else "fail"
    return ConditionResult(
        "entropy Hessian symmetrizes flux Jacobians", worst, SYMMETRY_TOL, verdict, worst_sample
    )


def _check_dissipativity(model, equilibrium, r_samples, m_samples) -> ConditionResult:
    """Estimate the best constant c with (Deta(U)-Deta(Ueq)).S(U) <= -c |S(U)|^2."""
    used = 0
    c_est = np.inf
    worst_sample = None
    for s in range(r_samples.shape[0]):
        state = CellState(r_samples[s], m_samples[s])
        sv = mixture.source_vector(model, state)
        s2 = float(sv @ sv)
        if s2 == 0.0:
            continue
        used += 1
        pairing = mixture.dissipation_pairing(model, state, equilibrium)
        ratio = pairing / s2
        if ratio < c_est:
            c_est = ratio
            worst_sample = {"r": r_samples[s].tolist(), "m": m_samples[s].tolist()}
    if used == 0:
        return ConditionResult(
            "strict dissipativity constant",
            0.0,
            0.0,
            "inconclusive (no nonzero-source samples)",
            None,
        )
    verdict = "pass (sampled)" if c_est > 0.0 else "fail"
    return ConditionResult(
        "strict dissipativity constant", float(c_est), 0.0, verdict, worst_sample
    )


def _momentum_mass_of_eigenbasis(matrix: np.ndarray, n: int) -> tuple[float, float]:
    """Smallest momentum-block mass over all unit eigenvectors of ``matrix``.

    Eigenvalues are grouped when they agree to relative 1e-8; each group's
    eigenvectors are orthonormalized and the minimum is the smallest singular
    value of their momentum rows (rows n..end), i.e. the minimum over every
    rotation of the basis.
    """
    vals, vecs = np.linalg.eig(matrix)
    scale = max(np.max(np.abs(vals)), 1.0)
    order = np.argsort(vals.real + 1e-9 * vals.imag)
    vals, vecs = vals[order], vecs[:, order]
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or abs(vals[i] - vals[start]) > 1e-8 * scale:
            groups.append((start, i))
            start = i
    min_mass = np.inf
    worst_eig = None
    for lo, hi in groups:
        basis, _ = np.linalg.qr(vecs[:, lo:hi])
        mom = basis[n:, :]
        sv = np.linalg.svd(mom, compute_uv=False)
        mass = float(sv[-1]) if sv.size else 0.0
        if mass < min_mass:
            min_mass = mass
            worst_eig = vals[lo]
    return min_mass, worst_eig


def _check_kernel_condition(model, equilibrium, directions) -> ConditionResult:
    """No eigenvector of sum_a w_a DF_a(Ueq) may live in the density-only kernel."""
    n, d = equilibrium.n, equilibrium.d
    worst = np.inf
    worst_sample = None
    for w in directions:
        mat = sum(w[a] * flux_jacobian(model, equilibrium, a) for a in range(d))
        mass, eig = _momentum_mass_of_eigenbasis(np.asarray(mat), n)
        if mass < worst:
            worst = mass
            worst_sample = {"omega": np.asarray(w).tolist(), "eigenvalue": complex(eig).real}
    verdict = "pass" if worst > MOMENTUM_MASS_TOL else "fail"
    return ConditionResult(
        "flux eigenvectors avoid the source kernel",
        float(worst),
        MOMENTUM_MASS_TOL,
        verdict,
        worst_sample,
    )


def certify(
    model: MixtureModel,
    equilibrium: CellState,
    box: StateBox,
    sample_count: int = 10_000,
    seed: int = 0,
    sphere_count: int = 32,
) -> CertificateReport:
    """Run all four checks and assemble the report.

    A degenerate box (single point with zero momentum bound) makes the
    dissipativity estimate inconclusive rather than failed.
    """
    if np.any(equilibrium.m != 0.0):
        raise DomainError("certification equilibrium must have zero momenta")
    if not box.contains(equilibrium):
        raise DomainError("equilibrium must lie inside the sampling box")

    d = model.d
    r_samples, m_samples = box.sample(sample_count, d, seed=seed)
    directions = unit_sphere(d, 2 if d == 1 else sphere_count, seed=seed)

    conditions = [
        _check_source_invertibility(model, equilibrium),
        _check_symmetrization(model, box, r_samples, m_samples),
        _check_dissipativity(model, equilibrium, r_samples, m_samples),
        _check_kernel_condition(model, equilibrium, directions),
    ]
    return CertificateReport(equilibrium, box, sample_count, seed, conditions)
