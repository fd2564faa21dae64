"""Seeded identity battery over the thermodynamic core.

Each check evaluates a structural identity on sampled states and reports the
worst residual; the CLI `identities` subcommand and acceptance criterion 1
assert the documented tolerances. Finite-difference comparisons carry their
own looser tolerance (1e-6), everything else 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mixture
from .certificate import entropy_hessian, flux_jacobian
from .mixture import CellState, MixtureModel, StateBox

__all__ = ["IdentityCheck", "run_battery", "DEFAULT_TOL", "FD_TOL"]

DEFAULT_TOL = 1e-10
FD_TOL = 1e-6


@dataclass
class IdentityCheck:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        return f"{self.name:<42s} {self.residual:12.3e} < {self.tolerance:.0e}  {status}"


def _sample_states(box: StateBox, d: int, count: int, seed: int):
    return box.sample(count, d, seed=seed)


def gibbs_duhem(model: MixtureModel, count: int, seed: int) -> IdentityCheck:
    """|rho h'(rho) - h(rho) - p(rho)| over log-spaced densities in [1e-3, 1e3]."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for law in model.pressure_laws:
        rho = 10.0 ** rng.uniform(-3.0, 3.0, count)
        res = np.abs(rho * law.free_energy_prime(rho) - law.free_energy(rho) - law.pressure(rho))
        worst = max(worst, float(np.max(res / np.maximum(1.0, law.pressure(rho)))))
    return IdentityCheck("Gibbs-Duhem residual", worst, 1e-12)


def pressure_growth(model: MixtureModel, count: int, seed: int) -> IdentityCheck:
    """p''(rho) <= a p'(rho)/rho with a = gamma, sampled."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for law in model.pressure_laws:
        rho = 10.0 ** rng.uniform(-3.0, 3.0, count)
        excess = law.d2pressure(rho) - law.growth_exponent * law.dpressure(rho) / rho
        worst = max(worst, float(np.max(excess / np.maximum(1.0, law.dpressure(rho) / rho))))
    return IdentityCheck("pressure growth condition", max(worst, 0.0), DEFAULT_TOL)


def lambda_nsd(model: MixtureModel, box: StateBox, count: int, seed: int) -> IdentityCheck:
    """Largest eigenvalue of the (symmetric) coupling matrix over box samples."""
    r_s, _ = _sample_states(box, model.d, count, seed + 2)
    worst = -np.inf
    asym = 0.0
    for r in r_s:
        lam = mixture.lambda_matrix(model, r)
        asym = max(asym, float(np.max(np.abs(lam - lam.T))))
        worst = max(worst, float(np.linalg.eigvalsh(lam)[-1]))
    return IdentityCheck("coupling matrix NSD (max eig, asym)", max(worst, asym, 0.0), 1e-12)


def stefan_matrix_structure(model: MixtureModel, box: StateBox, count: int, seed: int):
    """Zero row/column sums, nonpositive off-diagonal, PSD."""
    r_s, _ = _sample_states(box, model.d, count, seed + 3)
    worst = 0.0
    for r in r_s:
        tau = mixture.maxwell_stefan_matrix(model, r)
        worst = max(worst, float(np.max(np.abs(tau.sum(axis=0)))))
        worst = max(worst, float(np.max(np.abs(tau.sum(axis=1)))))
        off = tau - np.diag(np.diag(tau))
        worst = max(worst, float(np.max(off, initial=0.0)))
        worst = max(worst, float(max(0.0, -np.linalg.eigvalsh(tau)[0])))
    return IdentityCheck("friction matrix structure", worst, 1e-12)


def exchange_conservation(model: MixtureModel, box: StateBox, count: int, seed: int):
    """The pairwise exchange part of the source sums to zero over species."""
    stripped = MixtureModel(
        model.pressure_laws,
        np.zeros(model.n),
        model.lam_const,
        model.lam_di,
        model.lam_dj,
        d=model.d,
    )
    r_s, m_s = _sample_states(box, model.d, count, seed + 4)
    worst = 0.0
    for r, m in zip(r_s, m_s):
        s = mixture.source(stripped, CellState(r, m))
        scale = max(1.0, float(np.max(np.abs(s))))
        worst = max(worst, float(np.max(np.abs(s.sum(axis=0)))) / scale)
    return IdentityCheck("exchange momentum conservation", worst, 1e-12)


def dissipation_identity(model: MixtureModel, box: StateBox, count: int, seed: int):
    """Pairing -(Deta(U)-Deta(Ueq)).S(U) against the closed-form dissipation."""
    r_s, m_s = _sample_states(box, model.d, count, seed + 5)
    eq = CellState(0.5 * (box.rho_lo + box.rho_hi), np.zeros((model.n, model.d)))
    worst = 0.0
    for r, m in zip(r_s, m_s):
        state = CellState(r, m)
        lhs = mixture.dissipation_pairing(model, state, eq)
        rhs = float(
            np.sum(model.mobilities * np.sum(state.m**2, axis=1) / state.r)
        ) + mixture.entropy_production(model, state)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return IdentityCheck("dissipation identity", worst, 1e-12)


def entropy_flux_compatibility(model: MixtureModel, box: StateBox, count: int, seed: int):
    """Deta(U) DF_a(U) against central finite differences of the entropy flux."""
    r_s, m_s = _sample_states(box, model.d, min(count, 200), seed + 6)
    worst = 0.0
    n, d = model.n, model.d
    for r, m in zip(r_s, m_s):
        state = CellState(r, m)
        grad = mixture.entropy_gradient(model, state)
        u0 = state.as_vector()
        for alpha in range(d):
            lhs = grad @ flux_jacobian(model, state, alpha)
            fd = np.zeros_like(lhs)
            for j in range(n * (d + 1)):
                h = 1e-6 * max(1.0, abs(u0[j]))
                up = u0.copy()
                up[j] += h
                um = u0.copy()
                um[j] -= h
                qp = mixture.entropy_flux(model, CellState.from_vector(up, n, d))[alpha]
                qm = mixture.entropy_flux(model, CellState.from_vector(um, n, d))[alpha]
                fd[j] = (qp - qm) / (2.0 * h)
            scale = max(1.0, float(np.max(np.abs(lhs))))
            worst = max(worst, float(np.max(np.abs(lhs - fd))) / scale)
    return IdentityCheck("entropy flux compatibility (FD)", worst, FD_TOL)


def hessian_fd(model: MixtureModel, box: StateBox, count: int, seed: int):
    """Assembled entropy Hessian against finite differences of the gradient."""
    r_s, m_s = _sample_states(box, model.d, min(count, 100), seed + 7)
    worst = 0.0
    n, d = model.n, model.d
    for r, m in zip(r_s, m_s):
        state = CellState(r, m)
        hess = entropy_hessian(model, state)
        u0 = state.as_vector()
        fd = np.zeros_like(hess)
        for j in range(n * (d + 1)):
            h = 1e-6 * max(1.0, abs(u0[j]))
            up = u0.copy()
            up[j] += h
            um = u0.copy()
            um[j] -= h
            gp = mixture.entropy_gradient(model, CellState.from_vector(up, n, d))
            gm = mixture.entropy_gradient(model, CellState.from_vector(um, n, d))
            fd[:, j] = (gp - gm) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(hess))))
        worst = max(worst, float(np.max(np.abs(hess - fd))) / scale)
    return IdentityCheck("entropy Hessian vs FD", worst, FD_TOL)


def mobility_positivity(model: MixtureModel, box: StateBox, count: int, seed: int):
    """Quadratic-form positivity of the mobility matrix over box samples.

    The residual is how far the symmetric part drops below zero. The sharper
    bound min_x x'B~x >= min M_i does not hold for unequal densities (the
    symmetric part of diag(rho) Lambda can be indefinite), so the margin
    against min M is reported but not asserted.
    """
    r_s, _ = _sample_states(box, model.d, count, seed + 8)
    worst = 0.0
    margin_vs_min_m = np.inf
    for r in r_s:
        bt = mixture.mobility_matrix(model, r, check=False)
        lam_min = float(np.linalg.eigvalsh(0.5 * (bt + bt.T))[0])
        worst = max(worst, -lam_min)
        margin_vs_min_m = min(margin_vs_min_m, lam_min - float(np.min(model.mobilities)))
    check = IdentityCheck("mobility quadratic-form positivity", max(worst, 0.0), DEFAULT_TOL)
    check.min_m_margin = margin_vs_min_m
    return check


def relative_entropy_positivity(model: MixtureModel, box: StateBox, count: int, seed: int):
    """eta(U|Ubar) >= c |U - Ubar|^2 with the sampled convexity constant."""
    c, _ = mixture.convexity_bounds(model, box, samples=64, seed=seed + 9)
    r_s, m_s = _sample_states(box, model.d, count, seed + 10)
    half = count // 2
    worst = 0.0
    for i in range(half):
        a = CellState(r_s[i], m_s[i])
        b = CellState(r_s[half + i], m_s[half + i])
        rel = mixture.relative_entropy(model, a, b)
        du2 = float(np.sum((a.as_vector() - b.as_vector()) ** 2))
        worst = max(worst, (0.999 * c * du2 - rel) / max(1.0, rel))
    return IdentityCheck("relative entropy convexity bound", max(worst, 0.0), DEFAULT_TOL)


def run_battery(model: MixtureModel, box: StateBox, count: int = 1000, seed: int = 0):
    """All checks on one model/box; deterministic for a fixed seed."""
    return [
        gibbs_duhem(model, count, seed),
        pressure_growth(model, count, seed),
        lambda_nsd(model, box, count, seed),
        stefan_matrix_structure(model, box, count, seed),
        exchange_conservation(model, box, count, seed),
        dissipation_identity(model, box, count, seed),
        entropy_flux_compatibility(model, box, count, seed),
        hessian_fd(model, box, count, seed),
        mobility_positivity(model, box, count, seed),
        relative_entropy_positivity(model, box, count, seed),
    ]
