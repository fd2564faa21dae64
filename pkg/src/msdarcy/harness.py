"""Convergence study across the stiffness parameter.

For each epsilon in a scenario the stiff hyperbolic system is run against the
shared nonlinear-diffusion limit solution on one grid with synchronized output
times. The distance is the cell-summed relative entropy phi(t); the error
terms of the dissipation estimate (friction remainder R1, cross-diffusion
remainder R2, flux pairing Q, expansion residual E) are integrated alongside,
and the observed order of phi(T) in epsilon is fitted at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, parabolic
from .errors import ConfigError, DomainError, MsdarcyError
from .hyperbolic import FieldSnapshot, Grid1D, HyperbolicConfig
from .hyperbolic import run as run_hyperbolic
from .mixture import MixtureModel, StateBox
from .parabolic import ParabolicConfig, reconstruct_momentum
from .parabolic import run as run_parabolic

__all__ = [
    "Scenario",
    "SweepRecord",
    "SweepResult",
    "UphillWitness",
    "bump_profile",
    "well_prepared_init",
    "phi",
    "l2_density_gap",
    "error_terms",
    "uniform_bound_monitors",
    "sweep",
    "uphill_probe",
]


def bump_profile(x: np.ndarray, center: float, radius: float) -> np.ndarray:
    """Compactly supported C^3 bump: (1 - s^2)^4 inside |s| < 1, exactly 0 outside.

    A polynomial profile keeps the higher derivatives moderate; spikier
    shapes (e.g. the classical mollifier) excite a large initial layer that
    buries the relaxation scaling at moderate epsilon.
    """
    s = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = (1.0 - s[inside] ** 2) ** 4
    return out


@dataclass(frozen=True)
class Scenario:
    """Everything one sweep needs: mixture, grid, perturbation, schedule."""

    model: MixtureModel
    grid: Grid1D
    farfield_density: np.ndarray
    amplitudes: np.ndarray
    center: float
    radius: float
    t_end: float
    epsilons: tuple
    well_prepared: bool = True
    cfl: float = 0.2
    splitting: str = "strang"
    spatial_order: int = 2
    safety: float = 0.9
    output_count: int = 10
    density_floor: float = 1e-9
    probe_epsilon: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float).reshape(self.model.n)
        far = np.asarray(self.farfield_density, dtype=float).reshape(self.model.n)
        if np.any(far <= 0.0):
            raise ConfigError("far-field densities must be positive")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "farfield_density", far)
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if self.grid.boundary == "farfield":
            if self.grid.farfield is None:
                raise ConfigError("scenario grid needs a far-field state")
            if not np.array_equal(self.grid.farfield.r, far):
                raise ConfigError("grid far-field state disagrees with the scenario far field")
        if self.radius <= 0.0:
            raise ConfigError("perturbation radius must be positive")
        if any(e <= 0.0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive")

    def output_times(self) -> np.ndarray:
        """Synchronized uniform schedule shared by both solvers."""
        return np.linspace(0.0, self.t_end, self.output_count + 1)

    def initial_density(self) -> np.ndarray:
        base = self.farfield_density[:, None]
        bump = bump_profile(self.grid.centers, self.center, self.radius)[None, :]
        r0 = base + self.amplitudes[:, None] * bump
        if np.any(r0 <= 0.0):
            raise ConfigError("bump perturbation drives a density non-positive")
        return r0

    def state_box(self, momentum_bound: float = 1.0) -> StateBox:
        r0 = self.initial_density()
        lo = 0.9 * r0.min(axis=1)
        hi = 1.1 * r0.max(axis=1)
        return StateBox(lo, hi, np.full(self.model.n, momentum_bound))


def well_prepared_init(scenario: Scenario, epsilon: float):
    """Initial pair: hyperbolic snapshot and limit density field.

    With ``well_prepared`` the hyperbolic momenta start on the limit manifold
    (the same discrete reconstruction the comparison uses), zeroed outside the
    perturbation support where the exact momentum vanishes; otherwise they
    start at zero.
    """
    r0 = scenario.initial_density()
    if scenario.well_prepared:
        mbar, _ = reconstruct_momentum(scenario.model, r0, scenario.grid, epsilon)
        outside = np.abs(scenario.grid.centers - scenario.center) >= scenario.radius
        m0 = mbar.copy()
        m0[:, outside] = 0.0
    else:
        m0 = np.zeros_like(r0)
    return FieldSnapshot(0.0, r0, m0), r0.copy()


def _relative_entropy_field(model, r, m, rbar, mbar):
    v = m / r
    vbar = mbar / rbar
    kin = 0.5 * np.sum(r * (v - vbar) ** 2, axis=0)
    relh = np.zeros(r.shape[1])
    for i, law in enumerate(model.pressure_laws):
        relh += law.relative_free_energy(r[i], rbar[i])
    return kin + relh


def phi(model: MixtureModel, r, m, rbar, mbar, dx: float) -> float:
    """Cell-summed relative entropy between the pair and the reconstruction.

    The far-field entropy shift cancels in the relative form, so this is the
    plain relative entropy summed over cells times dx; nonnegative, zero only
    for identical fields.
    """
    if r.shape != rbar.shape:
        raise DomainError("phi needs both solutions on one grid")
    return float(dx * np.sum(_relative_entropy_field(model, r, m, rbar, mbar)))


def l2_density_gap(r, rbar, dx: float) -> np.ndarray:
    """Per-species L2 norms of the density gap."""
    return np.sqrt(dx * np.sum((r - rbar) ** 2, axis=1))


def uniform_bound_monitors(model: MixtureModel, r, m, farfield, dx: float):
    """(K1, K2): max per-species L1 density deviation and shifted total entropy."""
    k1 = float(np.max(dx * np.sum(np.abs(r - farfield[:, None]), axis=1)))
    eta_cells = np.zeros(r.shape[1])
    shift = 0.0
    for i, law in enumerate(model.pressure_laws):
        eta_cells += 0.5 * m[i] ** 2 / r[i] + law.free_energy(r[i])
        shift += law.free_energy(farfield[i])
    k2 = float(dx * np.sum(eta_cells - shift))
    return k1, k2


def error_terms(
    model: MixtureModel,
    r,
    m,
    rbar,
    mbar,
    ebar,
    grid: Grid1D,
    epsilon: float,
) -> dict:
    """Space integrals of the dissipation-estimate error terms at one time.

    R1 is a weighted square and is asserted nonnegative on every evaluation.
    Q uses the epsilon-independent form of its first factor (the gradient of
    the limit velocity divided by epsilon), so no 1/epsilon cancellation is
    performed numerically.
    """
    dx = grid.dx
    v = m / r
    vbar = mbar / rbar
    dv = v - vbar

    r1_field = np.sum(model.mobilities[:, None] * r * dv**2, axis=0)
    r1 = float(dx * np.sum(r1_field))
    if r1 < -1e-12:
        raise MsdarcyError(f"R1 integral must be nonnegative, got {r1}")

    lam = (
        model.lam_const[:, :, None]
        + model.lam_di[:, :, None] * r[:, None, :]
        + model.lam_dj[:, :, None] * r[None, :, :]
    )
    lam[np.arange(model.n), np.arange(model.n), :] = 0.0
    dvv = v[:, None, :] - v[None, :, :]
    dvvbar = vbar[:, None, :] - vbar[None, :, :]
    drho = r - rbar
    term_a = r[:, None, :] * r[None, :, :] * (dvv - dvvbar) ** 2
    term_b = r[:, None, :] * dvvbar * dv[:, None, :] * drho[None, :, :]
    term_c = r[None, :, :] * dvvbar * dv[None, :, :] * drho[:, None, :]
    r2 = float(0.5 * dx * np.sum(lam * (term_a + term_b - term_c)))

    w = -mbar / epsilon
    grad_vbar_scaled = -linalg.grad_general(w / rbar, grid.dx, periodic=grid.periodic)
    rel_flux = np.zeros_like(r)
    for i, law in enumerate(model.pressure_laws):
        rel_flux[i] = r[i] * dv[i] ** 2 + law.relative_pressure(r[i], rbar[i])
    q = float(dx * np.sum(grad_vbar_scaled * rel_flux))

    e = float(dx * np.sum(ebar * (r / rbar) * dv))
    return {"R1": r1, "R2": r2, "Q": q, "E": e}


@dataclass
class SweepRecord:
    """Per-epsilon time series of the comparison metrics."""

    epsilon: float
    times: np.ndarray
    phi: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    q: np.ndarray
    e: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    l2_gap: np.ndarray
    failure: str | None = None

    @property
    def phi0(self) -> float:
        return float(self.phi[0])

    @property
    def phi_final(self) -> float:
        return float(self.phi[-1])

    @property
    def k_bound(self) -> float:
        """max over t of phi(t) / (phi(0) + eps^4)."""
        return float(np.max(self.phi / (self.phi0 + self.epsilon**4)))

    def time_integrals(self) -> dict:
        return {
            "abs_Q": float(np.trapezoid(np.abs(self.q), self.times)),
            "abs_E": float(np.trapezoid(np.abs(self.e), self.times)),
            "R_over_eps2": float(
                np.trapezoid(self.r1 + self.r2, self.times) / self.epsilon**2
            ),
        }


@dataclass
class SweepResult:
    scenario: Scenario
    records: list
    coupling_ratios: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def completed(self) -> list:
        return [rec for rec in self.records if rec.failure is None]

    @property
    def observed_order(self) -> float:
        done = self.completed
        if len(done) < 2:
            return float("nan")
        eps = np.array([rec.epsilon for rec in done])
        vals = np.array([max(rec.phi_final, 1e-300) for rec in done])
        return float(np.polyfit(np.log(eps), np.log(vals), 1)[0])

    @property
    def k_per_epsilon(self) -> np.ndarray:
        return np.array([rec.k_bound for rec in self.completed])

    @property
    def k_estimate(self) -> float:
        ks = self.k_per_epsilon
        return float(np.max(ks)) if ks.size else float("nan")

    @property
    def coupling_ok(self) -> bool:
        return bool(np.all(self.coupling_ratios >= 1.0))


def _coupling_ratios(scenario: Scenario) -> np.ndarray:
    """M_i / max_j max_box lambda_ij; affine coefficients peak at the upper corner."""
    model = scenario.model
    box = scenario.state_box()
    lam_max = (
        model.lam_const
        + model.lam_di * box.rho_hi[:, None]
        + model.lam_dj * box.rho_hi[None, :]
    )
    per_species = lam_max.max(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(per_species > 0.0, model.mobilities / per_species, np.inf)


def sweep(scenario: Scenario) -> SweepResult:
    """Run the full epsilon study for one scenario.

    The limit solution is epsilon-free and computed once; each epsilon gets a
    stiff run against it. A run that aborts (vacuum) is kept as a partial
    record with its failure annotation.
    """
    if len(scenario.epsilons) < 3:
        raise ConfigError("sweep needs at least 3 epsilon values")
    eps_arr = np.asarray(scenario.epsilons)
    if not np.all(eps_arr[:-1] > eps_arr[1:]):
        raise ConfigError("epsilons must decrease")

    ratios = _coupling_ratios(scenario)
    warnings = []
    if np.any(ratios < 1.0):
        warnings.append(
            "weak-coupling check failed: min M_i / max lambda_ij = "
            f"{float(np.min(ratios)):.3g} < 1; the estimate may not apply"
        )

    model, grid = scenario.model, scenario.grid
    times = scenario.output_times()
    par_cfg = ParabolicConfig(
        t_end=scenario.t_end,
        safety=scenario.safety,
        output_times=tuple(times),
        density_floor=scenario.density_floor,
    )
    limit = run_parabolic(model, scenario.initial_density(), grid, par_cfg)
    rbar_series = {round(s.t, 12): s.r for s in limit.snapshots}

    records = []
    for eps in scenario.epsilons:
        snap0, _ = well_prepared_init(scenario, eps)
        cfg = HyperbolicConfig(
            epsilon=eps,
            cfl=scenario.cfl,
            t_end=scenario.t_end,
            density_floor=scenario.density_floor,
            splitting=scenario.splitting,
            spatial_order=scenario.spatial_order,
            output_times=tuple(times),
        )
        try:
            result = run_hyperbolic(model, snap0, grid, cfg)
            failure = None
            snaps = result.snapshots
        except MsdarcyError as exc:
            failure = str(exc)
            snaps = [snap0]

        rows = {k: [] for k in ("phi", "R1", "R2", "Q", "E", "K1", "K2", "gap")}
        t_used = []
        for snap in snaps:
            key = round(snap.t, 12)
            if key not in rbar_series:
                continue
            rbar = rbar_series[key]
            mbar, ebar = reconstruct_momentum(model, rbar, grid, eps)
            rows["phi"].append(phi(model, snap.r, snap.m, rbar, mbar, grid.dx))
            terms = error_terms(model, snap.r, snap.m, rbar, mbar, ebar, grid, eps)
            for name in ("R1", "R2", "Q", "E"):
                rows[name].append(terms[name])
            k1, k2 = uniform_bound_monitors(
                model, snap.r, snap.m, scenario.farfield_density, grid.dx
            )
            rows["K1"].append(k1)
            rows["K2"].append(k2)
            rows["gap"].append(
                float(np.linalg.norm(l2_density_gap(snap.r, rbar, grid.dx)))
            )
            t_used.append(snap.t)
        records.append(
            SweepRecord(
                epsilon=eps,
                times=np.asarray(t_used),
                phi=np.asarray(rows["phi"]),
                r1=np.asarray(rows["R1"]),
                r2=np.asarray(rows["R2"]),
                q=np.asarray(rows["Q"]),
                e=np.asarray(rows["E"]),
                k1=np.asarray(rows["K1"]),
                k2=np.asarray(rows["K2"]),
                l2_gap=np.asarray(rows["gap"]),
                failure=failure,
            )
        )
    return SweepResult(scenario, records, ratios, warnings)


@dataclass(frozen=True)
class UphillWitness:
    t: float
    x: float
    species: int
    value: float


def _density_gradient(r: np.ndarray, grid: Grid1D) -> np.ndarray:
    return linalg.grad_general(r, grid.dx, periodic=grid.periodic)


def uphill_probe(
    scenario: Scenario,
    solver: str = "hyperbolic",
    threshold: float = 1e-8,
) -> list:
    """Scan a run for cells where a species' mass flux ascends its own gradient.

    Returns all (t, x, species, m_i * d_x rho_i) witnesses above the
    threshold; an empty list means none were found.
    """
    model, grid = scenario.model, scenario.grid
    times = scenario.output_times()
    eps = scenario.probe_epsilon
    pairs = []
    if solver == "hyperbolic":
        snap0, _ = well_prepared_init(scenario, eps)
        cfg = HyperbolicConfig(
            epsilon=eps,
            cfl=scenario.cfl,
            t_end=scenario.t_end,
            density_floor=scenario.density_floor,
            splitting=scenario.splitting,
            spatial_order=scenario.spatial_order,
            output_times=tuple(times),
        )
        for snap in run_hyperbolic(model, snap0, grid, cfg).snapshots:
            pairs.append((snap.t, snap.r, snap.m))
    elif solver == "parabolic":
        par_cfg = ParabolicConfig(
            t_end=scenario.t_end,
            safety=scenario.safety,
            output_times=tuple(times),
            density_floor=scenario.density_floor,
        )
        for snap in run_parabolic(model, scenario.initial_density(), grid, par_cfg).snapshots:
            mbar, _ = reconstruct_momentum(model, snap.r, grid, eps)
            pairs.append((snap.t, snap.r, mbar))
    else:
        raise ConfigError(f"unknown probe solver {solver!r}")

    witnesses = []
    xs = grid.centers
    for t, r, m in pairs:
        ascent = m * _density_gradient(r, grid)
        hits = np.argwhere(ascent > threshold)
        for i, c in hits:
            witnesses.append(UphillWitness(float(t), float(xs[c]), int(i), float(ascent[i, c])))
    return witnesses
