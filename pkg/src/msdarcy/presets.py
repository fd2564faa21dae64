"""Shipped models and scenarios used by the CLI defaults and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .harness import Scenario
from .hyperbolic import FieldSnapshot, Grid1D, HyperbolicConfig
from .mixture import CellState, MixtureModel, PressureLaw, StateBox

__all__ = [
    "default_two_species_model",
    "default_certificate_box",
    "degenerate_model",
    "single_species_scenario",
    "two_species_scenario",
    "entropy_audit_setup",
    "uphill_scenario",
    "uphill_control_scenario",
]


def default_two_species_model() -> MixtureModel:
    """The reference certification mixture: M = (1, 2), constant lambda12 = 1."""
    laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
    return MixtureModel.constant_lambda(laws, [1.0, 2.0], 1.0)


def default_certificate_box() -> StateBox:
    return StateBox([0.5, 0.5], [2.0, 2.0], [1.0, 1.0])


def degenerate_model() -> MixtureModel:
    """No damping, no friction; certification condition 1 must fail on it."""
    laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
    return MixtureModel.constant_lambda(laws, [0.0, 0.0], 0.0)


def _farfield_grid(farfield, x_min, x_max, n_cells) -> Grid1D:
    far = np.asarray(farfield, dtype=float)
    state = CellState(far, np.zeros((far.size, 1)))
    return Grid1D(x_min, x_max, n_cells, boundary="farfield", farfield=state)


def single_species_scenario(
    n_cells: int = 1024,
    epsilons=(0.2, 0.1, 0.05),
    t_end: float = 0.5,
    well_prepared: bool = True,
) -> Scenario:
    """Single species, M = 1, k = 1, gamma = 2: the classical damped-Euler limit."""
    model = MixtureModel.constant_lambda([PressureLaw(1.0, 2.0)], [1.0], 0.0)
    return Scenario(
        model=model,
        grid=_farfield_grid([1.0], -3.0, 3.0, n_cells),
        farfield_density=[1.0],
        amplitudes=[0.15],
        center=0.0,
        radius=0.5,
        t_end=t_end,
        epsilons=tuple(epsilons),
        well_prepared=well_prepared,
    )


def two_species_scenario(
    n_cells: int = 1024,
    epsilons=(0.2, 0.1, 0.05),
    t_end: float = 0.5,
    well_prepared: bool = True,
) -> Scenario:
    """Two coupled species with weak-coupling ratios (2, 3): M = (1, 1.5), lambda = 0.5."""
    laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
    model = MixtureModel.constant_lambda(laws, [1.0, 1.5], 0.5)
    return Scenario(
        model=model,
        grid=_farfield_grid([1.0, 1.0], -3.0, 3.0, n_cells),
        farfield_density=[1.0, 1.0],
        amplitudes=[0.15, -0.1],
        center=0.0,
        radius=0.5,
        t_end=t_end,
        epsilons=tuple(epsilons),
        well_prepared=well_prepared,
    )


def entropy_audit_setup(n_cells: int = 512, t_end: float = 0.25):
    """Smooth periodic two-species run at epsilon = 1 for the entropy audit.

    Mobilities are sized so the physical dissipation dominates the numerical
    flux dissipation by two orders of magnitude at the shipped resolution.
    """
    laws = (PressureLaw(1.0, 2.0), PressureLaw(0.8, 1.4))
    model = MixtureModel.constant_lambda(laws, [2.0, 3.0], 1.0)
    grid = Grid1D(-2.0, 2.0, n_cells, boundary="periodic")
    x = grid.centers
    length = grid.x_max - grid.x_min
    r = np.stack(
        [
            1.0 + 0.2 * np.sin(2.0 * np.pi * x / length),
            1.2 + 0.15 * np.cos(2.0 * np.pi * x / length),
        ]
    )
    m = np.stack(
        [
            0.3 * np.cos(2.0 * np.pi * x / length),
            -0.2 * np.sin(4.0 * np.pi * x / length),
        ]
    )
    config = HyperbolicConfig(epsilon=1.0, cfl=0.9, t_end=t_end, splitting="strang")
    return model, grid, FieldSnapshot(0.0, r, m), config


def uphill_scenario(n_cells: int = 256, t_end: float = 0.4) -> Scenario:
    """Three species with strongly asymmetric friction; species 2 starts uniform.

    Species 1 carries a pressure bump and drags the initially uniform species 2
    along through the strong 1-2 friction while the weakly coupled species 3
    stays put, the classic cross-diffusion configuration in which a species
    flows against its own gradient.
    """
    laws = (PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0), PressureLaw(1.0, 2.0))
    lam = np.array(
        [
            [0.0, 8.0, 0.2],
            [8.0, 0.0, 0.2],
            [0.2, 0.2, 0.0],
        ]
    )
    model = MixtureModel.constant_lambda(laws, [0.5, 0.5, 0.5], lam)
    return Scenario(
        model=model,
        grid=_farfield_grid([1.0, 1.0, 1.0], -2.0, 2.0, n_cells),
        farfield_density=[1.0, 1.0, 1.0],
        amplitudes=[0.5, 0.0, -0.3],
        center=0.0,
        radius=0.6,
        t_end=t_end,
        epsilons=(1.0, 0.5, 0.25),
        well_prepared=False,
        spatial_order=1,
        probe_epsilon=1.0,
    )


def uphill_control_scenario(n_cells: int = 256, t_end: float = 0.4) -> Scenario:
    """Same data, friction off: decoupled porous-medium flow, never uphill."""
    base = uphill_scenario(n_cells=n_cells, t_end=t_end)
    model = MixtureModel.constant_lambda(base.model.pressure_laws, base.model.mobilities, 0.0)
    return Scenario(
        model=model,
        grid=base.grid,
        farfield_density=base.farfield_density,
        amplitudes=base.amplitudes,
        center=base.center,
        radius=base.radius,
        t_end=base.t_end,
        epsilons=base.epsilons,
        well_prepared=False,
        spatial_order=1,
        probe_epsilon=base.probe_epsilon,
    )
