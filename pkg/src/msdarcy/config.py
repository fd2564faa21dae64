"""Sectioned key-value run configuration.

Format: INI-like sections ([mixture], [species.i], [lambda.i.j], [grid],
[scenario], [hyperbolic], [parabolic], [sweep], [certificate], [uphill]),
`key = value` lines, `#` comments. Parsing is strict: unknown sections or
keys are errors, as are asymmetric lambda tables and out-of-range species
indices. A parsed config renders back to canonical text (round-trip safe,
17 significant digits).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .harness import Scenario
from .hyperbolic import Grid1D, HyperbolicConfig
from .mixture import CellState, MixtureModel, PressureLaw, StateBox
from .parabolic import ParabolicConfig

__all__ = ["RunConfig", "parse_config", "parse_text", "render"]

_SCALAR_SECTIONS = {
    "mixture": {"species", "dimension"},
    "grid": {"x_min", "x_max", "cells", "boundary"},
    "scenario": {"farfield", "amplitude", "center", "radius", "well_prepared"},
    "hyperbolic": {
        "epsilon",
        "cfl",
        "t_end",
        "density_floor",
        "splitting",
        "order",
        "outputs",
    },
    "parabolic": {"t_end", "safety", "outputs", "density_floor"},
    "sweep": {"epsilons", "t_end", "cfl", "splitting", "order", "outputs", "safety"},
    "certificate": {"rho_lo", "rho_hi", "m_bound", "samples"},
    "uphill": {"solver", "threshold", "epsilon", "t_end"},
}
_SPECIES_KEYS = {"k", "gamma", "mobility"}
_LAMBDA_KEYS = {"const", "coef_i", "coef_j"}


@dataclass
class RunConfig:
    """Validated union of everything the CLI subcommands need."""

    model: MixtureModel
    grid: Grid1D
    farfield: np.ndarray
    amplitudes: np.ndarray
    center: float
    radius: float
    well_prepared: bool
    hyperbolic: HyperbolicConfig
    parabolic: ParabolicConfig
    sweep_epsilons: tuple
    sweep_t_end: float
    sweep_cfl: float
    sweep_splitting: str
    sweep_order: int
    sweep_outputs: int
    sweep_safety: float
    box: StateBox
    certificate_samples: int
    uphill_solver: str
    uphill_threshold: float
    uphill_epsilon: float
    uphill_t_end: float
    raw: dict = field(default_factory=dict, repr=False)

    def scenario(self, sweep: bool = False) -> Scenario:
        """Scenario view of this config; sweep=True uses the [sweep] schedule."""
        return Scenario(
            model=self.model,
            grid=self.grid,
            farfield_density=self.farfield,
            amplitudes=self.amplitudes,
            center=self.center,
            radius=self.radius,
            t_end=self.sweep_t_end if sweep else self.uphill_t_end,
            epsilons=self.sweep_epsilons,
            well_prepared=self.well_prepared,
            cfl=self.sweep_cfl if sweep else self.hyperbolic.cfl,
            splitting=self.sweep_splitting if sweep else self.hyperbolic.splitting,
            spatial_order=self.sweep_order if sweep else self.hyperbolic.spatial_order,
            safety=self.sweep_safety if sweep else self.parabolic.safety,
            output_count=self.sweep_outputs,
            density_floor=self.hyperbolic.density_floor,
            probe_epsilon=self.uphill_epsilon,
        )


def _tokenize(text: str, path):
    sections: dict = {}
    order: list = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", path=path, line=lineno)
            name = line[1:-1].strip()
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", path=path, line=lineno)
            sections[name] = {}
            order.append(name)
            current = name
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", path=path, line=lineno)
        if current is None:
            raise ConfigError("key outside any section", path=path, line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", path=path, line=lineno)
        if key in sections[current]:
            raise ConfigError(
                f"duplicate key in [{current}]", path=path, line=lineno, key=key
            )
        sections[current][key] = (value, lineno)
    return sections, order


def _known_section(name: str, n: int, path, sections):
    if name in _SCALAR_SECTIONS:
        return
    parts = name.split(".")
    if parts[0] == "species" and len(parts) == 2:
        idx = _int_token(parts[1], path, f"[{name}]")
        if not 1 <= idx <= n:
            raise ConfigError(f"species index {idx} out of range 1..{n}", path=path, key=name)
        return
    if parts[0] == "lambda" and len(parts) == 3:
        i = _int_token(parts[1], path, f"[{name}]")
        j = _int_token(parts[2], path, f"[{name}]")
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise ConfigError(
                f"lambda indices ({i},{j}) must be distinct species in 1..{n}",
                path=path,
                key=name,
            )
        return
    raise ConfigError(f"unknown section [{name}]", path=path, key=name)


def _int_token(tok: str, path, where: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"expected an integer in {where}, got {tok!r}", path=path) from None


def _get(sections, section, key, conv, default=None, path=None):
    entry = sections.get(section, {}).get(key)
    if entry is None:
        if default is None:
            raise ConfigError(f"missing key '{key}'", path=path, key=f"{section}.{key}")
        return default
    value, lineno = entry
    try:
        return conv(value)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(
            f"bad value {value!r}: {exc}", path=path, line=lineno, key=f"{section}.{key}"
        ) from None


def _floats(value: str) -> np.ndarray:
    return np.array([float(tok) for tok in value.split()])


def _bool(value: str) -> bool:
    low = value.lower()
    if low in {"true", "yes", "1", "on"}:
        return True
    if low in {"false", "no", "0", "off"}:
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_text(text: str, path=None) -> RunConfig:
    sections, _ = _tokenize(text, path)

    n = _get(sections, "mixture", "species", int, path=path)
    if n < 1:
        raise ConfigError("species count must be >= 1", path=path, key="mixture.species")
    d = _get(sections, "mixture", "dimension", int, default=1, path=path)
    for name in sections:
        _known_section(name, n, path, sections)
    for name, entries in sections.items():
        if name in _SCALAR_SECTIONS:
            allowed = _SCALAR_SECTIONS[name]
        elif name.startswith("species."):
            allowed = _SPECIES_KEYS
        else:
            allowed = _LAMBDA_KEYS
        for key, (_, lineno) in entries.items():
            if key not in allowed:
                raise ConfigError(
                    f"unknown key '{key}' (allowed: {sorted(allowed)})",
                    path=path,
                    line=lineno,
                    key=f"{name}.{key}",
                )

    laws = []
    mob = np.empty(n)
    for i in range(1, n + 1):
        sec = f"species.{i}"
        if sec not in sections:
            raise ConfigError(f"missing section [{sec}]", path=path, key=sec)
        k = _get(sections, sec, "k", float, path=path)
        gamma = _get(sections, sec, "gamma", float, path=path)
        if gamma < 1.0:
            raise ConfigError(
                f"gamma must be >= 1 (pressure growth condition), got {gamma}",
                path=path,
                key=f"{sec}.gamma",
            )
        if k <= 0.0:
            raise ConfigError(f"k must be positive, got {k}", path=path, key=f"{sec}.k")
        laws.append(PressureLaw(k, gamma))
        mob[i - 1] = _get(sections, sec, "mobility", float, path=path)
        if mob[i - 1] < 0.0:
            raise ConfigError("mobility must be >= 0", path=path, key=f"{sec}.mobility")

    lam0 = np.zeros((n, n))
    lami = np.zeros((n, n))
    lamj = np.zeros((n, n))
    given = {}
    for name in sections:
        if not name.startswith("lambda."):
            continue
        _, si, sj = name.split(".")
        i, j = int(si) - 1, int(sj) - 1
        triple = (
            _get(sections, name, "const", float, default=0.0, path=path),
            _get(sections, name, "coef_i", float, default=0.0, path=path),
            _get(sections, name, "coef_j", float, default=0.0, path=path),
        )
        if any(v < 0.0 for v in triple):
            raise ConfigError(
                "lambda coefficients must be >= 0", path=path, key=name
            )
        given[(i, j)] = triple
    for (i, j), (c0, ci, cj) in given.items():
        mirror = given.get((j, i))
        if mirror is not None and mirror != (c0, cj, ci):
            raise ConfigError(
                f"asymmetric friction table: [lambda.{i + 1}.{j + 1}] and "
                f"[lambda.{j + 1}.{i + 1}] disagree",
                path=path,
                key=f"lambda.{i + 1}.{j + 1}",
            )
        lam0[i, j] = lam0[j, i] = c0
        lami[i, j], lamj[i, j] = ci, cj
        lami[j, i], lamj[j, i] = cj, ci
    model = MixtureModel(tuple(laws), mob, lam0, lami, lamj, d=d)

    x_min = _get(sections, "grid", "x_min", float, default=-3.0, path=path)
    x_max = _get(sections, "grid", "x_max", float, default=3.0, path=path)
    cells = _get(sections, "grid", "cells", int, default=256, path=path)
    boundary = _get(sections, "grid", "boundary", str, default="farfield", path=path)

    farfield = _get(sections, "scenario", "farfield", _floats, default=np.ones(n), path=path)
    if farfield.size == 1:
        farfield = np.full(n, farfield[0])
    if farfield.size != n:
        raise ConfigError(
            f"farfield needs {n} entries, got {farfield.size}", path=path, key="scenario.farfield"
        )
    amplitude = _get(sections, "scenario", "amplitude", _floats, default=np.zeros(n), path=path)
    if amplitude.size == 1:
        amplitude = np.full(n, amplitude[0])
    if amplitude.size != n:
        raise ConfigError(
            f"amplitude needs {n} entries, got {amplitude.size}",
            path=path,
            key="scenario.amplitude",
        )
    center = _get(sections, "scenario", "center", float, default=0.0, path=path)
    radius = _get(sections, "scenario", "radius", float, default=0.5, path=path)
    well_prepared = _get(sections, "scenario", "well_prepared", _bool, default=True, path=path)

    if boundary == "farfield":
        grid = Grid1D(
            x_min, x_max, cells, boundary="farfield",
            farfield=CellState(farfield, np.zeros((n, 1))),
        )
    else:
        grid = Grid1D(x_min, x_max, cells, boundary=boundary)

    hyp = HyperbolicConfig(
        epsilon=_get(sections, "hyperbolic", "epsilon", float, default=1.0, path=path),
        cfl=_get(sections, "hyperbolic", "cfl", float, default=0.9, path=path),
        t_end=_get(sections, "hyperbolic", "t_end", float, default=0.5, path=path),
        density_floor=_get(
            sections, "hyperbolic", "density_floor", float, default=1e-12, path=path
        ),
        splitting=_get(sections, "hyperbolic", "splitting", str, default="strang", path=path),
        spatial_order=_get(sections, "hyperbolic", "order", int, default=1, path=path),
    )
    n_out = _get(sections, "hyperbolic", "outputs", int, default=10, path=path)
    hyp = HyperbolicConfig(
        epsilon=hyp.epsilon,
        cfl=hyp.cfl,
        t_end=hyp.t_end,
        density_floor=hyp.density_floor,
        splitting=hyp.splitting,
        spatial_order=hyp.spatial_order,
        output_times=tuple(np.linspace(0.0, hyp.t_end, n_out + 1)[1:]),
    )
    par = ParabolicConfig(
        t_end=_get(sections, "parabolic", "t_end", float, default=0.5, path=path),
        safety=_get(sections, "parabolic", "safety", float, default=0.9, path=path),
        density_floor=_get(
            sections, "parabolic", "density_floor", float, default=1e-12, path=path
        ),
    )
    p_out = _get(sections, "parabolic", "outputs", int, default=10, path=path)
    par = ParabolicConfig(
        t_end=par.t_end,
        safety=par.safety,
        output_times=tuple(np.linspace(0.0, par.t_end, p_out + 1)[1:]),
        density_floor=par.density_floor,
    )

    eps_list = _get(
        sections, "sweep", "epsilons", _floats, default=np.array([0.2, 0.1, 0.05]), path=path
    )
    rho_lo = _get(
        sections, "certificate", "rho_lo", _floats, default=0.5 * farfield, path=path
    )
    rho_hi = _get(
        sections, "certificate", "rho_hi", _floats, default=2.0 * farfield, path=path
    )
    m_bound = _get(sections, "certificate", "m_bound", _floats, default=np.ones(n), path=path)
    for name, arr in (("rho_lo", rho_lo), ("rho_hi", rho_hi), ("m_bound", m_bound)):
        if arr.size == 1:
            arr = np.full(n, arr[0])
        if arr.size != n:
            raise ConfigError(
                f"{name} needs {n} entries", path=path, key=f"certificate.{name}"
            )
        if name == "rho_lo":
            rho_lo = arr
        elif name == "rho_hi":
            rho_hi = arr
        else:
            m_bound = arr
    box = StateBox(rho_lo, rho_hi, m_bound)

    solver = _get(sections, "uphill", "solver", str, default="hyperbolic", path=path)
    if solver not in {"hyperbolic", "parabolic"}:
        raise ConfigError(f"unknown probe solver {solver!r}", path=path, key="uphill.solver")

    return RunConfig(
        model=model,
        grid=grid,
        farfield=farfield,
        amplitudes=amplitude,
        center=center,
        radius=radius,
        well_prepared=well_prepared,
        hyperbolic=hyp,
        parabolic=par,
        sweep_epsilons=tuple(float(e) for e in eps_list),
        sweep_t_end=_get(sections, "sweep", "t_end", float, default=0.5, path=path),
        sweep_cfl=_get(sections, "sweep", "cfl", float, default=0.2, path=path),
        sweep_splitting=_get(sections, "sweep", "splitting", str, default="strang", path=path),
        sweep_order=_get(sections, "sweep", "order", int, default=2, path=path),
        sweep_outputs=_get(sections, "sweep", "outputs", int, default=10, path=path),
        sweep_safety=_get(sections, "sweep", "safety", float, default=0.9, path=path),
        box=box,
        certificate_samples=_get(sections, "certificate", "samples", int, default=10000, path=path),
        uphill_solver=solver,
        uphill_threshold=_get(sections, "uphill", "threshold", float, default=1e-8, path=path),
        uphill_epsilon=_get(sections, "uphill", "epsilon", float, default=1.0, path=path),
        uphill_t_end=_get(sections, "uphill", "t_end", float, default=0.4, path=path),
        raw={k: {kk: vv[0] for kk, vv in v.items()} for k, v in sections.items()},
    )


def parse_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from None
    return parse_text(text, path=path)


def _f(x: float) -> str:
    return format(float(x), ".17g")


def render(cfg: RunConfig) -> str:
    """Canonical text for a config; parse(render(parse(x))) == parse(x)."""
    n = cfg.model.n
    lines = ["[mixture]", f"species = {n}", f"dimension = {cfg.model.d}", ""]
    for i in range(n):
        law = cfg.model.pressure_laws[i]
        lines += [
            f"[species.{i + 1}]",
            f"k = {_f(law.k)}",
            f"gamma = {_f(law.gamma)}",
            f"mobility = {_f(cfg.model.mobilities[i])}",
            "",
        ]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if (
                cfg.model.lam_const[i, j] == 0.0
                and cfg.model.lam_di[i, j] == 0.0
                and cfg.model.lam_dj[i, j] == 0.0
            ):
                continue
            if j < i:
                continue
            lines += [
                f"[lambda.{i + 1}.{j + 1}]",
                f"const = {_f(cfg.model.lam_const[i, j])}",
                f"coef_i = {_f(cfg.model.lam_di[i, j])}",
                f"coef_j = {_f(cfg.model.lam_dj[i, j])}",
                "",
            ]
    lines += [
        "[grid]",
        f"x_min = {_f(cfg.grid.x_min)}",
        f"x_max = {_f(cfg.grid.x_max)}",
        f"cells = {cfg.grid.n_cells}",
        f"boundary = {cfg.grid.boundary}",
        "",
        "[scenario]",
        "farfield = " + " ".join(_f(v) for v in cfg.farfield),
        "amplitude = " + " ".join(_f(v) for v in cfg.amplitudes),
        f"center = {_f(cfg.center)}",
        f"radius = {_f(cfg.radius)}",
        f"well_prepared = {str(cfg.well_prepared).lower()}",
        "",
        "[hyperbolic]",
        f"epsilon = {_f(cfg.hyperbolic.epsilon)}",
        f"cfl = {_f(cfg.hyperbolic.cfl)}",
        f"t_end = {_f(cfg.hyperbolic.t_end)}",
        f"density_floor = {_f(cfg.hyperbolic.density_floor)}",
        f"splitting = {cfg.hyperbolic.splitting}",
        f"order = {cfg.hyperbolic.spatial_order}",
        f"outputs = {len(cfg.hyperbolic.output_times)}",
        "",
        "[parabolic]",
        f"t_end = {_f(cfg.parabolic.t_end)}",
        f"safety = {_f(cfg.parabolic.safety)}",
        f"outputs = {len(cfg.parabolic.output_times)}",
        f"density_floor = {_f(cfg.parabolic.density_floor)}",
        "",
        "[sweep]",
        "epsilons = " + " ".join(_f(e) for e in cfg.sweep_epsilons),
        f"t_end = {_f(cfg.sweep_t_end)}",
        f"cfl = {_f(cfg.sweep_cfl)}",
        f"splitting = {cfg.sweep_splitting}",
        f"order = {cfg.sweep_order}",
        f"outputs = {cfg.sweep_outputs}",
        f"safety = {_f(cfg.sweep_safety)}",
        "",
        "[certificate]",
        "rho_lo = " + " ".join(_f(v) for v in cfg.box.rho_lo),
        "rho_hi = " + " ".join(_f(v) for v in cfg.box.rho_hi),
        "m_bound = " + " ".join(_f(v) for v in cfg.box.m_bound),
        f"samples = {cfg.certificate_samples}",
        "",
        "[uphill]",
        f"solver = {cfg.uphill_solver}",
        f"threshold = {_f(cfg.uphill_threshold)}",
        f"epsilon = {_f(cfg.uphill_epsilon)}",
        f"t_end = {_f(cfg.uphill_t_end)}",
    ]
    return "\n".join(lines) + "\n"
