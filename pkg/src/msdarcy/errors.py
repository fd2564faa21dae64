"""Exception hierarchy shared by all msdarcy modules."""


class MsdarcyError(Exception):
    """Base class for all package errors."""


class DomainError(MsdarcyError, ValueError):
    """A state left the admissible set (non-positive density, bad shape)."""


class DimensionError(MsdarcyError, ValueError):
    """Array operands with non-conforming shapes."""


class ConfigError(MsdarcyError, ValueError):
    """Configuration file problem; carries an optional location."""

    def __init__(self, message, *, path=None, line=None, key=None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key '{key}'")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.key = key


class VacuumError(MsdarcyError, RuntimeError):
    """Density fell to or below the configured floor during a run."""

    def __init__(self, time, cell, species, value):
        super().__init__(
            f"density floor reached at t={time:.6g}, cell {cell}, "
            f"species {species + 1} (rho={value:.6g})"
        )
        self.time = time
        self.cell = cell
        self.species = species
        self.value = value


class SingularSystemError(MsdarcyError, RuntimeError):
    """A cellwise linear solve hit a singular matrix (invalid model)."""
