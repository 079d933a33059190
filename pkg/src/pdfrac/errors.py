"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model, domain or run configuration."""

    def __init__(self, message, key=None, section=None):
        self.key = key
        self.section = section
        where = ""
        if key is not None:
            where = f"[{section}] {key}: " if section else f"{key}: "
        super().__init__(where + message)


class QuadratureError(ArithmeticError):
    """Numerical quadrature failed to reach the requested tolerance."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (error estimate {residual:.3e})")


class IntegrationError(RuntimeError):
    """Time integration produced non-finite values."""

    def __init__(self, step, message="non-finite displacement or velocity"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class EnergyBoundError(AssertionError):
    """Kinetic plus potential energy exceeded the Gronwall bound."""

    def __init__(self, t, energy, bound):
        self.t = t
        self.energy = energy
        self.bound = bound
        super().__init__(
            f"energy {energy:.6e} exceeds Gronwall bound {bound:.6e} at t={t:.6g}"
        )
