"""Bond constitutive law: concave potential profile, influence function,
pairwise energy / force / stiffness densities and the elastic calibration.

All scalar-level functions broadcast over numpy arrays. Lengths in bond
geometry are rescaled: ``xi_norm = |y - x| / horizon`` lies in (0, 1].
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize

from .errors import ConfigurationError, QuadratureError

PROFILES = ("exponential", "rational")
INFLUENCE_KINDS = ("constant", "linear", "polynomial")


@dataclass(frozen=True)
class PotentialSpec:
    """Concave profile ``f`` with ``f(0) = 0``, slope ``f_prime_0`` at the
    origin and saturation value ``f_infinity``.

    ``exponential``: f(r) = f_inf * (1 - exp(-a r)), a = f'(0) / f_inf
    ``rational``:    f(r) = f_inf * a r / (1 + a r)
    """

    f_prime_0: float = 1.0
    f_infinity: float = 1.0
    profile: str = "exponential"

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigurationError(f"unknown profile {self.profile!r}", "profile")
        if not np.isfinite(self.f_prime_0) or self.f_prime_0 < 0:
            raise ConfigurationError("must be non-negative", "f_prime_0")
        if not np.isfinite(self.f_infinity) or self.f_infinity <= 0:
            raise ConfigurationError("must be positive", "f_infinity")

    @property
    def rate(self):
        return self.f_prime_0 / self.f_infinity

    def f(self, r):
        a = self.rate
        if self.profile == "exponential":
            return -self.f_infinity * np.expm1(-a * r)
        return self.f_infinity * a * r / (1.0 + a * r)

    def df(self, r):
        a = self.rate
        if self.profile == "exponential":
            return self.f_prime_0 * np.exp(-a * r)
        return self.f_prime_0 / (1.0 + a * r) ** 2

    def d2f(self, r):
        a = self.rate
        if self.profile == "exponential":
            return -a * self.f_prime_0 * np.exp(-a * r)
        return -2.0 * a * self.f_prime_0 / (1.0 + a * r) ** 3

    def stiffness_profile(self, s):
        """``f'(s) + 2 s f''(s)``; half of d^2/dr^2 f(r^2) at ``s = r^2``."""
        return self.df(s) + 2.0 * s * self.d2f(s)

    @cached_property
    def r_bar(self):
        """Inflection point of ``r -> f(r^2)``."""
        if self.f_prime_0 == 0:
            return np.inf
        if self.profile == "exponential":
            return np.sqrt(self.f_infinity / (2.0 * self.f_prime_0))
        return _inflection_by_bisection(self)


def _inflection_by_bisection(spec, xtol=1e-12):
    g = lambda r: spec.stiffness_profile(r * r)
    hi = 1.0
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("no inflection point found for r -> f(r^2)")
    return optimize.bisect(g, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class InfluenceSpec:
    """Radial influence function ``J`` supported on [0, 1].

    ``polynomial`` uses ``coefficients`` in increasing powers of r.
    """

    kind: str = "constant"
    coefficients: tuple = ()
    bound_M: float = None
    _peak: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        if self.kind not in INFLUENCE_KINDS:
            raise ConfigurationError(f"unknown influence kind {self.kind!r}", "influence")
        if self.kind == "polynomial":
            if len(self.coefficients) == 0:
                raise ConfigurationError("polynomial influence needs coefficients",
                                         "influence_coefficients")
            object.__setattr__(self, "coefficients",
                               tuple(float(c) for c in self.coefficients))
        r = np.linspace(0.0, 1.0, 2001)
        values = self._raw(r)
        if values.min() < 0:
            raise ConfigurationError("influence function is negative on [0, 1]",
                                     "influence_coefficients")
        peak = float(values.max())
        object.__setattr__(self, "_peak", peak)
        if self.bound_M is None:
            object.__setattr__(self, "bound_M", peak * (1 + 1e-9) + 1e-12)
        elif self.bound_M <= peak:
            raise ConfigurationError(f"bound {self.bound_M} not above max J = {peak}",
                                     "influence_bound")

    def _raw(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.ones_like(r)
        if self.kind == "linear":
            return 1.0 - r
        return np.polynomial.polynomial.polyval(r, self.coefficients)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("influence function evaluated at negative radius")
        return np.where(r <= 1.0, self._raw(np.minimum(r, 1.0)), 0.0)

    def moment(self, power, method="auto"):
        """``int_0^1 r^power J(r) dr``.

        ``method='auto'`` is analytic for the built-in kinds and quadrature
        for user polynomials.
        """
        if method == "auto":
            method = "quadrature" if self.kind == "polynomial" else "analytic"
        if method == "analytic":
            if self.kind == "constant":
                return 1.0 / (power + 1)
            if self.kind == "linear":
                return 1.0 / (power + 1) - 1.0 / (power + 2)
            return sum(c / (power + k + 1) for k, c in enumerate(self.coefficients))
        return _gauss_moment(lambda r: r ** power * self._raw(r))


def _gauss_moment(func, tol=1e-10):
    # fixed 64-point rule, checked against 128 points
    coarse = _gauss_legendre_01(func, 64)
    fine = _gauss_legendre_01(func, 128)
    if abs(fine - coarse) > tol:
        raise QuadratureError("moment quadrature did not converge", abs(fine - coarse))
    return fine


def _gauss_legendre_01(func, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * float(np.dot(w, func(0.5 * (x + 1.0))))


@dataclass(frozen=True)
class BondGeometry:
    xi_norm: float
    direction: tuple
    horizon: float

    def __post_init__(self):
        if not 0 < self.xi_norm <= 1:
            raise ValueError("xi_norm must lie in (0, 1]")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if abs(np.hypot(*self.direction) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")


# Array-level densities. ``xi`` is the rescaled bond length, ``eps`` the horizon.

def potential_density(spec, inf, eta, xi, eps):
    return inf(xi) * spec.f(eta * eta / (eps * xi)) / eps ** 3


def force_density(spec, inf, eta, xi, eps):
    return 2.0 * eta * inf(xi) * spec.df(eta * eta / (eps * xi)) / (eps ** 4 * xi)


def stiffness_density(spec, inf, eta, xi, eps):
    s = eta * eta / (eps * xi)
    return 2.0 * inf(xi) * spec.stiffness_profile(s) / (eps ** 4 * xi)


# Public scalar operations.

def potential_eval(spec, r):
    """Return ``(f(r), f'(r), f''(r))``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("potential profile is defined for r >= 0 only")
    return spec.f(r), spec.df(r), spec.d2f(r)


def influence_eval(inf, r):
    return inf(r)


def bond_potential_density(spec, inf, geom, eta):
    return potential_density(spec, inf, eta, geom.xi_norm, geom.horizon)


def bond_force_density(spec, inf, geom, eta):
    return force_density(spec, inf, eta, geom.xi_norm, geom.horizon)


def bond_stiffness_density(spec, inf, geom, eta):
    return stiffness_density(spec, inf, eta, geom.xi_norm, geom.horizon)


def critical_stretch(spec, horizon, xi_norm):
    """Relative displacement where the bond stiffness changes sign."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    xi_norm = np.asarray(xi_norm, dtype=float)
    if np.any((xi_norm <= 0) | (xi_norm > 1)):
        raise ValueError("xi_norm must lie in (0, 1]")
    return np.sqrt(horizon * xi_norm) * spec.r_bar


def calibrate(spec, inf, method="auto"):
    """Shear modulus and critical energy release rate ``(mu, G_c)``."""
    m2 = inf.moment(2, method=method)
    mu = np.pi * spec.f_prime_0 * m2
    gc = 2.0 * np.pi * spec.f_infinity * m2
    return mu, gc
