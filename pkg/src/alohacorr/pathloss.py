"""Radial path-loss family ``g(r) = 1 / (epsilon + r**alpha)`` and its plane integrals.

``epsilon = 0`` is the singular law ``r**-alpha``.  Its plane integrals
diverge at the origin, so every moment integral refuses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import DivergenceError


@dataclass(frozen=True)
class PathLossModel:
    alpha: float = 4.0
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if not self.epsilon >= 0 or not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")

    @property
    def singular(self) -> bool:
        return self.epsilon == 0

    @property
    def length_scale(self) -> float:
        """Distance at which ``r**alpha`` equals epsilon (1 for the singular model)."""
        return self.epsilon ** (1 / self.alpha) if self.epsilon > 0 else 1.0

    def __call__(self, distance):
        return evaluate(self, distance)


def evaluate(model: PathLossModel, distance):
    """Path gain at ``distance``; accepts scalars or arrays."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    if model.singular and np.any(d == 0):
        raise DivergenceError("singular path loss has infinite gain at distance 0")
    out = 1.0 / (model.epsilon + d**model.alpha)
    return float(out) if out.ndim == 0 else out


def _require_regular(model, what):
    if model.singular:
        raise DivergenceError(
            f"{what} diverges for the singular model: the integrand behaves like "
            f"r^(1-{model.alpha:g}) at the origin"
        )


def integral_g(model: PathLossModel) -> float:
    """Closed form of the plane integral of g.

    2*pi * int_0^inf r/(eps + r^alpha) dr, evaluated through the Beta
    integral int_0^inf u^(s-1)/(1+u) du = pi/sin(pi*s) with s = 2/alpha.
    """
    _require_regular(model, "integral of g")
    a, eps = model.alpha, model.epsilon
    return 2 * math.pi**2 / (a * math.sin(2 * math.pi / a)) * eps ** (2 / a - 1)


def integral_g_squared(model: PathLossModel) -> float:
    """Closed form of the plane integral of g**2."""
    _require_regular(model, "integral of g^2")
    a, eps = model.alpha, model.epsilon
    return 2 * math.pi**2 * (a - 2) / (a**2 * math.sin(2 * math.pi / a)) * eps ** (2 / a - 2)


def integral_g_numeric(model: PathLossModel, power: int = 1, **tol) -> quadrature.QuadratureResult:
    """Plane integral of ``g**power`` by adaptive radial quadrature."""
    _require_regular(model, f"integral of g^{power}")
    a, eps = model.alpha, model.epsilon
    return _scaled_radial(lambda r: 2 * np.pi * r / (eps + r**a) ** power, model, tol)


def _scaled_radial(f, model, tol):
    tol.setdefault("scale", model.length_scale)
    tol.setdefault("tol", 1e-300)
    return quadrature.integrate_radial(f, **tol)


def cross_integral(model: PathLossModel, separation: float, **tol) -> float:
    """Plane integral of ``g(x) * g(x - d*e1)`` for separation ``d``.

    Polar coordinates centred on one of the two points; the integrand is even
    in the angle, so only half the circle is sampled.
    """
    _require_regular(model, "cross integral")
    d = float(separation)
    if d < 0:
        raise ValueError("separation must be non-negative")
    a, eps = model.alpha, model.epsilon

    def f(r, th):
        rho2 = np.maximum(r * r + d * d - 2 * r * d * np.cos(th), 0.0)
        return r / ((eps + r**a) * (eps + rho2 ** (a / 2)))

    tol.setdefault("scale", max(model.length_scale, d))
    tol.setdefault("tol", 1e-300)
    return quadrature.integrate_polar(f, symmetric=True, **tol).value
