"""Closed-form interference statistics and link-success probabilities.

Interference moments and correlation coefficients need ``epsilon > 0``.  The
outage quantities accept the singular model too, because their integrand
``a*g/(1 + a*g)`` is bounded by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .pathloss import (
    PathLossModel,
    cross_integral,
    evaluate,
    integral_g,
    integral_g_numeric,
    integral_g_squared,
)

FADING_KINDS = ("nakagami", "rayleigh", "none")


@dataclass(frozen=True)
class FadingModel:
    """Unit-mean power fading.

    ``kind`` is one of ``nakagami`` (shape ``m >= 0.5``), ``rayleigh`` or
    ``none``.  Rayleigh is Nakagami with m = 1; ``none`` is the m -> inf limit.
    """

    kind: str = "rayleigh"
    m: float | None = None

    def __post_init__(self):
        if self.kind not in FADING_KINDS:
            raise ValueError(f"unknown fading kind {self.kind!r}")
        if self.kind == "nakagami":
            if self.m is None or not self.m >= 0.5 or not math.isfinite(self.m):
                raise ValueError(f"Nakagami parameter must be finite and >= 0.5, got {self.m}")
        elif self.m is not None:
            raise ValueError(f"{self.kind} fading takes no parameter")

    @classmethod
    def nakagami(cls, m: float) -> "FadingModel":
        return cls("nakagami", float(m))

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls("rayleigh")

    @classmethod
    def none(cls) -> "FadingModel":
        return cls("none")

    @classmethod
    def parse(cls, text: str) -> "FadingModel":
        """Parse ``rayleigh``, ``none`` or ``nakagami:<m>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "nakagami":
            if not arg:
                raise ValueError("nakagami fading needs a parameter, e.g. nakagami:2")
            return cls.nakagami(float(arg))
        if arg:
            raise ValueError(f"{name} fading takes no parameter")
        return cls(name)

    def __str__(self):
        return f"nakagami:{self.m:g}" if self.kind == "nakagami" else self.kind

    @property
    def shape(self) -> float:
        """Gamma shape of the power gain (inf for no fading)."""
        if self.kind == "nakagami":
            return self.m
        return 1.0 if self.kind == "rayleigh" else math.inf

    @property
    def is_rayleigh(self) -> bool:
        return self.shape == 1.0

    @property
    def mean_power(self) -> float:
        return 1.0

    @property
    def second_moment(self) -> float:
        """E[h^2] = (m + 1)/m; 2 for Rayleigh, 1 without fading."""
        m = self.shape
        return 1.0 if math.isinf(m) else (m + 1) / m

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "none":
            return np.ones(size)
        if self.kind == "rayleigh":
            return rng.standard_exponential(size)
        return rng.gamma(self.m, 1.0 / self.m, size)


@dataclass(frozen=True)
class NetworkConfig:
    lam: float = 1.0
    p: float = 0.5
    pathloss: PathLossModel = field(default_factory=PathLossModel)
    fading: FadingModel = field(default_factory=FadingModel)

    def __post_init__(self):
        if not self.lam > 0 or not math.isfinite(self.lam):
            raise ValueError(f"density must be positive, got {self.lam}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"ALOHA probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class LinkConfig:
    link_distance: float = 0.5
    theta: float = 1.0

    def __post_init__(self):
        if not self.link_distance > 0:
            raise ValueError("link distance must be positive")
        if not self.theta > 0:
            raise ValueError("SIR threshold must be positive")

    def a(self, pathloss: PathLossModel) -> float:
        """theta / g(z); equals theta * |z|**alpha for the singular model."""
        return self.theta / evaluate(pathloss, self.link_distance)


# --- interference moments -------------------------------------------------

def mean_interference(cfg: NetworkConfig) -> float:
    return cfg.p * cfg.lam * integral_g(cfg.pathloss)


def interference_variance(cfg: NetworkConfig, method: str = "closed") -> float:
    """p * lambda * E[h^2] * int g^2.

    ``method="quadrature"`` takes the plane integral numerically instead.
    """
    if method == "closed":
        ig2 = integral_g_squared(cfg.pathloss)
    elif method == "quadrature":
        ig2 = integral_g_numeric(cfg.pathloss, 2).value
    else:
        raise ValueError(f"unknown method {method!r}")
    return cfg.p * cfg.lam * cfg.fading.second_moment * ig2


def nakagami_variance_closed_form(cfg: NetworkConfig) -> float:
    """Variance written directly in csc form with the (m+1)/m fading factor."""
    pl = cfg.pathloss
    if pl.singular:
        integral_g_squared(pl)  # raises DivergenceError
    a, eps = pl.alpha, pl.epsilon
    return (2 * math.pi**2 * (a - 2) * cfg.p * cfg.lam
            / (eps ** (2 - 2 / a) * a**2 * math.sin(2 * math.pi / a))
            * cfg.fading.second_moment)


def cross_moment(cfg: NetworkConfig, separation: float) -> float:
    """E[I_k(u) I_l(v)] for distinct slots k != l and |u - v| = separation."""
    pl = cfg.pathloss
    return (cfg.p**2 * cfg.lam * cross_integral(pl, separation)
            + (cfg.lam * cfg.p * integral_g(pl)) ** 2)


# --- correlation coefficients ----------------------------------------------

def spatial_temporal_correlation(cfg: NetworkConfig, separation: float) -> float:
    """Correlation of I_k(u) and I_l(v) for k != l, |u - v| = separation."""
    pl = cfg.pathloss
    return (cfg.p * cross_integral(pl, separation)
            / (cfg.fading.second_moment * integral_g_squared(pl)))


def temporal_correlation(cfg: NetworkConfig) -> float:
    return cfg.p / cfg.fading.second_moment


def singular_limit_correlation(separation: float) -> float:
    """Limit of the correlation coefficient as epsilon -> 0, for u != v.

    Zero separation is the temporal coefficient; use temporal_correlation.
    """
    if not separation > 0:
        raise ValueError("separation must be positive; at 0 use temporal_correlation")
    return 0.0


# --- link outages (Rayleigh fading) ----------------------------------------

def _require_rayleigh(net):
    if not net.fading.is_rayleigh:
        raise ValueError(f"outage formulas assume Rayleigh fading, got {net.fading}")


def exceedance_integrals(net: NetworkConfig, link: LinkConfig, method: str = "closed"):
    """Return (int s dx, int s^2 dx) with s = a*g/(1 + a*g) over the plane.

    Closed form: s = a/(epsilon + a + r^alpha) = a * g_{epsilon+a}(r), so both
    integrals reduce to the path-loss closed forms at softening epsilon + a.
    """
    pl = net.pathloss
    a = link.a(pl)
    if method == "closed":
        shifted = PathLossModel(pl.alpha, pl.epsilon + a)
        return a * integral_g(shifted), a * a * integral_g_squared(shifted)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    def s(r):
        x = a * (1.0 / (pl.epsilon + r**pl.alpha))
        return np.where(np.isinf(x), 1.0, x / (1.0 + x))

    scale = (pl.epsilon + a) ** (1 / pl.alpha)
    kw = dict(scale=scale, tol=1e-300)
    i1 = quadrature.integrate_radial(lambda r: 2 * np.pi * r * s(r), **kw).value
    i2 = quadrature.integrate_radial(lambda r: 2 * np.pi * r * s(r) ** 2, **kw).value
    return i1, i2


def success_probability(net: NetworkConfig, link: LinkConfig, method: str = "closed") -> float:
    """P(SIR > theta) in one slot."""
    _require_rayleigh(net)
    i1, _ = exceedance_integrals(net, link, method)
    return math.exp(-net.lam * net.p * i1)


def joint_success_probability(net: NetworkConfig, link: LinkConfig, method: str = "closed") -> float:
    """P(A_k, A_l) for two distinct slots.

    1 - (1 - p*s)^2 = 2*p*s - p^2*s^2, so the exponent shares both
    exceedance integrals with the single-slot probability and the ratio.
    """
    _require_rayleigh(net)
    i1, i2 = exceedance_integrals(net, link, method)
    return math.exp(-net.lam * (2 * net.p * i1 - net.p**2 * i2))


def conditional_ratio(net: NetworkConfig, link: LinkConfig, method: str = "closed") -> float:
    """P(A_k | A_l) / P(A_l) = exp(lambda * p^2 * int s^2 dx) >= 1."""
    _require_rayleigh(net)
    _, i2 = exceedance_integrals(net, link, method)
    return math.exp(net.lam * net.p**2 * i2)


def singular_conditional_ratio(net: NetworkConfig, link: LinkConfig) -> float:
    """Conditional ratio for g(x) = |x|^-alpha written in csc form."""
    pl = net.pathloss
    if not pl.singular:
        raise ValueError("csc closed form holds for the singular model only")
    a, al = link.a(pl), pl.alpha
    return math.exp(2 * net.lam * a ** (2 / al) * net.p**2 * math.pi**2
                    * (al - 2) / al**2 / math.sin(2 * math.pi / al))


def conditional_success_probability(net: NetworkConfig, link: LinkConfig, method: str = "closed") -> float:
    """P(A_k | A_l)."""
    _require_rayleigh(net)
    i1, i2 = exceedance_integrals(net, link, method)
    return math.exp(-net.lam * net.p * i1 + net.lam * net.p**2 * i2)


def conditional_outage_probability(net: NetworkConfig, link: LinkConfig, method: str = "closed") -> float:
    """P(A_k^c | A_l^c); exceeds the unconditional outage 1 - P(A_l) when p > 0."""
    ps = success_probability(net, link, method)
    pj = joint_success_probability(net, link, method)
    if ps == 1.0:
        return 0.0
    return 1 - (ps - pj) / (1 - ps)
