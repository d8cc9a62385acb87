"""Monte Carlo simulation of the ALOHA interference field and its estimators.

One replication = one PPP realisation in a disk window plus ``num_slots``
independent ALOHA/fading draws.  Interference is recorded at every receiver
in every slot.  Replications are independent, so they can be farmed out to
worker processes; results are reassembled in replication order, which makes
the output independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import LinkConfig, NetworkConfig
from .errors import ConfigurationError, DivergenceError, SimulationError, StatisticalError
from .pathloss import PathLossModel, evaluate, integral_g
from .stochastic import (
    STREAM_BOOTSTRAP,
    SeedSpec,
    draw_slot_arrays,
    sample_link_fading,
    sample_ppp,
)

DEFAULT_ETA = 1e-3
DEFAULT_MAX_RADIUS = 1e4
MIN_REPLICATIONS = 100
MIN_CELL_COUNT = 50


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n: int


@dataclass(frozen=True)
class SimulationPlan:
    net: NetworkConfig
    receivers: tuple = ((0.0, 0.0),)
    num_slots: int = 2
    replications: int = 20_000
    master_seed: int = 0
    eta: float = DEFAULT_ETA
    link: LinkConfig | None = None
    max_radius: float = DEFAULT_MAX_RADIUS

    def __post_init__(self):
        rx = tuple(tuple(float(c) for c in pt) for pt in np.atleast_2d(self.receivers))
        if self.link is not None:
            # receiver of the tagged link; its transmitter sits at the origin
            rx = ((float(self.link.link_distance), 0.0),)
        if not rx or any(len(pt) != 2 for pt in rx):
            raise ConfigurationError("receivers must be a non-empty list of planar points")
        object.__setattr__(self, "receivers", rx)
        if self.num_slots < 2:
            raise ConfigurationError("need at least two slots")
        if self.replications < 1:
            raise ConfigurationError("need at least one replication")
        if not self.eta > 0:
            raise ConfigurationError("truncation tolerance must be positive")

    @property
    def receiver_array(self) -> np.ndarray:
        return np.asarray(self.receivers, dtype=float)

    def window_radius(self) -> float:
        return choose_window_radius(self.net, self.receivers, self.eta, self.link, self.max_radius)


def _tail_radius(log_c, alpha):
    # smallest R with  C * R**(2 - alpha) <= 1, computed in log space
    return math.exp(max(log_c, 0.0) / (alpha - 2)) if log_c > 0 else 0.0


def choose_window_radius(net: NetworkConfig, receivers, eta: float, link: LinkConfig | None = None,
                         max_radius: float = DEFAULT_MAX_RADIUS) -> float:
    """Window radius that bounds the truncation bias by ``eta``.

    With g(r) <= r**-alpha, the expected interference from outside radius R
    is at most 2*pi*p*lam*R**(2-alpha)/(alpha-2); R is chosen so this is at
    most ``eta`` times the mean interference.  Outage plans bound the
    exceedance integrand a*g/(1+a*g) <= a*r**-alpha against its full plane
    integral instead, which also covers the singular model.  Distances are
    measured from the receiver farthest from the window centre.
    """
    if not eta > 0:
        raise ConfigurationError("truncation tolerance must be positive")
    pl: PathLossModel = net.pathloss
    al = pl.alpha
    rx = np.atleast_2d(np.asarray(receivers, dtype=float))
    offset = float(np.max(np.hypot(*(rx - rx.mean(axis=0)).T)))
    radius = 0.0
    ell = pl.epsilon ** (1 / al)
    if link is None:
        if pl.singular:
            raise DivergenceError("moment experiments need epsilon > 0; "
                                  "the singular model has infinite mean interference")
    if not pl.singular:
        log_c = math.log(2 * math.pi / ((al - 2) * eta * integral_g(pl)))
        radius = max(radius, _tail_radius(log_c, al))
    if link is not None:
        a = link.a(pl)
        ell = (pl.epsilon + a) ** (1 / al)
        i1, _ = analytic.exceedance_integrals(net, link)
        log_c = math.log(2 * math.pi * a / ((al - 2) * eta * i1))
        radius = max(radius, _tail_radius(log_c, al))
    if net.p == 0:
        radius = 0.0
    radius = max(radius + offset, offset + 10 * ell)
    if not math.isfinite(radius) or radius > max_radius:
        raise ConfigurationError(
            f"window radius {radius:.4g} exceeds the maximum {max_radius:g}; "
            "increase eta or the path-loss exponent"
        )
    return radius


@dataclass(frozen=True)
class InterferenceSample:
    """Interference per (replication, receiver, slot), plus link fading for outage plans."""

    values: np.ndarray
    plan: SimulationPlan
    window_radius: float
    link_fading: np.ndarray | None = field(default=None)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _replicate(plan: SimulationPlan, radius: float, index: int):
    net = plan.net
    seed = SeedSpec(plan.master_seed, index)
    rx = plan.receiver_array
    center = tuple(rx.mean(axis=0))
    real = sample_ppp(net.lam, radius, seed, center)
    ind, h = draw_slot_arrays(len(real), net.p, plan.num_slots, net.fading, len(rx), seed)
    dist = np.hypot(real.points[:, None, 0] - rx[None, :, 0], real.points[:, None, 1] - rx[None, :, 1])
    if net.pathloss.singular and np.any(dist == 0):
        raise SimulationError(f"replication {index}: a node landed exactly on a receiver")
    gain = evaluate(net.pathloss, dist) if dist.size else np.zeros(dist.shape)
    interference = np.einsum("kn,knu,nu->uk", ind.astype(float), h, gain)
    hlink = sample_link_fading(net.fading, plan.num_slots, seed) if plan.link is not None else None
    return interference, hlink


def _run_chunk(plan: SimulationPlan, radius: float, start: int, stop: int):
    vals = np.empty((stop - start, len(plan.receivers), plan.num_slots))
    link = np.empty((stop - start, plan.num_slots)) if plan.link is not None else None
    for i in range(start, stop):
        vals[i - start], hl = _replicate(plan, radius, i)
        if link is not None:
            link[i - start] = hl
    return vals, link


def simulate(plan: SimulationPlan, workers: int = 1) -> InterferenceSample:
    """Run every replication of ``plan``; ``workers > 1`` uses a process pool."""
    radius = plan.window_radius()
    n = plan.replications
    if workers <= 1 or n < 2:
        vals, link = _run_chunk(plan, radius, 0, n)
        return InterferenceSample(vals, plan, radius, link)

    n_chunks = min(n, 4 * workers)
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, plan, radius, int(a), int(b))
                   for a, b in zip(bounds[:-1], bounds[1:])]
        parts = [f.result() for f in futures]
    vals = np.concatenate([p[0] for p in parts])
    link = np.concatenate([p[1] for p in parts]) if plan.link is not None else None
    return InterferenceSample(vals, plan, radius, link)


# --- estimators ------------------------------------------------------------

def _require_n(n):
    if n < MIN_REPLICATIONS:
        raise StatisticalError(f"{n} replications; at least {MIN_REPLICATIONS} are needed")


def estimate_moments(samples: InterferenceSample, receiver: int = 0):
    """Mean and unbiased variance of I at one receiver, pooled over slots.

    Slots within a replication share the point process, so standard errors
    are computed from per-replication contributions, not per-slot values.
    """
    if samples.plan.net.pathloss.singular:
        raise DivergenceError("moment estimation needs epsilon > 0")
    x = samples.values[:, receiver, :]
    n, k = x.shape
    _require_n(n)
    mean = x.mean()
    se_mean = x.mean(axis=1).std(ddof=1) / math.sqrt(n)
    correction = n * k / (n * k - 1)
    psi = ((x - mean) ** 2).mean(axis=1) * correction
    var = psi.mean()
    se_var = psi.std(ddof=1) / math.sqrt(n)
    return EstimateWithError(float(mean), float(se_mean), n), EstimateWithError(float(var), float(se_var), n)


def _pearson(x, y):
    xc = x - x.mean(axis=-1, keepdims=True)
    yc = y - y.mean(axis=-1, keepdims=True)
    sxy = (xc * yc).sum(axis=-1)
    sxx = (xc * xc).sum(axis=-1)
    syy = (yc * yc).sum(axis=-1)
    return sxy / np.sqrt(sxx * syy)


def _bootstrap(stat, n, resamples, seed, batch=50):
    rng = SeedSpec(seed, 0).generator(STREAM_BOOTSTRAP)
    out = []
    for start in range(0, resamples, batch):
        idx = rng.integers(0, n, size=(min(batch, resamples - start), n))
        out.append(stat(idx))
    return np.concatenate(out)


def estimate_correlation(samples: InterferenceSample, at, and_, method: str = "fisher",
                         resamples: int = 1000) -> EstimateWithError:
    """Pearson correlation across replications of I_k(u) and I_l(v).

    ``at`` and ``and_`` are ``(receiver, slot)`` pairs with distinct slots.
    The standard error is the delta-method image of the Fisher z standard
    error, or the bootstrap spread with ``method="bootstrap"``.
    """
    (u, k), (v, l) = at, and_
    if k == l:
        raise ValueError("correlation is defined across distinct slots only")
    x = samples.values[:, u, k]
    y = samples.values[:, v, l]
    n = len(x)
    _require_n(n)
    if x.std() == 0 or y.std() == 0:
        raise StatisticalError("a marginal has zero variance; correlation undefined")
    r = float(_pearson(x, y))
    if method == "fisher":
        se = (1 - r * r) / math.sqrt(n - 3)
    elif method == "bootstrap":
        boots = _bootstrap(lambda idx: _pearson(x[idx], y[idx]), n, resamples,
                           samples.plan.master_seed)
        se = float(np.nanstd(boots, ddof=1))
    else:
        raise ValueError(f"unknown method {method!r}")
    return EstimateWithError(r, float(se), n)


def success_indicators(samples: InterferenceSample) -> np.ndarray:
    """Boolean (replications, slots) array of SIR > theta events at the link receiver."""
    plan = samples.plan
    if plan.link is None or samples.link_fading is None:
        raise ConfigurationError("outage estimation needs a link in the plan")
    signal = samples.link_fading * evaluate(plan.net.pathloss, plan.link.link_distance)
    return signal > plan.link.theta * samples.values[:, 0, :]


def estimate_outage(plan_or_samples, workers: int = 1, resamples: int = 1000):
    """Empirical P(A_l), P(A_k, A_l) and their ratio P(A_k, A_l)/P(A_l)^2.

    Slots 0 and 1 are the designated pair.  P(A_l) pools both slots, which
    are identically distributed.  The ratio's standard error comes from the
    delta method on log P(A_k, A_l) - 2 log P(A_l); when any cell of the
    2x2 success table holds fewer than 50 replications a bootstrap is used.
    """
    if isinstance(plan_or_samples, SimulationPlan):
        plan = plan_or_samples
        if plan.link is None:
            raise ConfigurationError("outage estimation needs a link in the plan")
        if not plan.net.fading.is_rayleigh:
            raise ConfigurationError("outage estimation assumes Rayleigh fading")
        samples = simulate(plan, workers)
    else:
        samples = plan_or_samples
    ok = success_indicators(samples)[:, :2].astype(float)
    n = ok.shape[0]
    _require_n(n)
    s_rep = ok.mean(axis=1)
    j_rep = ok[:, 0] * ok[:, 1]
    ps, pj = s_rep.mean(), j_rep.mean()
    se_s = s_rep.std(ddof=1) / math.sqrt(n)
    se_j = j_rep.std(ddof=1) / math.sqrt(n)
    if ps == 0 or pj == 0:
        raise StatisticalError("no joint successes observed; ratio undefined")
    ratio = pj / ps**2

    cells = np.bincount((2 * ok[:, 0] + ok[:, 1]).astype(int), minlength=4)
    if cells.min() < MIN_CELL_COUNT:
        def stat(idx):
            s = s_rep[idx].mean(axis=1)
            j = j_rep[idx].mean(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                return j / s**2
        boots = _bootstrap(stat, n, resamples, samples.plan.master_seed)
        se_r = float(np.nanstd(boots, ddof=1))
    else:
        psi = (j_rep - pj) / pj - 2 * (s_rep - ps) / ps
        se_r = ratio * psi.std(ddof=1) / math.sqrt(n)
    return (EstimateWithError(float(ps), float(se_s), n),
            EstimateWithError(float(pj), float(se_j), n),
            EstimateWithError(float(ratio), float(se_r), n))
