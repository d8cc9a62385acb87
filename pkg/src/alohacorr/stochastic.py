"""Reproducible sampling of PPP realisations, ALOHA slots and fading.

Every replication owns a Philox stream keyed by ``(master_seed,
replication_index)``; inside a replication, positions, transmit indicators,
interferer fading and desired-link fading come from separate sub-streams
with fixed labels.  Draws never depend on how replications are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import FadingModel

STREAM_POSITIONS = 0
STREAM_INDICATORS = 1
STREAM_FADING = 2
STREAM_LINK = 3
STREAM_BOOTSTRAP = 4

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError("master seed must be an unsigned 64-bit integer")
        if self.replication_index < 0:
            raise ValueError("replication index must be non-negative")

    def generator(self, label: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed,
                                    spawn_key=(self.replication_index, label))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Realization:
    points: np.ndarray  # (n, 2)
    window_radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class SlotDraw:
    transmit_indicators: np.ndarray  # (n,) bool
    fading: np.ndarray  # (n, receivers)


def sample_ppp(lam: float, radius: float, seed: SeedSpec, center=(0.0, 0.0)) -> Realization:
    """Homogeneous PPP of density ``lam`` restricted to a disk."""
    if not lam > 0 or not radius > 0:
        raise ValueError("density and window radius must be positive")
    rng = seed.generator(STREAM_POSITIONS)
    n = rng.poisson(lam * np.pi * radius**2)
    rho = radius * np.sqrt(rng.random(n))
    phi = 2 * np.pi * rng.random(n)
    pts = np.column_stack([center[0] + rho * np.cos(phi), center[1] + rho * np.sin(phi)])
    return Realization(pts, float(radius), (float(center[0]), float(center[1])))


def draw_slot_arrays(n_points, p, num_slots, fading: FadingModel, n_receivers, seed: SeedSpec):
    """Array form of :func:`sample_slots`.

    Returns indicators shaped ``(slots, points)`` and fading shaped
    ``(slots, points, receivers)``, both filled in C order.
    """
    if not 0 <= p <= 1:
        raise ValueError("ALOHA probability must lie in [0, 1]")
    if num_slots < 1:
        raise ValueError("need at least one slot")
    ind = seed.generator(STREAM_INDICATORS).random((num_slots, n_points)) < p
    h = fading.sample(seed.generator(STREAM_FADING), (num_slots, n_points, n_receivers))
    return ind, h


def sample_slots(real: Realization, p: float, num_slots: int, fading: FadingModel,
                 receivers, seed: SeedSpec) -> list[SlotDraw]:
    n_rx = len(np.atleast_2d(receivers))
    ind, h = draw_slot_arrays(len(real), p, num_slots, fading, n_rx, seed)
    return [SlotDraw(ind[k], h[k]) for k in range(num_slots)]


def sample_link_fading(fading: FadingModel, num_slots: int, seed: SeedSpec) -> np.ndarray:
    """Desired-link power gains, one per slot."""
    return fading.sample(seed.generator(STREAM_LINK), num_slots)
