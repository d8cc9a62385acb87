import math

import numpy as np
import pytest
from scipy import stats

from alohacorr.analytic import FadingModel
from alohacorr.stochastic import SeedSpec, draw_slot_arrays, sample_ppp, sample_slots


def test_same_seed_same_points():
    a = sample_ppp(1.0, 5.0, SeedSpec(42, 3))
    b = sample_ppp(1.0, 5.0, SeedSpec(42, 3))
    assert a.points.tobytes() == b.points.tobytes()
    c = sample_ppp(1.0, 5.0, SeedSpec(42, 4))
    assert a.points.shape != c.points.shape or not np.array_equal(a.points, c.points)


def test_points_inside_window():
    real = sample_ppp(2.0, 3.0, SeedSpec(1, 0), center=(1.5, -2.0))
    assert len(real) > 0
    assert np.all(np.hypot(real.points[:, 0] - 1.5, real.points[:, 1] + 2.0) <= 3.0)


def test_poisson_count_mean():
    counts = np.array([len(sample_ppp(1.0, 10.0, SeedSpec(7, i))) for i in range(10_000)])
    mu = 100 * math.pi
    assert abs(counts.mean() - mu) <= 3 * math.sqrt(mu) / 100
    assert counts.var(ddof=1) == pytest.approx(mu, rel=0.05)


def test_tiny_density_is_empty():
    sizes = [len(sample_ppp(1e-9, 1.0, SeedSpec(3, i))) for i in range(200)]
    assert sum(sizes) == 0


@pytest.mark.parametrize("bad", [(-1, 0), (2**64, 0), (1, -1)])
def test_seed_validation(bad):
    with pytest.raises(ValueError):
        SeedSpec(*bad)


def test_extreme_p():
    real = sample_ppp(1.0, 4.0, SeedSpec(9, 0))
    on = sample_slots(real, 1.0, 3, FadingModel.rayleigh(), [(0, 0)], SeedSpec(9, 0))
    off = sample_slots(real, 0.0, 3, FadingModel.rayleigh(), [(0, 0)], SeedSpec(9, 0))
    assert len(on) == 3
    assert all(s.transmit_indicators.all() for s in on)
    assert not any(s.transmit_indicators.any() for s in off)
    assert on[0].fading.shape == (len(real), 1)


def test_slot_draws_are_deterministic_and_ordered():
    ind, h = draw_slot_arrays(50, 0.3, 4, FadingModel.nakagami(2), 3, SeedSpec(11, 2))
    ind2, h2 = draw_slot_arrays(50, 0.3, 4, FadingModel.nakagami(2), 3, SeedSpec(11, 2))
    assert ind.tobytes() == ind2.tobytes() and h.tobytes() == h2.tobytes()
    # one flat draw in (slot, point, receiver) order
    flat = FadingModel.nakagami(2).sample(SeedSpec(11, 2).generator(2), 4 * 50 * 3)
    np.testing.assert_array_equal(h.ravel(), flat)


def test_indicator_rate():
    ind, _ = draw_slot_arrays(100_000, 0.3, 2, FadingModel.none(), 1, SeedSpec(5, 0))
    se = math.sqrt(0.3 * 0.7 / ind.size)
    assert abs(ind.mean() - 0.3) <= 4 * se
    # independence across slots
    assert abs(np.corrcoef(ind[0], ind[1])[0, 1]) < 4 / math.sqrt(ind.shape[1])


@pytest.mark.parametrize("fading", [FadingModel.rayleigh(), FadingModel.nakagami(0.5),
                                    FadingModel.nakagami(3), FadingModel.none()])
def test_fading_normalisation(fading):
    h = fading.sample(SeedSpec(17, 0).generator(2), 1_000_000)
    se = h.std() / 1000 if h.std() > 0 else 0
    assert abs(h.mean() - 1) <= max(3 * se, 1e-15)
    assert (h**2).mean() == pytest.approx(fading.second_moment, rel=0.02)
    assert np.all(h > 0)


def test_rayleigh_second_moment():
    h = FadingModel.rayleigh().sample(SeedSpec(23, 0).generator(2), 1_000_000)
    assert abs((h**2).mean() - 2) <= 0.02


def test_nakagami_power_matches_gamma_cdf():
    m = 2.5
    h = FadingModel.nakagami(m).sample(SeedSpec(31, 0).generator(2), 20_000)
    # CDF 1 - Gamma_ic(m, m x)/Gamma(m) is the regularised lower incomplete gamma
    res = stats.kstest(h, lambda x: stats.gamma.cdf(m * x, m))
    assert res.pvalue > 1e-3


def test_thinned_process_is_uniform_with_density_p_lambda():
    lam, p, R, n_rep = 1.0, 0.4, 6.0, 400
    rings, sectors = 4, 6
    counts = np.zeros(rings * sectors)
    total = 0
    for i in range(n_rep):
        seed = SeedSpec(99, i)
        real = sample_ppp(lam, R, seed)
        ind, _ = draw_slot_arrays(len(real), p, 1, FadingModel.none(), 1, seed)
        pts = real.points[ind[0]]
        total += len(pts)
        # equal-area rings and equal sectors
        ring = np.minimum((np.hypot(*pts.T) / R) ** 2 * rings, rings - 1).astype(int)
        sec = np.minimum((np.arctan2(pts[:, 1], pts[:, 0]) % (2 * np.pi)) / (2 * np.pi) * sectors,
                         sectors - 1).astype(int)
        np.add.at(counts, ring * sectors + sec, 1)
    mu = p * lam * math.pi * R**2 * n_rep
    assert abs(total - mu) <= 3 * math.sqrt(mu)
    assert stats.chisquare(counts).pvalue > 1e-3
