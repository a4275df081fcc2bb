import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleson_lab import conformal_maps as cm
from carleson_lab.measures import AtomicMeasure, EmbeddingParams
from carleson_lab.planar_domain import Domain, square_curve
from carleson_lab.quasi_subharmonic import (
    QnsCandidate,
    analytic_power,
    ball_integral,
    constant,
    divergence_witness,
    harmonic_mixture,
    inequality_suite,
    integral_inequality,
    kernel_family,
    poisson_kernel,
    power_stability,
    qns_constant,
    qns_profile,
    random_balls,
    spike,
    weighted_area_norm,
)

BALLS = random_balls(100, seed=1)


def test_constant_is_exactly_one_over_pi():
    assert qns_constant(constant(2.5), None, BALLS) == pytest.approx(1 / math.pi, rel=1e-13)


@given(st.floats(1e-3, 1e3), st.integers(0, 50))
def test_scale_invariance(lam, seed):
    u = harmonic_mixture([np.exp(1j * seed)], [1.0], 0.2)
    balls = random_balls(20, seed=seed)
    assert qns_constant(u.scaled(lam), None, balls) == pytest.approx(qns_constant(u, None, balls), rel=1e-12)


@given(st.floats(0, 2 * math.pi))
def test_poisson_kernel_mean_value(t):
    assert qns_constant(poisson_kernel(np.exp(1j * t)), None, BALLS) == pytest.approx(1 / math.pi, rel=0.02)


def test_subharmonic_power_below_harmonic_constant():
    u = analytic_power(lambda z: z**2, 0.5)
    assert qns_constant(u, None, random_balls(500, seed=10)) <= 1 / math.pi * (1 + 1e-3)


def test_harmonic_on_square_domain():
    dom = Domain(square_curve(64))
    balls = random_balls(100, seed=2, domain=dom)
    for c, r in balls:
        assert dom.contains(c) and r < dom.boundary_distance(c)
    u = QnsCandidate(lambda w: np.real(w) + 3.0, "affine")
    assert qns_constant(u, dom, balls) == pytest.approx(1 / math.pi, rel=1e-12)


def test_power_stability_constant_and_spike():
    a, b = power_stability(constant(1.0), 3.0, None, BALLS)
    assert a == pytest.approx(1 / math.pi) and b == pytest.approx(1 / math.pi)
    c, r = BALLS[0]
    s1, s2 = power_stability(spike(c, r / 10), 2.0, None, BALLS)
    assert s1 > 10 / math.pi and s2 > s1


def test_ball_integral_area_and_grid_guard():
    assert ball_integral(constant(1.0), 0.1j, 0.3) == pytest.approx(math.pi * 0.09, rel=1e-13)
    with pytest.raises(ValueError):
        ball_integral(constant(1.0), 0j, 0.3, grid=(4, 4))


def test_balls_outside_domain_rejected():
    with pytest.raises(ValueError):
        qns_constant(constant(), None, [(0.9 + 0j, 0.2)])
    dom = Domain(square_curve(16))
    with pytest.raises(ValueError):
        qns_constant(constant(), dom, [(3.0 + 0j, 0.1)])


def test_zero_function_profile():
    prof = qns_profile(constant(0.0), None, BALLS[:5])
    assert np.isnan(prof.ratios).all() and prof.constant == 0.0


def test_profile_csv(tmp_path):
    prof = qns_profile(constant(1.0), None, BALLS[:3])
    prof.to_csv(tmp_path / "q.csv")
    rows = (tmp_path / "q.csv").read_text().splitlines()
    assert rows[0] == "x,y,radius,ratio" and len(rows) == 4
    assert float(rows[1].split(",")[3]) == pytest.approx(1 / math.pi)


@pytest.mark.parametrize("p, q, alpha", [(1, 1, 0), (2, 2, 1), (1, 2, 0.5)])
def test_integral_inequality_for_constant(p, q, alpha):
    mu = AtomicMeasure(np.array([0.1, 0.5j, -0.9]), np.array([1.0, 2.0, 3.0]))
    lhs, rhs = integral_inequality(constant(1.0), mu, None, EmbeddingParams(p, q, alpha))
    assert lhs == pytest.approx(6.0 ** (1 / q))
    # int (1-|z|)^alpha dm = 2 pi / ((alpha+1)(alpha+2))
    assert rhs == pytest.approx((2 * math.pi / ((alpha + 1) * (alpha + 2))) ** (1 / p), rel=1e-9)


def test_weighted_area_norm_on_domain_matches_disc():
    d = Domain.from_map(cm.moebius(0.3), 2048)
    g = constant(1.0)
    assert weighted_area_norm(g, 1.0, 0.0, d) == pytest.approx(math.pi, rel=1e-3)


def test_suite_and_witness():
    params = EmbeddingParams(1, 1, 0)
    fam = kernel_family(params, depth=2, oversample=1, max_degree=2)
    assert len(fam) == 7 + 2 + 1
    s = inequality_suite(AtomicMeasure.empty(), params, fam)
    assert s.K == 0.0
    w = [divergence_witness(d, params) for d in (4, 8)]
    assert w[1] > w[0]
