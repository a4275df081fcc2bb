import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleson_lab import conformal_maps as cm
from carleson_lab.carleson_checkers import random_atomic_suite, whitney_ball_constant
from carleson_lab.embedding_lab import (
    Bergman,
    BergmanKernel,
    ExteriorPointError,
    ExteriorPole,
    Hardy,
    HardyKernel,
    Monomial,
    NonFiniteValueError,
    annulus_pole_sum,
    bergman_norm,
    default_family,
    disc_quadrature,
    duren_cone_sum,
    embedding_constant,
    exterior_point,
    hardy_norm,
    lq_mu_norm,
)
from carleson_lab.measures import AtomicMeasure, EmbeddingParams
from carleson_lab.planar_domain import Domain, square_curve

#: max of emb^q / whitney over the seed-1 suite for (p, q) in (1,1), (1,2), (2,3) is 0.164
DOMINANCE_K = 0.2

kernel_points = st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0, 0.9), st.floats(0, 2 * math.pi))


@given(kernel_points, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_hardy_kernel_unit_norm(a, p):
    f = HardyKernel(complex(a), p)
    assert f.exact_hardy_norm(p) == 1.0
    assert hardy_norm(f, p, nodes=4096) == pytest.approx(1.0, rel=1e-9)


def test_hardy_kernel_rejects_boundary_point():
    with pytest.raises(ValueError):
        HardyKernel(1.0 + 0j, 1.0)


@pytest.mark.parametrize("a, p, alpha", [(0.0, 2, 0), (0.5, 1, 0), (0.8j, 2, 1), (0.9, 1.5, -0.5)])
def test_bergman_kernel_closed_form_matches_quadrature(a, p, alpha):
    f = BergmanKernel(a, p, alpha)
    params = EmbeddingParams(p, p, alpha)
    numeric = bergman_norm(f, params, grid=disc_quadrature(alpha, 40, 16, 1024))
    assert f.exact_bergman_norm(params) == pytest.approx(numeric, rel=1e-6)


@pytest.mark.parametrize("n, p, alpha", [(0, 2, 1), (1, 2, 0), (5, 1.5, -0.5), (3, 1, 2)])
def test_monomial_closed_form(n, p, alpha):
    params = EmbeddingParams(p, p, alpha)
    assert Monomial(n).exact_bergman_norm(params) == pytest.approx(bergman_norm(Monomial(n), params), rel=1e-9)
    assert hardy_norm(Monomial(n), p) == pytest.approx(1.0, rel=1e-12)


def test_constant_bergman_norm_example():
    # (1/pi) int (1-|z|) dm = 1/3
    assert Monomial(0).exact_bergman_norm(EmbeddingParams(2, 2, 1)) == pytest.approx(3**-0.5)


@pytest.mark.parametrize(
    "f", [HardyKernel(0.5, 1), HardyKernel(0.6 + 0.6j, 2), Monomial(7), BergmanKernel(0.7, 2, 0)], ids=repr
)
def test_quadrature_converges_under_doubling(f):
    a, b = hardy_norm(f, 1.5, nodes=512), hardy_norm(f, 1.5, nodes=1024)
    assert abs(a / b - 1) < 5e-3
    params = EmbeddingParams(2, 2, 0.5)
    a = bergman_norm(f, params, grid=disc_quadrature(0.5, 20, 8, 256))
    b = bergman_norm(f, params, grid=disc_quadrature(0.5, 40, 8, 512))
    assert abs(a / b - 1) < 5e-3


@pytest.mark.parametrize("d", [0.5, 0.1, 0.01])
def test_exterior_pole_on_circle_closed_form(d):
    # int |e^{it} - w|^{-2} dt = 2 pi / (|w|^2 - 1)
    exact = 2 * math.pi / ((1 + d) ** 2 - 1)
    assert hardy_norm(ExteriorPole(1 + d), 1.0, Domain.unit_disc(4096)) == pytest.approx(exact, rel=1e-6)


def test_annulus_sum_bounds_pole_integral():
    dom = Domain.unit_disc(4096)
    for d in (0.5, 0.1, 0.01):
        integral = hardy_norm(ExteriorPole(1 + d), 1.0, dom)
        s = annulus_pole_sum(dom, 1 + d)
        assert integral <= s <= 4 * integral


def test_pole_on_atom_raises():
    with pytest.raises(NonFiniteValueError):
        lq_mu_norm(ExteriorPole(0.5), 1.0, AtomicMeasure.dirac(0.5))
    # zero-mass atoms on a pole are ignored
    assert lq_mu_norm(ExteriorPole(0.5), 1.0, AtomicMeasure(np.array([0.5 + 0j]), np.array([0.0]))) == 0.0


@given(st.integers(0, 1000), st.floats(0.01, 100), st.sampled_from([1.0, 2.0, 3.0]))
def test_homogeneity(seed, lam, q):
    mu = random_atomic_suite(1, 10, seed=seed)[0]
    fam = default_family(Hardy(1.0), 3, 1, 4)
    a = embedding_constant(mu.scaled(lam), Hardy(1.0), q, fam)
    assert a == pytest.approx(lam ** (1 / q) * embedding_constant(mu, Hardy(1.0), q, fam), rel=1e-12)


@given(st.floats(1, 8), st.floats(0, 2 * math.pi), st.sampled_from([(1, 1), (1, 2), (2, 3)]))
def test_point_mass_necessity(u, t, pq):
    p, q = pq
    beta = q / p
    z0 = (1 - 2.0**-u) * np.exp(1j * t)
    mu = AtomicMeasure.dirac(z0)
    emb = embedding_constant(mu, Hardy(p), q, [HardyKernel(complex(z0), p)]) ** q
    # closed form: the Whitney ball centered at z0
    centered = whitney_ball_constant(mu, beta, centers=[z0])
    assert emb >= 4**-beta * centered * (1 - 1e-12)
    # grid balls: a ball holding z0 has radius >= (1-|z0|)/3
    assert emb >= 6**-beta * whitney_ball_constant(mu, beta, depth=12) * (1 - 1e-12)


def test_dominance_on_random_suite():
    suite = random_atomic_suite(20, 20, seed=1)
    for p, q in ((1, 1), (1, 2), (2, 3)):
        fam = [f for f in default_family(Hardy(p), 6, 2, 0) if isinstance(f, HardyKernel)]
        for mu in suite:
            emb = embedding_constant(mu, Hardy(p), q, fam) ** q
            assert emb <= DOMINANCE_K * whitney_ball_constant(mu, q / p, depth=10)


def test_bergman_identity_embedding_on_area():
    # normalized area dm/pi embeds A^2 into L^2 with constant 1 on monomials
    from carleson_lab.measures import disc_area_measure

    mu = disc_area_measure(levels=16, n_angular=256).scaled(1 / math.pi)
    fam = [Monomial(n) for n in range(6)]
    assert embedding_constant(mu, Bergman(2.0), 2.0, fam) == pytest.approx(1.0, rel=1e-3)


def test_default_family_contents():
    fam = default_family(Hardy(1.0), 2, 1, 3)
    assert sum(isinstance(f, HardyKernel) for f in fam) == 7
    assert [f.n for f in fam if isinstance(f, Monomial)] == [0, 1, 2, 3]
    assert all(isinstance(f, BergmanKernel) for f in default_family(Bergman(2, 1), 2, 1, 0)[:-1])


def test_cone_sum_guard():
    with pytest.raises(ValueError):
        duren_cone_sum(AtomicMeasure.dirac(0.5), 0.0, 1.0, 5)


@given(st.integers(0, 1023), st.floats(0.01, 0.5))
def test_exterior_point_on_disc(idx, R):
    dom = Domain.unit_disc(1024)
    xi0 = dom.curve.vertices[idx]
    e = exterior_point(dom, idx, R)
    assert abs(e.point - (1 + R) * xi0) < 1e-9 + R / 64 * 2
    assert e.distance_ratio == pytest.approx(1.0, abs=1e-3)


def test_exterior_point_square_vertex():
    dom = Domain(square_curve(64))
    e = exterior_point(dom, 32, 0.2)
    assert e.point == pytest.approx(-1.2j)
    assert e.distance_ratio == pytest.approx(1.0)


def test_exterior_point_cusp_fails_at_small_scale():
    dom = Domain.from_map(cm.power_corner(2.0), 4096)
    k = int(np.argmin(np.abs(dom.curve.vertices)))
    with pytest.raises(ExteriorPointError):
        exterior_point(dom, k, 1e-4)
    with pytest.raises(ValueError):
        exterior_point(dom, k, 100.0)
