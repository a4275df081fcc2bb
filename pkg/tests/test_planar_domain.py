import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleson_lab import conformal_maps as cm
from carleson_lab.planar_domain import (
    BoundaryCurve,
    Domain,
    ahlfors_constant,
    boundary_distance,
    chordarc_constant,
    dyadic_radii,
    quasihyperbolic_distance,
    segment_disc_lengths,
    square_curve,
    whitney_cover,
)


@pytest.fixture(scope="module")
def disc():
    return Domain.unit_disc(1024)


@pytest.fixture(scope="module")
def disc_cover(disc):
    return whitney_cover(disc, 9)


@given(st.floats(0, 0.99), st.floats(0, 2 * math.pi))
def test_disc_distance(r, t):
    d = Domain.unit_disc(1024)
    assert abs(boundary_distance(d, r * np.exp(1j * t)) - (1 - r)) <= 3e-4
    assert d.sagitta <= 1 - math.cos(math.pi / 1024) + 1e-12


def test_sagitta_bounds_polyline_error(disc):
    t = np.random.default_rng(0).uniform(0, 2 * math.pi, 500)
    assert np.max(boundary_distance(disc, np.exp(1j * t))) <= disc.sagitta + 1e-15


def test_curve_orientation_and_validation():
    c = square_curve(8)
    cw = BoundaryCurve(c.vertices[::-1])
    assert cw.area == pytest.approx(4.0)
    with pytest.raises(ValueError):
        BoundaryCurve(np.exp(1j * np.linspace(0, 6, 8)))
    bow = np.concatenate([np.linspace(0, 1 + 1j, 10), np.linspace(1, 1j, 10)])
    with pytest.raises(ValueError):
        BoundaryCurve(bow)


def test_curve_csv_roundtrip(tmp_path):
    c = Domain.from_map(cm.quadratic(0.5), 64).curve
    c.to_csv(tmp_path / "c.csv")
    assert np.array_equal(BoundaryCurve.from_csv(tmp_path / "c.csv").vertices, c.vertices)
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        BoundaryCurve.from_csv(tmp_path / "bad.csv")


def test_segment_disc_lengths_exact():
    sq = square_curve(16)
    # disc of radius 0.5 at the middle of the bottom side covers length 1
    assert segment_disc_lengths(sq.vertices, -1j, 0.5).sum() == pytest.approx(1.0)
    assert segment_disc_lengths(sq.vertices, 0j, 0.5).sum() == 0.0


def test_circle_ahlfors(disc):
    c = disc.curve
    a = ahlfors_constant(c, c.vertices[::32], dyadic_radii(c, 10))
    assert a <= math.pi + 1e-2
    # at the largest radius the whole circle is inside: 2 pi / 2
    assert a >= math.pi - 1e-2


def test_chordarc_circle_and_square(disc):
    assert chordarc_constant(disc.curve) == pytest.approx(math.pi / 2, rel=1e-5)
    sq = chordarc_constant(square_curve(64))
    # opposite side midpoints: arc 4, chord 2
    assert sq == pytest.approx(2.0, rel=1e-12)
    assert chordarc_constant(disc.curve, sample_pairs=2000) <= math.pi / 2 + 1e-9


def test_whitney_cover_band_and_area(disc, disc_cover):
    ratio = disc_cover.diameters / disc_cover.deltas
    assert np.all(ratio <= 0.5)
    assert np.all(ratio > 2 / 9)
    covered = disc_cover.area + disc_cover.dropped_area
    # everything missing is within the unresolved boundary layer
    assert disc_cover.area <= math.pi
    assert covered >= disc.curve.area * 0.97


def test_whitney_cover_growth(disc_cover):
    c = disc_cover.counts_per_level
    growth = [c[k + 1] / c[k] for k in range(6, 9)]
    assert all(1.6 <= g <= 2.5 for g in growth)


def test_whitney_squares_disjoint(disc_cover):
    rng = np.random.default_rng(3)
    w = np.sqrt(rng.uniform(0, 0.8, 300)) * np.exp(1j * rng.uniform(0, 2 * math.pi, 300))
    idx = disc_cover.locate(w)
    assert np.all(idx >= 0)
    for z, j in zip(w, idx):
        h = disc_cover.sides / 2
        d = z - disc_cover.centers
        inside = (np.abs(d.real) < h) & (np.abs(d.imag) < h)
        assert inside.sum() <= 1


def test_qh_distance_disc(disc, disc_cover):
    d = quasihyperbolic_distance(disc, 0j, 0.9 + 0j, disc_cover)
    assert math.log(10) / 2 <= d <= 2 * math.log(10)
    assert quasihyperbolic_distance(disc, 0.9 + 0j, 0j, disc_cover) == pytest.approx(d)
    assert quasihyperbolic_distance(disc, 0.3j, 0.3j, disc_cover) == 0.0


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_qh_symmetric_and_positive(a, b):
    disc = Domain.unit_disc(512)
    cover = whitney_cover(disc, 7)
    w1, w2 = 0.5 * np.exp(1j * a), 0.6 * np.exp(1j * b)
    d12 = quasihyperbolic_distance(disc, w1, w2, cover)
    assert d12 == pytest.approx(quasihyperbolic_distance(disc, w2, w1, cover), rel=1e-12)
    # delta <= 1 along any path
    assert d12 >= abs(w1 - w2) * 0.999


def test_whitney_depth_guard(disc):
    with pytest.raises(ValueError):
        whitney_cover(disc, 40)


def test_cardioid_domain_contains_images():
    m = cm.power_corner(2.0)
    dom = Domain.from_map(m, 2048)
    z = 0.9 * np.exp(1j * np.linspace(0, 2 * math.pi, 50, endpoint=False))
    assert dom.contains(m(z)).all()
