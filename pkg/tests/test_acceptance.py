"""Acceptance criteria 1-10, each at its stated tolerance and runtime limit.

Every test prints one ``CRITERION n: PASS|FAIL`` line (visible without -s).
"""

import math
import time

import numpy as np
import pytest

from carleson_lab import conformal_maps as cm
from carleson_lab.carleson_checkers import luecking_suite, square_constant, whitney_ball_constant
from carleson_lab.embedding_lab import Hardy, HardyKernel, default_family, duren_cone_sum, embedding_ratios
from carleson_lab.measures import AtomicMeasure, EmbeddingParams, disc_area_measure, radial_power_measure
from carleson_lab.planar_domain import Domain, ahlfors_constant, boundary_distance, chordarc_constant, dyadic_radii
from carleson_lab.quasi_subharmonic import (
    divergence_witness,
    harmonic_mixture,
    inequality_suite,
    kernel_family,
    qns_constant,
    random_balls,
    spike,
)
from carleson_lab.stopping_time import (
    StoppingConfig,
    build_generations,
    decay_rate,
    default_M,
    default_root,
    region_oscillations,
    region_pullback,
    sampling_slack,
)

pytestmark = pytest.mark.slow

#: suite-wide constant of the integral inequality, recorded on the first verified run
INEQUALITY_SUITE_K = 1.0


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def test_criterion_01_area_square_constant(report):
    t = time.perf_counter()
    c = square_constant(disc_area_measure(), 2.0, 12)
    dt = time.perf_counter() - t
    lo, hi = 0.95 / (2 * math.pi), 1 / (2 * math.pi)
    report(1, lo <= c <= hi and dt < 5, f"square_constant={c:.8f} in [{lo:.6f}, {hi:.6f}], {dt:.2f}s < 5s")


def test_criterion_02_point_mass_extremal(report):
    t = time.perf_counter()
    mu = AtomicMeasure.dirac(0.5)
    fam = default_family(Hardy(1.0))
    assert any(isinstance(f, HardyKernel) and f.a == 0.5 for f in fam)
    r = embedding_ratios(mu, Hardy(1.0), 1.0, fam)
    sq = square_constant(mu, 1.0, 12)
    dt = time.perf_counter() - t
    best = r.argbest
    ok = (
        abs(r.best - 4 / 3) <= 1e-12
        and isinstance(best, HardyKernel)
        and best.a == 0.5
        and sq == 1 / math.pi
        and dt < 1
    )
    report(2, ok, f"kernel value={r.best!r} at a={best.a}, dyadic sup={sq!r} (1/pi={1 / math.pi!r}), {dt:.2f}s < 1s")


def test_criterion_03_luecking_equivalence(report):
    t = time.perf_counter()
    a = luecking_suite(beta=1.5, depth=12, seed=0)
    b = luecking_suite(beta=1.5, depth=12, seed=0)
    dt = time.perf_counter() - t
    ok = a.K <= 64 and a.K == b.K and dt < 60
    report(
        3,
        ok,
        f"K={a.K:.3f} (ratios in [{a.lo:.5f}, {a.hi:.5f}]) <= 64, rerun K={b.K:.3f} identical={a.K == b.K}, {dt:.1f}s < 60s",
    )


def test_criterion_04_duren_cone_sum(report):
    t = time.perf_counter()
    k = np.arange(41)
    # one atom inside each Whitney ball B_k and in no other
    mu = AtomicMeasure((1.0 - 0.875 * 2.0**-k).astype(complex), 4.0**-k)
    s = duren_cone_sum(mu, 0.0, 2.0, 40)
    dt = time.perf_counter() - t
    report(4, abs(s - 4 / 3) <= 1e-6 and dt < 1, f"cone sum={s!r}, |sum - 4/3|={abs(s - 4 / 3):.2e} <= 1e-6, {dt:.2f}s < 1s")


def test_criterion_05_stopping_time_validity(report):
    t = time.perf_counter()
    root = default_root()
    lines, ok = [], True
    for m in (cm.quadratic(0.5), cm.moebius(0.7)):
        M = default_M(m)
        coarse = build_generations(m, root, StoppingConfig(M, 14, 8))
        fine = build_generations(m, root, StoppingConfig(M, 14, 32))
        slack8 = sampling_slack(m, coarse, 8)
        slack32 = sampling_slack(m, fine, 32)
        osc = region_oscillations(m, coarse, 128).max()
        rho = decay_rate(coarse)
        rhos = [decay_rate(build_generations(m, root, StoppingConfig(math.e**j, 14, 8))) for j in (1, 2, 3)]
        ok &= osc <= math.log(M) + slack8
        ok &= slack32 <= 0.5 * slack8
        ok &= rho < 1
        ok &= rhos[0] >= rhos[1] >= rhos[2]
        lines.append(
            f"{m.tag}: M={M:.3f} osc={osc:.4f} <= logM+slack={math.log(M) + slack8:.4f}, "
            f"slack 8->32: {slack8:.2e}->{slack32:.2e}, rho={rho:.3f}, rho(e,e2,e3)={[round(r, 4) for r in rhos]}"
        )
    dt = time.perf_counter() - t
    ok &= dt < 120
    report(5, bool(ok), "; ".join(lines) + f"; {dt:.1f}s < 120s")


def _test_measures(m, root, rng):
    a = root.arc

    def in_box(n, max_level):
        t = a.start_turn + a.length_turn * rng.uniform(0.0, 1.0, n)
        gap = a.length_turn * 2.0 ** -rng.uniform(0.0, max_level, n)
        return (1.0 - gap) * np.exp(2j * np.pi * t)

    k = np.arange(1, 12)
    radial = (1.0 - 0.75 * a.length_turn * 2.0**-k) * np.exp(1j * a.center_angle)
    out = []
    for z in (in_box(300, 4), in_box(300, 11), radial):
        out.append(AtomicMeasure(m(z), rng.uniform(0.1, 1.0, len(z))))
    return out


def test_criterion_06_pullback_consistency(report):
    t = time.perf_counter()
    root = default_root()
    rng = np.random.default_rng(0)
    worst, ok = 1.0, True
    for m in cm.catalog():
        M = default_M(m)
        tree = build_generations(m, root, StoppingConfig(M, 12, 8))
        bound = M**2 * 1.05
        for mu in _test_measures(m, root, rng):
            r = region_pullback(m, mu, tree, EmbeddingParams(1.0, 1.0)).ratio
            ok &= 1 / bound <= r <= bound
            worst = max(worst, r, 1 / r)
    dt = time.perf_counter() - t
    report(6, bool(ok) and dt < 60, f"{len(cm.catalog())} maps x 3 measures, worst ratio deviation {worst:.4f} (bound M^2*1.05), {dt:.1f}s < 60s")


def test_criterion_07_koebe_sandwich(report):
    t = time.perf_counter()
    r = np.linspace(0.0, 0.98, 25)
    th = np.arange(40) * 2 * np.pi / 40
    z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    assert len(z) == 1000
    worst, ok = [], True
    for m in cm.catalog():
        dom = Domain.from_map(m, 4096)
        d = boundary_distance(dom, m(z))
        scale = np.abs(m.deriv(z)) * (1 - np.abs(z) ** 2)
        tol = dom.sagitta
        good = (d >= 0.25 * scale - tol) & (d <= scale + tol)
        ok &= bool(good.all())
        worst.append(f"{m.tag}:{int((~good).sum())}")
    dt = time.perf_counter() - t
    report(7, ok and dt < 10, f"violations per map {worst}, {dt:.2f}s < 10s")


def test_criterion_08_corner_cusp(report):
    t = time.perf_counter()
    vals = {}
    for gamma in (1.0, 2.0):
        m = cm.power_corner(gamma)
        for n in (1024, 4096):
            c = Domain.from_map(m, n).curve
            centers = c.vertices[:: n // 256]
            vals[gamma, n] = (chordarc_constant(c), ahlfors_constant(c, centers, dyadic_radii(c, 10)))
    dt = time.perf_counter() - t
    ca1 = abs(vals[1.0, 4096][0] / vals[1.0, 1024][0] - 1)
    ca2 = vals[2.0, 4096][0] / vals[2.0, 1024][0]
    ah = [abs(vals[g, 4096][1] / vals[g, 1024][1] - 1) for g in (1.0, 2.0)]
    ok = ca1 < 0.05 and ca2 >= 2 and max(ah) <= 0.2 and dt < 30
    report(
        8,
        ok,
        f"corner chord-arc change {ca1:.2%} < 5%, cusp chord-arc growth x{ca2:.2f} >= 2, "
        f"Ahlfors changes {ah[0]:.2%}/{ah[1]:.2%} <= 20%, {dt:.1f}s < 30s",
    )


def test_criterion_09_integral_inequality_chain(report):
    t = time.perf_counter()
    parts, ok, K = [], True, 0.0
    for p, q, alpha in ((1, 1, 0), (1, 2, 0), (2, 2, 1)):
        params = EmbeddingParams(p, q, alpha)
        beta = params.bergman_exponent
        mu = radial_power_measure(beta - 2, levels=16, n_angular=512)
        wb = whitney_ball_constant(mu, beta, depth=6)
        suite = inequality_suite(mu, params, kernel_family(params))
        ok &= math.isfinite(wb) and bool(np.isfinite(suite.ratios).all())
        K = max(K, suite.K)
        parts.append(f"({p},{q},{alpha}): whitney={wb:.3f} K={suite.K:.6f}")
    ok &= K <= INEQUALITY_SUITE_K * (1 + 1e-9)
    w6 = divergence_witness(6, EmbeddingParams(1, 1, 0))
    w12 = divergence_witness(12, EmbeddingParams(1, 1, 0))
    ok &= w12 >= 4 * w6
    dt = time.perf_counter() - t
    ok &= dt < 120
    report(9, bool(ok), "; ".join(parts) + f"; suite K={K:.6f} <= {INEQUALITY_SUITE_K}; witness x{w12 / w6:.1f} >= 4; {dt:.1f}s < 120s")


def test_criterion_10_qns_baseline(report):
    t = time.perf_counter()
    balls = random_balls(500, seed=10)
    rng = np.random.default_rng(10)
    errs = []
    for _ in range(5):
        n = int(rng.integers(1, 6))
        u = harmonic_mixture(np.exp(2j * np.pi * rng.uniform(0, 1, n)), rng.uniform(0.1, 1.0, n), rng.uniform(0.0, 1.0))
        errs.append(abs(qns_constant(u, None, balls) * math.pi - 1))
    c, r = balls[0]
    s = qns_constant(spike(c, r / 10), None, balls)
    dt = time.perf_counter() - t
    ok = max(errs) <= 0.02 and s > 10 / math.pi and dt < 30
    report(10, ok, f"harmonic |pi*C - 1| max {max(errs):.2e} <= 2%, spike C={s:.2f} > 10/pi={10 / math.pi:.2f}, {dt:.1f}s < 30s")
