"""Best constants in the geometric Carleson conditions.

* square condition   ``mu(S(I)) <= c |I|^beta``      (dyadic arcs)
* Whitney balls      ``mu(B(z, r)) <= c r^beta``     (``r = delta(z)/2``)
* boundary balls     ``mu(B(xi, R) cap Omega) <= c R^beta``

The sup over all arcs is replaced by the dyadic sup. Any arc ``I`` is
covered by at most two dyadic arcs of length ``<= 2|I|`` (three-fold
shifting argument), so the dyadic constant underestimates the true one by
at most :func:`dyadic_gap_factor`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .disc_geometry import TWO_PI, WHITNEY_C, dyadic_index, hyperbolic_grid
from .measures import AtomicMeasure, PlanarMeasure, measure_of_balls
from .planar_domain import Domain, boundary_distance, dyadic_radii

DEFAULT_OVERSAMPLE = 16


def dyadic_gap_factor(beta: float) -> float:
    return 2.0 * 2.0**beta


@dataclass(frozen=True)
class ProbeTable:
    """One row per probe: ``parameter`` is the box level / ball radius."""

    probe_id: np.ndarray
    parameter: np.ndarray
    measure: np.ndarray
    ratio: np.ndarray

    @property
    def best(self) -> float:
        return float(self.ratio.max()) if len(self.ratio) else 0.0

    def to_csv(self, path) -> None:
        write_probes_csv(path, self)


def write_probes_csv(path, table: ProbeTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["probe_id", "parameter", "measure", "ratio"])
        for row in zip(table.probe_id, table.parameter, table.measure, table.ratio):
            w.writerow([str(row[0]), repr(float(row[1])), repr(float(row[2])), repr(float(row[3]))])


def square_profile(mu: PlanarMeasure, beta: float, depth: int) -> ProbeTable:
    """Mass and ratio of every dyadic box of levels ``0..depth`` holding mass."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    pts, w = mu.points, mu.weights
    r = np.abs(pts)
    inside = r < 1.0
    pts, w, r = pts[inside], w[inside], r[inside]
    ids, params, masses, ratios = [], [], [], []
    for k in range(depth + 1):
        n = 1 << k
        sel = r >= max(0.0, 1.0 - 1.0 / n)
        if not sel.any():
            break
        m = np.bincount(dyadic_index(pts[sel], k), weights=w[sel], minlength=n)
        j = np.flatnonzero(m > 0)
        length = TWO_PI / n
        ids.extend(f"L{k}:{i}" for i in j)
        params.append(np.full(len(j), float(k)))
        masses.append(m[j])
        ratios.append(m[j] / length**beta)
    if not masses:
        return ProbeTable(np.array([], dtype=str), np.zeros(0), np.zeros(0), np.zeros(0))
    return ProbeTable(np.array(ids), np.concatenate(params), np.concatenate(masses), np.concatenate(ratios))


def square_constant(mu: PlanarMeasure, beta: float, depth: int) -> float:
    """``max mu(S) / |I|^beta`` over dyadic boxes up to ``depth``."""
    return square_profile(mu, beta, depth).best


def whitney_centers(depth: int, domain: Domain | None = None, oversample: int = DEFAULT_OVERSAMPLE) -> np.ndarray:
    z = hyperbolic_grid(depth, oversample)
    if domain is None:
        return z
    if domain.source_map is None:
        raise ValueError("domain without a source map needs explicit centers")
    return domain.source_map(z)


def whitney_profile(
    mu: PlanarMeasure,
    beta: float,
    centers=None,
    radius_fraction: float = 0.5,
    *,
    depth: int = 10,
    domain: Domain | None = None,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> ProbeTable:
    if not (WHITNEY_C <= radius_fraction <= 0.5):
        raise ValueError(f"radius_fraction must lie in [{WHITNEY_C}, 0.5]")
    if centers is None:
        centers = whitney_centers(depth, domain, oversample)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    if domain is None:
        delta = 1.0 - np.abs(centers)
    else:
        delta = np.atleast_1d(boundary_distance(domain, centers))
    radii = radius_fraction * delta
    masses = measure_of_balls(mu, centers, radii)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(masses > 0, masses / radii**beta, 0.0)
    return ProbeTable(np.arange(len(centers)).astype(str), radii, masses, ratios)


def whitney_ball_constant(
    mu: PlanarMeasure,
    beta: float,
    centers=None,
    radius_fraction: float = 0.5,
    *,
    depth: int = 10,
    domain: Domain | None = None,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> float:
    """``max mu(B(z, r)) / r^beta`` over Whitney balls ``r = radius_fraction * delta(z)``.

    Default centers: radial levels ``1 - 2**-k`` (``k <= depth``) with
    ``oversample * 2**k`` angles each, mapped into the domain when one is given.
    """
    return whitney_profile(
        mu, beta, centers, radius_fraction, depth=depth, domain=domain, oversample=oversample
    ).best


def default_boundary_centers(domain: Domain, count: int = 256) -> np.ndarray:
    v = domain.curve.vertices
    step = max(1, len(v) // count)
    return v[::step]


def default_boundary_radii(domain: Domain, levels: int = 12) -> np.ndarray:
    """Dyadic fractions ``diam / 2**k``, ``k >= 1``, above the polyline resolution.

    The floor is eight times the longest segment (and the sagitta): below
    it, atom-per-segment measures are too coarse to resolve a ball.
    """
    curve = domain.curve
    floor = max(8.0 * float(curve.segment_lengths.max()), domain.sagitta)
    radii = dyadic_radii(curve, levels, start=1)
    return radii[radii >= floor]


def boundary_ball_profile(
    mu: PlanarMeasure,
    domain: Domain,
    beta: float = 1.0,
    centers=None,
    radii=None,
) -> ProbeTable:
    if centers is None:
        centers = default_boundary_centers(domain)
    if radii is None:
        radii = default_boundary_radii(domain)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    inside = domain.contains(mu.points) if len(mu.points) else np.zeros(0, bool)
    inner = AtomicMeasure(mu.points[inside], mu.weights[inside])
    cc = np.repeat(centers, len(radii))
    rr = np.tile(radii, len(centers))
    masses = measure_of_balls(inner, cc, rr)
    ids = np.array([f"{i}:{j}" for i in range(len(centers)) for j in range(len(radii))])
    return ProbeTable(ids, rr, masses, masses / rr**beta)


def boundary_ball_constant(
    mu: PlanarMeasure,
    domain: Domain,
    beta: float = 1.0,
    centers=None,
    radii=None,
) -> float:
    """``max mu(B(xi, R) cap Omega) / R^beta`` over boundary centers and radii."""
    return boundary_ball_profile(mu, domain, beta, centers, radii).best


@dataclass(frozen=True)
class EquivalenceReport:
    square_c: float
    ball_c: float
    ratio: float
    beta: float
    depth: int


def equivalence_report(
    mu: PlanarMeasure, beta: float, depth: int, oversample: int = DEFAULT_OVERSAMPLE
) -> EquivalenceReport:
    """Square and Whitney-ball constants side by side; ``ratio = square / ball``."""
    if not beta > 1:
        raise ValueError("the square/ball equivalence needs beta > 1")
    s = square_constant(mu, beta, depth)
    b = whitney_ball_constant(mu, beta, depth=depth, oversample=oversample)
    if s == 0 and b == 0:
        ratio = 1.0
    elif b == 0:
        ratio = math.inf
    else:
        ratio = s / b
    return EquivalenceReport(s, b, ratio, beta, depth)


def random_atomic_suite(
    n_measures: int = 100, n_atoms: int = 20, seed: int = 0, max_exponent: float = 10.0
) -> list[AtomicMeasure]:
    """Atoms at radii ``1 - 2**-U``, ``U ~ Uniform(1, max_exponent)``, uniform angles and weights."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_measures):
        u = rng.uniform(1.0, max_exponent, n_atoms)
        theta = rng.uniform(0.0, TWO_PI, n_atoms)
        w = rng.uniform(0.1, 1.0, n_atoms)
        out.append(AtomicMeasure((1.0 - 2.0**-u) * np.exp(1j * theta), w))
    return out


@dataclass(frozen=True)
class SuiteBracket:
    ratios: np.ndarray
    K: float

    @property
    def lo(self) -> float:
        return float(self.ratios.min())

    @property
    def hi(self) -> float:
        return float(self.ratios.max())


def luecking_suite(beta: float = 1.5, depth: int = 12, seed: int = 0, n_measures: int = 100) -> SuiteBracket:
    """Equivalence ratios on the random suite and the smallest ``K`` with all ratios in ``[1/K, K]``."""
    ratios = np.array(
        [equivalence_report(mu, beta, depth).ratio for mu in random_atomic_suite(n_measures, seed=seed)]
    )
    K = float(max(ratios.max(), 1.0 / ratios.min()))
    return SuiteBracket(ratios, K)
