"""Quasi-nearly subharmonic (QNS) checks and the Carleson-to-integral inequality.

A non-negative ``u`` is C-QNS when ``u(a) <= C r**-2 int_{B(a,r)} u dm`` on
every ball inside the domain. With this normalization the mean-value
equality of a positive harmonic function gives ``C = 1/pi``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .disc_geometry import TWO_PI, hyperbolic_grid
from .embedding_lab import BergmanKernel, Monomial, TestFunction, disc_quadrature
from .measures import AtomicMeasure, EmbeddingParams, PlanarMeasure
from .planar_domain import Domain, boundary_distance

#: midpoint-rule cells per ball: radial x angular
BALL_GRID = (16, 32)
MIN_BALL_CELLS = 32


@dataclass(frozen=True)
class QnsCandidate:
    evaluator: Callable = field(repr=False)
    descriptor: str = "custom"

    def __call__(self, w) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(w, dtype=complex)), dtype=float)

    def power(self, p: float) -> "QnsCandidate":
        if not p > 0:
            raise ValueError("p must be positive")
        return QnsCandidate(lambda w: self(w) ** p, f"({self.descriptor})^{p}")

    def scaled(self, lam: float) -> "QnsCandidate":
        return QnsCandidate(lambda w: lam * self(w), f"{lam}*({self.descriptor})")


def constant(c: float = 1.0) -> QnsCandidate:
    return QnsCandidate(lambda w: np.full(np.shape(w), float(c)), f"const({c})")


def analytic_power(f: TestFunction | Callable, p: float = 1.0, name: str | None = None) -> QnsCandidate:
    """``|f|^p`` for analytic ``f``: subharmonic for every ``p > 0``."""
    return QnsCandidate(lambda w: np.abs(f(w)) ** p, name or f"|{f}|^{p}")


def poisson_kernel(zeta: complex) -> QnsCandidate:
    """Positive harmonic ``(1 - |z|^2) / |zeta - z|^2`` on the disc (``|zeta| = 1``)."""
    zeta = complex(zeta)

    def u(z):
        return (1.0 - np.abs(z) ** 2) / np.abs(zeta - z) ** 2

    return QnsCandidate(u, f"poisson({zeta})")


def harmonic_mixture(zetas: Sequence[complex], weights: Sequence[float], base: float = 0.0) -> QnsCandidate:
    """``base + sum w_j P(., zeta_j)``: positive harmonic on the disc."""
    zetas = np.asarray(zetas, dtype=complex)
    weights = np.asarray(weights, dtype=float)

    def u(z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, base, dtype=float)
        for zeta, wt in zip(zetas, weights):
            out = out + wt * (1.0 - np.abs(z) ** 2) / np.abs(zeta - z) ** 2
        return out

    return QnsCandidate(u, f"harmonic_mixture(n={len(zetas)})")


def spike(center: complex, width: float) -> QnsCandidate:
    """Narrow Gaussian bump: the negative control, far from any QNS constant."""
    center = complex(center)
    return QnsCandidate(lambda w: np.exp(-np.abs(w - center) ** 2 / width**2), f"spike({center}, {width})")


# --- ball integrals ------------------------------------------------------------


def _ball_nodes(center: complex, radius: float, grid: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    n_r, n_t = grid
    rho = (np.arange(n_r) + 0.5) * radius / n_r
    theta = (np.arange(n_t) + 0.5) * TWO_PI / n_t
    nodes = center + (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(rho * (radius / n_r) * (TWO_PI / n_t), n_t)
    return nodes, weights


def ball_integral(u: QnsCandidate, center: complex, radius: float, grid: tuple[int, int] = BALL_GRID) -> float:
    """Polar midpoint rule for ``int_{B(center, radius)} u dm``."""
    if grid[0] * grid[1] < MIN_BALL_CELLS:
        raise ValueError(f"ball grid needs at least {MIN_BALL_CELLS} cells")
    nodes, weights = _ball_nodes(center, radius, grid)
    return float(u(nodes) @ weights)


def _check_inside(domain: Domain | None, centers: np.ndarray, radii: np.ndarray) -> None:
    if domain is None:
        room = 1.0 - np.abs(centers)
    else:
        room = np.where(domain.contains(centers), np.atleast_1d(boundary_distance(domain, centers)), -1.0)
    bad = radii > room
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(f"ball {i} (center {complex(centers[i])}, radius {radii[i]}) leaves the domain")


@dataclass(frozen=True)
class QnsProfile:
    centers: np.ndarray
    radii: np.ndarray
    #: u(a) r^2 / int_B u; inf when the integral vanishes under u(a) > 0, nan for skipped 0/0 balls
    ratios: np.ndarray

    @property
    def constant(self) -> float:
        r = self.ratios[~np.isnan(self.ratios)]
        return float(r.max()) if len(r) else 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "radius", "ratio"])
            for c, r, q in zip(self.centers, self.radii, self.ratios):
                w.writerow([repr(float(c.real)), repr(float(c.imag)), repr(float(r)), repr(float(q))])


def qns_profile(
    u: QnsCandidate,
    domain: Domain | None,
    balls: Sequence[tuple[complex, float]],
    grid: tuple[int, int] = BALL_GRID,
) -> QnsProfile:
    centers = np.array([complex(b[0]) for b in balls], dtype=complex)
    radii = np.array([float(b[1]) for b in balls])
    _check_inside(domain, centers, radii)
    if grid[0] * grid[1] < MIN_BALL_CELLS:
        raise ValueError(f"ball grid needs at least {MIN_BALL_CELLS} cells")
    ratios = np.empty(len(centers))
    for i, (c, r) in enumerate(zip(centers, radii)):
        ua = float(u(np.array([c]))[0])
        integral = ball_integral(u, c, r, grid)
        if integral > 0:
            ratios[i] = ua * r * r / integral
        else:
            ratios[i] = math.inf if ua > 0 else math.nan
    return QnsProfile(centers, radii, ratios)


def qns_constant(
    u: QnsCandidate,
    domain: Domain | None,
    balls: Sequence[tuple[complex, float]],
    grid: tuple[int, int] = BALL_GRID,
) -> float:
    """Least ``C`` with ``u(a) <= C r**-2 int_{B(a,r)} u dm`` on the sampled balls (``domain=None``: the disc)."""
    return qns_profile(u, domain, balls, grid).constant


def power_stability(
    u: QnsCandidate, p: float, domain: Domain | None, balls: Sequence[tuple[complex, float]]
) -> tuple[float, float]:
    """QNS constants of ``u`` and ``u^p`` on the same balls."""
    return qns_constant(u, domain, balls), qns_constant(u.power(p), domain, balls)


def random_balls(
    n: int, seed: int = 0, domain: Domain | None = None, max_radius_fraction: float = 0.9
) -> list[tuple[complex, float]]:
    """Balls with uniform random centers and radii ``U(0.1, max_radius_fraction) * delta(center)``."""
    rng = np.random.default_rng(seed)
    if domain is None:
        r = np.sqrt(rng.uniform(0.0, 0.95**2, n))
        centers = r * np.exp(1j * rng.uniform(0.0, TWO_PI, n))
        delta = 1.0 - np.abs(centers)
    else:
        xmin, ymin, xmax, ymax = domain.polygon.bounds
        found: list[np.ndarray] = []
        count = 0
        while count < n:
            c = rng.uniform(xmin, xmax, 4 * n) + 1j * rng.uniform(ymin, ymax, 4 * n)
            c = c[domain.contains(c)]
            found.append(c)
            count += len(c)
        centers = np.concatenate(found)[:n]
        delta = np.atleast_1d(boundary_distance(domain, centers))
    radii = rng.uniform(0.1, max_radius_fraction, n) * delta
    return list(zip(centers.tolist(), radii.tolist()))


# --- the integral inequality ------------------------------------------------------


def weighted_area_norm(
    g: QnsCandidate, p: float, alpha: float, domain: Domain | None = None, grid=None
) -> float:
    """``(int g^p delta^alpha dm)^{1/p}``, unnormalized.

    Disc: geometric radial quadrature with the exact ``(1-|z|)^alpha`` weight.
    Domain: change of variables through the source map.
    """
    if domain is None:
        q = grid or disc_quadrature(alpha, levels=30, angular=1024)
        return float((g(q.nodes) ** p @ q.weights) ** (1.0 / p))
    if domain.source_map is None:
        raise ValueError("domain integrals need a source map")
    q = grid or disc_quadrature(0.0, levels=14, angular=512)
    phi = domain.source_map
    w = phi(q.nodes)
    delta = np.atleast_1d(boundary_distance(domain, w))
    vals = g(w) ** p * delta**alpha * np.abs(phi.deriv(q.nodes)) ** 2
    return float((vals @ q.weights) ** (1.0 / p))


def integral_inequality(
    g: QnsCandidate, mu: PlanarMeasure, domain: Domain | None, params: EmbeddingParams, grid=None
) -> tuple[float, float]:
    """``lhs = (int g^q dmu)^{1/q}`` and ``rhs = (int g^p delta^alpha dm)^{1/p}``."""
    vals = g(mu.points) if len(mu.points) else np.zeros(0)
    lhs = float((vals**params.q @ mu.weights) ** (1.0 / params.q)) if len(vals) else 0.0
    rhs = weighted_area_norm(g, params.p, params.alpha, domain, grid)
    return lhs, rhs


def kernel_family(params: EmbeddingParams, depth: int = 5, oversample: int = 2, max_degree: int = 8) -> list[QnsCandidate]:
    """``|f|`` for Bergman-type kernels on the hyperbolic grid, monomials and the constant."""
    fam = [
        analytic_power(BergmanKernel(complex(a), params.p, params.alpha), 1.0, f"|kernel({complex(a):.6g})|")
        for a in hyperbolic_grid(depth, oversample)
    ]
    fam += [analytic_power(Monomial(n), 1.0, f"|z^{n}|") for n in range(1, max_degree + 1)]
    fam.append(constant(1.0))
    return fam


@dataclass(frozen=True)
class InequalitySuite:
    descriptors: list
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.lhs / self.rhs

    @property
    def K(self) -> float:
        return float(self.ratios.max())


def inequality_suite(
    mu: PlanarMeasure, params: EmbeddingParams, family: Sequence[QnsCandidate] | None = None, domain: Domain | None = None
) -> InequalitySuite:
    if family is None:
        family = kernel_family(params)
    grid = disc_quadrature(params.alpha, levels=24, angular=512) if domain is None else None
    lhs, rhs = [], []
    for g in family:
        a, b = integral_inequality(g, mu, domain, params, grid)
        lhs.append(a)
        rhs.append(b)
    return InequalitySuite([g.descriptor for g in family], np.array(lhs), np.array(rhs))


def witness_measure(depth: int, decay: float = 0.5) -> AtomicMeasure:
    """Atoms at ``1 - 2**-k`` (``k = 1..depth``) with weights ``2**(-decay * k)``."""
    k = np.arange(1, depth + 1)
    return AtomicMeasure((1.0 - 2.0**-k).astype(complex), 2.0 ** (-decay * k))


def divergence_witness(depth: int, params: EmbeddingParams, decay: float = 0.5) -> float:
    """``max lhs/rhs`` over kernels concentrating at the atoms of :func:`witness_measure`.

    The atoms accumulate at 1 with weights too large for the ball
    condition of order ``(2 + alpha) q / p``, so the ratio grows with depth.
    """
    mu = witness_measure(depth, decay)
    grid = disc_quadrature(params.alpha, levels=max(30, 2 * depth + 10), angular=1024)
    best = 0.0
    for a in mu.points:
        g = analytic_power(BergmanKernel(complex(a), params.p, params.alpha))
        lhs, rhs = integral_inequality(g, mu, None, params, grid)
        best = max(best, lhs / rhs)
    return best
