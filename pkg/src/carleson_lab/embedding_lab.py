"""Analytic side of the Carleson embeddings: test functions, norms, family sups.

``embedding_constant`` is a sup over a finite family and therefore a lower
bound for the operator norm of ``X -> L^q(mu)``; it is compared against the
geometric constants of :mod:`carleson_checkers`, never against an exact
operator norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import hyp2f1, roots_jacobi

from .disc_geometry import TWO_PI, hyperbolic_grid
from .measures import EmbeddingParams, PlanarMeasure, measure_of_ball
from .planar_domain import BoundaryCurve, Domain, boundary_distance


class NonFiniteValueError(ValueError):
    """A test function was evaluated at (or numerically on) a pole."""


# --- test functions -----------------------------------------------------------


class TestFunction:
    __test__ = False  # not a pytest class

    def __call__(self, z) -> np.ndarray:
        raise NotImplementedError

    def exact_hardy_norm(self, p: float) -> float | None:
        return None

    def exact_bergman_norm(self, params: EmbeddingParams) -> float | None:
        return None


@dataclass(frozen=True)
class HardyKernel(TestFunction):
    """``((1 - |a|^2) / (1 - conj(a) z)^2)^{1/p}``: unit ``H^p`` norm, peak at ``a``."""

    a: complex
    p: float

    def __post_init__(self):
        if abs(self.a) >= 1:
            raise ValueError("kernel point must lie in the open disc")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a = complex(self.a)
        # Re(1 - conj(a) z) > 0 on the disc, so the principal Log is analytic there
        return (1.0 - abs(a) ** 2) ** (1.0 / self.p) * np.exp(
            -(2.0 / self.p) * np.log(1.0 - a.conjugate() * z)
        )

    def exact_hardy_norm(self, p):
        return 1.0 if p == self.p else None


@dataclass(frozen=True)
class BergmanKernel(TestFunction):
    """``((1 - |a|^2)^{2+alpha} / (1 - conj(a) z)^{2(2+alpha)})^{1/p}``, ``A^p_alpha`` analogue."""

    a: complex
    p: float
    alpha: float = 0.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a = complex(self.a)
        s = (2.0 + self.alpha) / self.p
        return (1.0 - abs(a) ** 2) ** s * np.exp(-2.0 * s * np.log(1.0 - a.conjugate() * z))

    def exact_bergman_norm(self, params):
        if params.p != self.p or params.alpha != self.alpha:
            return None
        # the norm depends on |a| only
        return _bergman_kernel_norm(round(abs(self.a), 15), self.p, self.alpha)


@dataclass(frozen=True)
class ExteriorPole(TestFunction):
    """``w -> 1 / (w - pole)^2`` with the pole off the closed domain."""

    pole: complex

    def __call__(self, w):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / (np.asarray(w, dtype=complex) - self.pole) ** 2


@dataclass(frozen=True)
class Monomial(TestFunction):
    n: int

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z**self.n if self.n else np.ones_like(z)

    def exact_hardy_norm(self, p):
        return 1.0

    def exact_bergman_norm(self, params):
        # (1/pi) int |z|^{np} (1-|z|)^alpha dm = 2 B(np + 2, alpha + 1)
        return (2.0 * beta_fn(self.n * params.p + 2.0, params.alpha + 1.0)) ** (1.0 / params.p)


@dataclass(frozen=True)
class Hardy:
    p: float


@dataclass(frozen=True)
class Bergman:
    p: float
    alpha: float = 0.0


# --- norms ------------------------------------------------------------------


def _finite_or_raise(vals: np.ndarray, where: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NonFiniteValueError(f"{what}: non-finite value at {complex(where.ravel()[np.argmax(bad.ravel())])}")


def hardy_norm(f: TestFunction, p: float, boundary: BoundaryCurve | Domain | None = None, nodes: int = 1024) -> float:
    """``H^p`` norm by the trapezoid rule.

    Disc (``boundary=None``): ``((1/2pi) int |f(e^{it})|^p dt)^{1/p}`` on
    ``nodes`` equispaced points. Curve: ``(int_Gamma |f|^p ds)^{1/p}`` over
    the polyline segments, unnormalized.
    """
    if boundary is None:
        xi = np.exp(1j * TWO_PI * np.arange(nodes) / nodes)
        v = np.abs(f(xi)) ** p
        _finite_or_raise(v, xi, "hardy_norm")
        return float(v.mean() ** (1.0 / p))
    curve = boundary.curve if isinstance(boundary, Domain) else boundary
    v = curve.vertices
    vals = np.abs(f(v)) ** p
    _finite_or_raise(vals, v, "hardy_norm")
    seg = curve.segment_lengths
    return float((0.5 * (vals + np.roll(vals, -1)) * seg).sum() ** (1.0 / p))


@dataclass(frozen=True)
class PolarQuadrature:
    """Nodes and weights (against ``dm``) on the disc with geometric radial refinement."""

    nodes: np.ndarray
    weights: np.ndarray


def radial_quadrature(alpha: float = 0.0, levels: int = 40, radial_points: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_0^1 g(r) (1-r)^alpha dr``.

    Annuli ``[1 - 2**-(k-1), 1 - 2**-k]`` use Gauss-Legendre; the last piece
    ``[1 - 2**-levels, 1]`` uses Gauss-Jacobi with the exact ``(1-r)^alpha``
    weight, so ``alpha`` near ``-1`` is resolved.
    """
    x, wq = np.polynomial.legendre.leggauss(radial_points)
    rs, ws = [], []
    for k in range(1, levels + 1):
        # work in t = 1 - r so deep annuli keep full relative precision
        hi, lo = 2.0 ** -(k - 1), 2.0**-k
        t = hi - 0.5 * (x + 1.0) * (hi - lo)
        rs.append(1.0 - t)
        ws.append(0.5 * (hi - lo) * wq * t**alpha)
    h = 2.0**-levels
    xj, wj = roots_jacobi(radial_points, 0.0, alpha)
    rs.append(1.0 - 0.5 * h * (xj + 1.0))
    ws.append(wj * (0.5 * h) ** (alpha + 1.0))
    return np.concatenate(rs), np.concatenate(ws)


def disc_quadrature(
    alpha: float = 0.0,
    levels: int = 40,
    radial_points: int = 8,
    angular: int = 256,
) -> PolarQuadrature:
    """Quadrature for ``int_D g(z) (1-|z|)^alpha dm``; weights carry the ``(1-|z|)^alpha`` factor."""
    r, wr = radial_quadrature(alpha, levels, radial_points)
    t = np.exp(1j * TWO_PI * np.arange(angular) / angular)
    nodes = (r[:, None] * t[None, :]).ravel()
    weights = np.repeat(wr * r * TWO_PI / angular, angular)
    return PolarQuadrature(nodes, weights)


def bergman_norm(
    f: TestFunction,
    params: EmbeddingParams,
    domain: Domain | None = None,
    grid: PolarQuadrature | None = None,
) -> float:
    """Weighted Bergman norm.

    Disc: ``((1/pi) int |f|^p (1-|z|)^alpha dm)^{1/p}``. Domain:
    ``(int_Omega |f|^p delta^alpha dm)^{1/p}`` computed on the disc by change
    of variables through the domain's source map (``|phi'|^2`` Jacobian,
    ``delta`` from the boundary polyline).
    """
    p, alpha = params.p, params.alpha
    if domain is None:
        q = grid or disc_quadrature(alpha)
        vals = np.abs(f(q.nodes)) ** p
        _finite_or_raise(vals, q.nodes, "bergman_norm")
        return float((vals @ q.weights / math.pi) ** (1.0 / p))
    if domain.source_map is None:
        raise ValueError("domain Bergman norms need a source map")
    q = grid or disc_quadrature(0.0, levels=14, angular=512)
    phi = domain.source_map
    w = phi(q.nodes)
    jac = np.abs(phi.deriv(q.nodes)) ** 2
    delta = np.atleast_1d(boundary_distance(domain, w))
    vals = np.abs(f(w)) ** p * delta**alpha * jac
    _finite_or_raise(vals, w, "bergman_norm")
    return float((vals @ q.weights) ** (1.0 / p))


@lru_cache(maxsize=4096)
def _bergman_kernel_norm(r_a: float, p: float, alpha: float) -> float:
    # the angular mean of |1 - conj(a) z|^{-2s} over |z| = r is 2F1(s, s; 1; |a|^2 r^2)
    s = 2.0 + alpha
    r, w = radial_quadrature(alpha, levels=60, radial_points=12)
    mean = hyp2f1(s, s, 1.0, (r_a * r) ** 2)
    return float(((1.0 - r_a**2) ** s * 2.0 * (mean * r) @ w) ** (1.0 / p))


def lq_mu_norm(f: TestFunction, q: float, mu: PlanarMeasure) -> float:
    """``(int |f|^q dmu)^{1/q}`` as a weighted atom sum."""
    if len(mu.points) == 0:
        return 0.0
    vals = np.abs(f(mu.points))
    bad = ~np.isfinite(vals) & (mu.weights > 0)
    if bad.any():
        raise NonFiniteValueError(f"lq_mu_norm: atom {complex(mu.points[np.argmax(bad)])} sits on a pole")
    return float((np.where(mu.weights > 0, vals, 0.0) ** q @ mu.weights) ** (1.0 / q))


def space_norm(f: TestFunction, space: Hardy | Bergman) -> float:
    if isinstance(space, Hardy):
        exact = f.exact_hardy_norm(space.p)
        return exact if exact is not None else hardy_norm(f, space.p, nodes=4096)
    params = EmbeddingParams(space.p, space.p, space.alpha)
    exact = f.exact_bergman_norm(params)
    return exact if exact is not None else bergman_norm(f, params)


def default_family(space: Hardy | Bergman, depth: int = 8, oversample: int = 2, max_degree: int = 32) -> list[TestFunction]:
    """Kernels at hyperbolic grid points up to ``depth`` plus monomials ``z^0 .. z^max_degree``."""
    pts = hyperbolic_grid(depth, oversample)
    if isinstance(space, Hardy):
        fam: list[TestFunction] = [HardyKernel(complex(a), space.p) for a in pts]
    else:
        fam = [BergmanKernel(complex(a), space.p, space.alpha) for a in pts]
    return fam + [Monomial(n) for n in range(max_degree + 1)]


@dataclass(frozen=True)
class FamilyRatios:
    functions: list
    ratios: np.ndarray

    @property
    def best(self) -> float:
        return float(self.ratios.max()) if len(self.ratios) else 0.0

    @property
    def argbest(self) -> TestFunction | None:
        return self.functions[int(np.argmax(self.ratios))] if len(self.ratios) else None


def embedding_ratios(mu: PlanarMeasure, space: Hardy | Bergman, q: float, family: Sequence[TestFunction] | None = None) -> FamilyRatios:
    if family is None:
        family = default_family(space)
    if not family:
        raise ValueError("test-function family must be non-empty")
    ratios = np.zeros(len(family))
    for k, f in enumerate(family):
        nrm = space_norm(f, space)
        if nrm == 0:
            continue
        ratios[k] = lq_mu_norm(f, q, mu) / nrm
    return FamilyRatios(list(family), ratios)


def embedding_constant(mu: PlanarMeasure, space: Hardy | Bergman, q: float, family: Sequence[TestFunction] | None = None) -> float:
    """``max_f ||f||_{L^q(mu)} / ||f||_X`` over the family: a lower bound for the embedding norm."""
    return embedding_ratios(mu, space, q, family).best


def duren_cone_sum(mu: PlanarMeasure, vertex_angle: float, q: float, levels: int) -> float:
    """``sum_k mu(B_k) / (1 - |z_k|)^{2-q}`` with ``z_k = (1 - 2**-k) e^{i xi}``, ``B_k = B(z_k, 2**-k / 2)``."""
    if not q > 1:
        raise ValueError("the cone sum needs q > 1")
    total = 0.0
    xi = np.exp(1j * vertex_angle)
    for k in range(levels + 1):
        h = 2.0**-k
        m = measure_of_ball(mu, (1.0 - h) * xi, 0.5 * h)
        total += m / h ** (2.0 - q)
    return total


# --- exterior points ------------------------------------------------------------


class ExteriorPointError(RuntimeError):
    """No exterior point at comparable distance: the domain pinches at this scale."""


@dataclass(frozen=True)
class ExteriorPoint:
    point: complex
    distance: float
    #: distance / R
    distance_ratio: float
    #: min and max of |w - w*| / dist(w*) over sampled w in B(xi0, R) cap Omega
    spread: tuple


def outward_normal(domain: Domain, index: int) -> complex:
    v = domain.curve.vertices
    n = len(v)
    tangent = v[(index + 1) % n] - v[(index - 1) % n]
    return -1j * tangent / abs(tangent)


def exterior_point(
    domain: Domain, xi0_index: int, R: float, fan_degrees: float = 80.0, n_dirs: int = 161, n_steps: int = 64
) -> ExteriorPoint:
    """Search the outward ray at a boundary vertex and a fan around it.

    Maximizes ``min(dist(w*, boundary), R) / R`` subject to ``|w* - xi0| <= 2R``
    and ``w*`` outside the domain, preferring points nearest ``xi0``; fails
    when the best distance is below ``R / 16``.
    """
    if R > domain.curve.diameter:
        raise ValueError("R must not exceed diam(Omega)")
    xi0 = domain.curve.vertices[xi0_index]
    nrm = outward_normal(domain, xi0_index)
    ang = np.deg2rad(np.linspace(-fan_degrees, fan_degrees, n_dirs))
    rho = 2.0 * R * np.arange(1, n_steps + 1) / n_steps
    cand = (xi0 + rho[None, :] * (nrm * np.exp(1j * ang))[:, None]).ravel()
    cand = cand[~domain.contains(cand)]
    if len(cand) == 0:
        raise ExteriorPointError("no exterior candidate near the boundary point")
    d = np.atleast_1d(boundary_distance(domain, cand))
    # distance beyond R buys nothing; among equally good points take the nearest to xi0
    score = np.minimum(d, R) / R
    best = np.flatnonzero(score >= score.max() * (1 - 1e-12))
    k = int(best[np.argmin(np.abs(cand[best] - xi0))])
    if d[k] < R / 16.0:
        raise ExteriorPointError(f"best exterior distance {d[k]:.3g} < R/16 at this scale")
    w_star = complex(cand[k])
    # sample B(xi0, R) cap Omega to report the achieved comparability
    g = np.linspace(-R, R, 41)
    pts = (xi0 + g[None, :] + 1j * g[:, None]).ravel()
    pts = pts[(np.abs(pts - xi0) <= R) & domain.contains(pts)]
    spread = (math.nan, math.nan)
    if len(pts):
        r = np.abs(pts - w_star) / d[k]
        spread = (float(r.min()), float(r.max()))
    return ExteriorPoint(w_star, float(d[k]), float(d[k] / R), spread)


def annulus_pole_sum(domain: Domain, pole: complex, shells: int = 30) -> float:
    """``sum_k length(Gamma cap A_k) / (2^k delta)^2`` over dyadic annuli around the pole.

    ``delta = dist(pole, Gamma)``; bounds ``int_Gamma |w - pole|^{-2} ds`` from
    above up to a factor 4 (``A_1`` is the first annulus ``B_1 minus B_0``).
    """
    from .planar_domain import segment_disc_lengths

    v = domain.curve.vertices
    delta = float(boundary_distance(domain, pole))
    total, prev = 0.0, 0.0
    for k in range(1, shells + 1):
        inside = float(segment_disc_lengths(v, pole, (2.0**k) * delta).sum())
        total += (inside - prev) / ((2.0 ** (k - 1)) * delta) ** 2
        prev = inside
        if inside >= domain.curve.length * (1 - 1e-12):
            break
    return total
