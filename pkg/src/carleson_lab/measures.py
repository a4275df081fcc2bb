"""Positive measures on the disc or on a domain, region queries and pullbacks.

Every measure reduces to weighted atoms (grid cells become atoms at their
centers, boundary densities become atoms at segment midpoints), and all
region queries act on that atom list. Boxes are half-open, balls closed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .conformal_maps import ConformalMap
from .disc_geometry import TWO_PI, CarlesonBox
from .planar_domain import BoundaryCurve

DEFAULT_INVERSION_TOL = 1e-10
#: pulled-back atoms beyond this radius are flagged as boundary-hugging
BOUNDARY_FLAG_RADIUS = 1.0 - 1e-6


@dataclass(frozen=True)
class EmbeddingParams:
    """Exponents ``0 < p <= q`` and weight ``alpha > -1``."""

    p: float
    q: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        if not self.q >= self.p:
            raise ValueError("q must be >= p")
        if not self.alpha > -1:
            raise ValueError("alpha must be > -1")

    @property
    def hardy_exponent(self) -> float:
        return self.q / self.p

    @property
    def bergman_exponent(self) -> float:
        return (2.0 + self.alpha) * self.q / self.p


class PlanarMeasure:
    """Base class: subclasses provide ``_atoms() -> (points, weights)``."""

    @cached_property
    def _atom_cache(self):
        pts, w = self._atoms()
        pts = np.asarray(pts, dtype=complex).ravel()
        w = np.asarray(w, dtype=float).ravel()
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("measure weights must be finite and non-negative")
        return pts, w

    @property
    def points(self) -> np.ndarray:
        return self._atom_cache[0]

    @property
    def weights(self) -> np.ndarray:
        return self._atom_cache[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def as_atomic(self) -> "AtomicMeasure":
        return AtomicMeasure(self.points, self.weights)

    def scaled(self, lam: float) -> "AtomicMeasure":
        return AtomicMeasure(self.points, lam * self.weights)

    def rotated(self, angle: float) -> "AtomicMeasure":
        return AtomicMeasure(self.points * np.exp(1j * angle), self.weights)

    @cached_property
    def _tree(self):
        p = self.points
        return cKDTree(np.column_stack([p.real, p.imag]))


@dataclass(eq=False)
class AtomicMeasure(PlanarMeasure):
    points_: np.ndarray
    weights_: np.ndarray
    report: "PullbackReport | None" = None

    def __post_init__(self):
        self.points_ = np.atleast_1d(np.asarray(self.points_, dtype=complex)).ravel()
        self.weights_ = np.atleast_1d(np.asarray(self.weights_, dtype=float)).ravel()
        if self.points_.shape != self.weights_.shape:
            raise ValueError("points and weights must have the same length")

    def _atoms(self):
        return self.points_, self.weights_

    @classmethod
    def empty(cls) -> "AtomicMeasure":
        return cls(np.zeros(0, complex), np.zeros(0))

    @classmethod
    def dirac(cls, z: complex, mass: float = 1.0) -> "AtomicMeasure":
        return cls([z], [mass])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "weight"])
            for p, m in zip(self.points_, self.weights_):
                w.writerow([repr(float(p.real)), repr(float(p.imag)), repr(float(m))])

    @classmethod
    def from_csv(cls, path) -> "AtomicMeasure":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if rows and set(rows[0]) != {"x", "y", "weight"}:
            raise ValueError(f"{path}: expected header 'x,y,weight'")
        pts = [float(r["x"]) + 1j * float(r["y"]) for r in rows]
        return cls(np.array(pts, dtype=complex), np.array([float(r["weight"]) for r in rows]))


@dataclass(eq=False)
class GridDensity(PlanarMeasure):
    """Density against area on a rectangular grid; ``values[iy, ix]`` per cell."""

    origin: complex
    dx: float
    dy: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("grid values must be a 2-d array (ny, nx)")

    @property
    def centers(self) -> np.ndarray:
        ny, nx = self.values.shape
        x = self.origin.real + (np.arange(nx) + 0.5) * self.dx
        y = self.origin.imag + (np.arange(ny) + 0.5) * self.dy
        return x[None, :] + 1j * y[:, None]

    def _atoms(self):
        m = self.values * self.dx * self.dy
        keep = m > 0
        return self.centers[keep], m[keep]

    @classmethod
    def on_disc(cls, n: int, density=None) -> "GridDensity":
        """``n x n`` grid over ``[-1, 1]^2``, zero outside the disc."""
        h = 2.0 / n
        g = cls(complex(-1, -1), h, h, np.zeros((n, n)))
        c = g.centers
        inside = np.abs(c) < 1.0
        vals = np.where(inside, 1.0 if density is None else density(np.where(inside, c, 0)), 0.0)
        g.values = np.asarray(vals, dtype=float)
        return g

    def to_csv(self, path) -> None:
        ny, nx = self.values.shape
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["origin_x", "origin_y", "dx", "dy", "nx", "ny"])
            w.writerow([repr(float(self.origin.real)), repr(float(self.origin.imag)), repr(float(self.dx)), repr(float(self.dy)), nx, ny])
            for row in self.values:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "GridDensity":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["origin_x", "origin_y", "dx", "dy", "nx", "ny"]:
            raise ValueError(f"{path}: expected grid header origin_x,origin_y,dx,dy,nx,ny")
        ox, oy, dx, dy = map(float, rows[1][:4])
        nx, ny = int(rows[1][4]), int(rows[1][5])
        vals = np.array([[float(v) for v in r] for r in rows[2:]], dtype=float)
        if vals.shape != (ny, nx):
            raise ValueError(f"{path}: grid body has shape {vals.shape}, header says {(ny, nx)}")
        return cls(complex(ox, oy), dx, dy, vals)


@dataclass(eq=False)
class PolarGridDensity(PlanarMeasure):
    """Cells ``[r_i, r_{i+1}) x [j/n, (j+1)/n)`` turns with exact masses ``cell_mass[i, j]``.

    Radial edges include every ``1 - 2**-k`` up to ``levels`` so dyadic
    Carleson boxes are unions of whole cells.
    """

    radial_edges: np.ndarray
    n_angular: int
    cell_mass: np.ndarray

    def _atoms(self):
        r = 0.5 * (self.radial_edges[:-1] + self.radial_edges[1:])
        t = (np.arange(self.n_angular) + 0.5) / self.n_angular
        pts = r[:, None] * np.exp(1j * TWO_PI * t)[None, :]
        keep = self.cell_mass > 0
        return pts[keep], self.cell_mass[keep]

    @classmethod
    def radial(
        cls,
        density=None,
        levels: int = 20,
        sub: int = 2,
        n_angular: int = 4096,
        quad_points: int = 8,
    ) -> "PolarGridDensity":
        """Rotation-invariant density ``density(r)`` (default 1, i.e. area measure).

        Each ring mass is ``2 pi int rho(r) r dr / n_angular`` by Gauss-Legendre;
        the innermost ring is ``[0, 1/2)`` and the outermost ``[1 - 2**-levels, 1)``.
        """
        edges = [0.0]
        for k in range(1, levels + 1):
            a, b = 1.0 - 2.0 ** -(k - 1), 1.0 - 2.0**-k
            if k == 1:
                edges.extend(np.linspace(a, b, 2 * sub + 1)[1:])
            else:
                edges.extend(np.linspace(a, b, sub + 1)[1:])
        edges.append(1.0)
        edges = np.asarray(edges)
        x, wq = np.polynomial.legendre.leggauss(quad_points)
        a, b = edges[:-1, None], edges[1:, None]
        r = a + 0.5 * (x[None, :] + 1.0) * (b - a)
        f = np.ones_like(r) if density is None else density(r)
        ring = (0.5 * (b - a)[:, 0]) * ((f * r) @ wq) * TWO_PI
        mass = np.repeat((ring / n_angular)[:, None], n_angular, axis=1)
        return cls(edges, n_angular, mass)


@dataclass(eq=False)
class BoundaryArcDensity(PlanarMeasure):
    """Density against arclength on a boundary polyline, one value per segment.

    Atoms sit at segment midpoints, optionally pushed by ``inward_offset``
    along the inward normal (so the measure lives inside the domain).
    """

    curve: BoundaryCurve
    density: np.ndarray
    inward_offset: float = 0.0

    def _atoms(self):
        v = self.curve.vertices
        d = np.roll(v, -1) - v
        mid = v + 0.5 * d
        # positively oriented: interior lies to the left, inward normal = i * tangent
        normal = 1j * d / np.abs(d)
        dens = np.broadcast_to(np.asarray(self.density, dtype=float), v.shape)
        return mid + self.inward_offset * normal, dens * np.abs(d)


# --- region queries ---------------------------------------------------------


def measure_of_box(mu: PlanarMeasure, box: CarlesonBox) -> float:
    if len(mu.points) == 0:
        return 0.0
    return float(mu.weights[box.contains(mu.points)].sum())


def measure_of_ball(mu: PlanarMeasure, center: complex, radius: float) -> float:
    """Mass of the closed ball ``|z - center| <= radius``."""
    if len(mu.points) == 0:
        return 0.0
    return float(mu.weights[np.abs(mu.points - center) <= radius].sum())


def measure_of_balls(mu: PlanarMeasure, centers, radii) -> np.ndarray:
    """Vectorized closed-ball masses via a KD-tree prefilter."""
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape)
    out = np.zeros(len(centers))
    if len(mu.points) == 0 or len(centers) == 0:
        return out
    pts, w = mu.points, mu.weights
    hits = mu._tree.query_ball_point(
        np.column_stack([centers.real, centers.imag]), radii * (1 + 1e-9) + 1e-300
    )
    for k, idx in enumerate(hits):
        if idx:
            idx = np.asarray(idx)
            sel = np.abs(pts[idx] - centers[k]) <= radii[k]
            out[k] = w[idx[sel]].sum()
    return out


# --- pullbacks ----------------------------------------------------------------


@dataclass
class PullbackReport:
    rejected_points: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    rejected_mass: float = 0.0
    #: number of accepted atoms landing beyond BOUNDARY_FLAG_RADIUS
    boundary_flagged: int = 0


def pullback(
    map: ConformalMap, mu: PlanarMeasure, inversion_tol: float = DEFAULT_INVERSION_TOL
) -> AtomicMeasure:
    """``phi^*(mu)``: each atom ``(w, m)`` moves to ``(phi^{-1}(w), m)``."""
    pts, w = mu.points, mu.weights
    if map.tag == "identity":
        return AtomicMeasure(pts.copy(), w.copy(), PullbackReport())
    if len(pts) == 0:
        return AtomicMeasure.empty()
    z, ok = map.inverse(pts, tol=inversion_tol)
    rep = PullbackReport(
        rejected_points=pts[~ok],
        rejected_mass=float(w[~ok].sum()),
        boundary_flagged=int(np.sum(np.abs(z[ok]) > BOUNDARY_FLAG_RADIUS)),
    )
    return AtomicMeasure(z[ok], w[ok], rep)


def weighted_pullback(
    map: ConformalMap,
    mu: PlanarMeasure,
    exponent: float,
    inversion_tol: float = DEFAULT_INVERSION_TOL,
) -> AtomicMeasure:
    """``|phi'|^{-exponent} phi^*(mu)``; exponent ``q/p`` (Hardy) or ``(2+alpha)q/p`` (Bergman)."""
    pb = pullback(map, mu, inversion_tol)
    if exponent == 0 or map.tag == "identity" or len(pb.points) == 0:
        return pb
    factor = np.abs(map.deriv(pb.points)) ** (-exponent)
    return AtomicMeasure(pb.points, pb.weights * factor, pb.report)


def disc_area_measure(levels: int = 20, n_angular: int = 4096, sub: int = 2) -> PolarGridDensity:
    """Lebesgue area on the disc, total mass ``pi``."""
    return PolarGridDensity.radial(None, levels=levels, sub=sub, n_angular=n_angular)


def radial_power_measure(
    exponent: float, levels: int = 20, n_angular: int = 1024, sub: int = 2
) -> PolarGridDensity:
    """``(1 - |z|)**exponent dm`` on the disc."""
    return PolarGridDensity.radial(
        lambda r: (1.0 - r) ** exponent, levels=levels, sub=sub, n_angular=n_angular
    )


def annular_sector_area(length: float, inner: float, outer: float = 1.0) -> float:
    """Area of ``{inner <= r < outer}`` over an arc of ``length`` radians."""
    return 0.5 * length * (outer * outer - inner * inner)


def box_area_closed_form(length: float) -> float:
    """``|S(I)| = |I| h (1 - h/2)`` with ``h = |I| / 2 pi``; equals ``|I|^2/2pi (1 - |I|/4pi)``."""
    h = length / TWO_PI
    return length * h * (1.0 - 0.5 * h) if h < 1 else math.pi
