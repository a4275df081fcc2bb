"""Polygonal boundary curves and the geometric constants of a planar domain.

A :class:`Domain` is the interior of a closed, simple, positively oriented
polyline, usually sampled from a catalog map. Point-in-domain and
point-to-polyline distance go through shapely (GEOS); arclength clipping,
chord-arc ratios and the Whitney quadtree are done here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .conformal_maps import ConformalMap
from .disc_geometry import TWO_PI

DEFAULT_BOUNDARY_SAMPLES = 4096
MAX_WHITNEY_DEPTH = 14


class DisconnectedCoverError(RuntimeError):
    """The Whitney adjacency graph does not connect the requested points."""


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Closed polyline; ``vertices[0]`` is not repeated at the end."""

    vertices: np.ndarray
    check_simple: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if len(v) >= 2 and v[0] == v[-1]:
            v = v[:-1]
        if len(v) < 16:
            raise ValueError(f"boundary curve needs at least 16 vertices, got {len(v)}")
        if _signed_area(v) < 0:
            v = v[::-1].copy()
        object.__setattr__(self, "vertices", v)
        if self.check_simple and not self.ring.is_simple:
            raise ValueError("boundary polyline self-intersects")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def segment_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.abs(np.roll(v, -1) - v)

    @property
    def cumulative_arclength(self) -> np.ndarray:
        """Arclength from vertex 0 to each vertex, plus the total as the last entry."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def diameter(self) -> float:
        v = self.vertices
        hull = shapely.convex_hull(shapely.multipoints(np.column_stack([v.real, v.imag])))
        h = np.asarray(shapely.get_coordinates(hull))
        hz = h[:, 0] + 1j * h[:, 1]
        return float(np.abs(hz[:, None] - hz[None, :]).max())

    @property
    def ring(self) -> shapely.LinearRing:
        return shapely.LinearRing(np.column_stack([self.vertices.real, self.vertices.imag]))

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            for p in self.vertices:
                w.writerow([repr(float(p.real)), repr(float(p.imag))])

    @classmethod
    def from_csv(cls, path) -> "BoundaryCurve":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"x", "y"}:
            raise ValueError(f"{path}: expected header 'x,y'")
        return cls(np.array([float(r["x"]) + 1j * float(r["y"]) for r in rows]))


def _signed_area(v: np.ndarray) -> float:
    w = np.roll(v, -1)
    return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))


@dataclass(frozen=True, eq=False)
class Domain:
    curve: BoundaryCurve
    source_map: ConformalMap | None = None
    #: Hausdorff-type bound on |polyline - true curve|; 0 when unknown.
    sagitta: float = 0.0

    @classmethod
    def from_map(cls, map: ConformalMap, n: int = DEFAULT_BOUNDARY_SAMPLES) -> "Domain":
        t = np.arange(n) / n
        v = map(np.exp(1j * TWO_PI * t))
        curve = BoundaryCurve(v, check_simple=n <= 1 << 14)
        return cls(curve, map, _sagitta_bound(map, n))

    @classmethod
    def unit_disc(cls, n: int = 256) -> "Domain":
        from .conformal_maps import identity

        return cls.from_map(identity(), n)

    @property
    def polygon(self) -> shapely.Polygon:
        return shapely.Polygon(self.curve.ring)

    def contains(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        return shapely.contains_xy(self.polygon, w.real, w.imag)

    def boundary_distance(self, w):
        return boundary_distance(self, w)


def _sagitta_bound(map: ConformalMap, n: int) -> float:
    """Max distance from the sampled curve to its chords, probed at 3 interior points per segment."""
    t = np.arange(n) / n
    a = map(np.exp(1j * TWO_PI * t))
    b = np.roll(a, -1)
    worst = 0.0
    for s in (0.25, 0.5, 0.75):
        p = map(np.exp(1j * TWO_PI * (t + s / n)))
        d = b - a
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.clip(np.real((p - a) * np.conj(d)) / np.abs(d) ** 2, 0.0, 1.0)
        u = np.where(np.isfinite(u), u, 0.0)
        worst = max(worst, float(np.max(np.abs(p - (a + u * d)))))
    return worst


def boundary_distance(domain: Domain, w):
    """Distance from ``w`` to the boundary polyline (unsigned, works outside too)."""
    w = np.asarray(w, dtype=complex)
    pts = shapely.points(w.real, w.imag)
    d = shapely.distance(domain.curve.ring, pts)
    return float(d) if np.ndim(d) == 0 else np.asarray(d, dtype=float)


def segment_disc_lengths(vertices: np.ndarray, center: complex, radius: float) -> np.ndarray:
    """Length of each closed-polyline segment lying inside the disc ``B(center, radius)``."""
    a = vertices - center
    d = np.roll(vertices, -1) - vertices
    A = np.abs(d) ** 2
    B = 2.0 * np.real(a * np.conj(d))
    C = np.abs(a) ** 2 - radius * radius
    disc = B * B - 4.0 * A * C
    ok = (disc > 0) & (A > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.clip((-B - sq) / (2 * A), 0.0, 1.0)
        t1 = np.clip((-B + sq) / (2 * A), 0.0, 1.0)
    return np.where(ok, (t1 - t0) * np.sqrt(A), 0.0)


def ahlfors_constant(curve: BoundaryCurve, centers, radii) -> float:
    """``max length(Gamma cap B(z0, R)) / R`` over all (center, radius) pairs."""
    best = 0.0
    radii = np.asarray(radii, dtype=float)
    for c in np.atleast_1d(np.asarray(centers, dtype=complex)):
        for R in radii:
            best = max(best, float(segment_disc_lengths(curve.vertices, c, R).sum()) / R)
    return best


def dyadic_radii(curve: BoundaryCurve, levels: int = 10, start: int = 0) -> np.ndarray:
    """``diam * 2**-k`` for ``k = start .. start + levels - 1``."""
    return curve.diameter * 2.0 ** -np.arange(start, start + levels, dtype=float)


def chordarc_constant(
    curve: BoundaryCurve, sample_pairs: int | None = None, seed: int = 0
) -> float:
    """``max min(l_forward, l_backward) / |z1 - z2|`` over vertex pairs.

    ``sample_pairs=None`` scans every pair (chunked); an integer draws that
    many random pairs from ``seed``. Coincident pairs are skipped.
    """
    v = curve.vertices
    s = curve.cumulative_arclength
    total, s = s[-1], s[:-1]
    n = len(v)
    if sample_pairs is not None:
        if sample_pairs < 1:
            raise ValueError("sample_pairs must be >= 1")
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, sample_pairs)
        j = rng.integers(0, n, sample_pairs)
        return _chordarc_ratio(v[i], v[j], s[i], s[j], total)
    best = 0.0
    chunk = max(1, 4_000_000 // n)
    for lo in range(0, n, chunk):
        i = np.arange(lo, min(n, lo + chunk))
        best = max(best, _chordarc_ratio(v[i][:, None], v[None, :], s[i][:, None], s[None, :], total))
    return best


def _chordarc_ratio(z1, z2, s1, s2, total) -> float:
    fwd = np.abs(s2 - s1)
    arc = np.minimum(fwd, total - fwd)
    chord = np.abs(z2 - z1)
    good = chord > 0
    if not np.any(good):
        return 0.0
    return float(np.max(np.where(good, arc / np.where(good, chord, 1.0), 0.0)))


# --- Whitney cover and quasi-hyperbolic distance ---------------------------


@dataclass(frozen=True, eq=False)
class WhitneySquareCover:
    centers: np.ndarray
    sides: np.ndarray
    #: distance from each kept center to the boundary
    deltas: np.ndarray
    counts_per_level: dict
    dropped_cells: int
    dropped_area: float
    domain: Domain = field(repr=False)

    @property
    def diameters(self) -> np.ndarray:
        return math.sqrt(2.0) * self.sides

    @property
    def area(self) -> float:
        return float(np.sum(self.sides**2))

    def locate(self, w) -> np.ndarray:
        """Index of the square containing each ``w`` (-1 if none)."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        tree = cKDTree(np.column_stack([self.centers.real, self.centers.imag]))
        reach = float(self.sides.max()) / math.sqrt(2.0) * 1.0000001
        out = np.full(len(w), -1)
        for k, nb in enumerate(tree.query_ball_point(np.column_stack([w.real, w.imag]), reach)):
            for j in nb:
                h = 0.5 * self.sides[j]
                d = w[k] - self.centers[j]
                if abs(d.real) <= h and abs(d.imag) <= h:
                    out[k] = j
                    break
        return out


def whitney_cover(domain: Domain, max_depth: int = 8) -> WhitneySquareCover:
    """Top-down quadtree Whitney cover.

    A cell is kept when ``diam <= delta(center) / 2``; this forces
    ``diam > delta(center) * 2/9`` for every kept cell. Cells whose
    circumscribed disc misses the domain are discarded; cells still
    undecided at ``max_depth`` are dropped and counted.
    """
    if max_depth > MAX_WHITNEY_DEPTH:
        raise ValueError(f"max_depth must be <= {MAX_WHITNEY_DEPTH}")
    v = domain.curve.vertices
    lo = complex(v.real.min(), v.imag.min())
    side = max(v.real.max() - v.real.min(), v.imag.max() - v.imag.min()) * 1.0001
    centers = np.array([lo + 0.5 * side * (1 + 1j)])
    keep_c, keep_s, keep_d, counts = [], [], [], {}
    dropped, dropped_area = 0, 0.0
    for level in range(max_depth + 1):
        if len(centers) == 0:
            break
        diam = math.sqrt(2.0) * side
        delta = boundary_distance(domain, centers)
        delta = np.atleast_1d(delta)
        inside = domain.contains(centers)
        kept = inside & (diam <= 0.5 * delta)
        outside = ~inside & (delta >= 0.5 * diam)
        counts[level] = int(kept.sum())
        keep_c.append(centers[kept])
        keep_s.append(np.full(int(kept.sum()), side))
        keep_d.append(delta[kept])
        rest = centers[~kept & ~outside]
        if level == max_depth:
            dropped = len(rest)
            dropped_area = dropped * side * side
            break
        q = 0.25 * side
        offs = np.array([-q - 1j * q, q - 1j * q, -q + 1j * q, q + 1j * q])
        centers = (rest[:, None] + offs[None, :]).ravel()
        side *= 0.5
    return WhitneySquareCover(
        np.concatenate(keep_c) if keep_c else np.zeros(0, complex),
        np.concatenate(keep_s) if keep_s else np.zeros(0),
        np.concatenate(keep_d) if keep_d else np.zeros(0),
        counts,
        dropped,
        dropped_area,
        domain,
    )


def _adjacency(cover: WhitneySquareCover):
    c, s = cover.centers, cover.sides
    tree = cKDTree(np.column_stack([c.real, c.imag]))
    smax = float(s.max())
    pairs = tree.query_pairs(smax * math.sqrt(2.0) * 1.0001, output_type="ndarray")
    i, j = pairs[:, 0], pairs[:, 1]
    reach = 0.5 * (s[i] + s[j]) * (1 + 1e-9)
    d = c[j] - c[i]
    touch = (np.abs(d.real) <= reach) & (np.abs(d.imag) <= reach)
    return i[touch], j[touch]


def quasihyperbolic_distance(
    domain: Domain, w1: complex, w2: complex, cover: WhitneySquareCover
) -> float:
    """Shortest path through touching Whitney squares.

    Edge weight is the Euclidean step divided by the boundary distance at
    its midpoint; the end points connect to the centers of their squares.
    """
    if w1 == w2:
        return 0.0
    k1, k2 = cover.locate([w1, w2])
    if k1 < 0 or k2 < 0:
        raise DisconnectedCoverError("end point not covered by the Whitney cover")
    if k1 == k2:
        mid = 0.5 * (w1 + w2)
        return abs(w2 - w1) / boundary_distance(domain, mid)
    i, j = _adjacency(cover)
    c = cover.centers
    wgt = np.abs(c[j] - c[i]) / np.atleast_1d(boundary_distance(domain, 0.5 * (c[i] + c[j])))
    n = len(c)
    g = coo_matrix((np.concatenate([wgt, wgt]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)).tocsr()
    dist = dijkstra(g, indices=k1)[k2]
    if not np.isfinite(dist):
        raise DisconnectedCoverError("Whitney adjacency graph is disconnected; refine the cover")
    end1 = abs(c[k1] - w1) / boundary_distance(domain, 0.5 * (c[k1] + w1))
    end2 = abs(c[k2] - w2) / boundary_distance(domain, 0.5 * (c[k2] + w2))
    return float(dist + end1 + end2)


def square_curve(n_per_side: int = 64, side: float = 2.0) -> BoundaryCurve:
    """Axis-aligned square centered at 0, sampled uniformly along each side."""
    h = side / 2
    u = np.arange(n_per_side) / n_per_side
    corners = [-h - 1j * h, h - 1j * h, h + 1j * h, -h + 1j * h]
    pts = [corners[k] + (corners[(k + 1) % 4] - corners[k]) * u for k in range(4)]
    return BoundaryCurve(np.concatenate(pts))


def load_curve(path: str | Path) -> BoundaryCurve:
    return BoundaryCurve.from_csv(path)
