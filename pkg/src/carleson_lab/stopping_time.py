"""Generational stopping-time decomposition of a Carleson box.

Boxes are subdivided dyadically relative to the root arc. A box is stopped
when ``log|phi'|`` sampled on its top leaves the band ``log M`` around the
reference value of the region it currently belongs to; a stopped box opens
a new region whose reference point is the center of its own top.

Every point of ``S(I)`` lies in exactly one top of a dyadic sub-box (or
below ``max_depth``), so a region is stored as the set of tops it owns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conformal_maps import ConformalMap, bmo_norm_estimate
from .disc_geometry import TWO_PI, CarlesonBox, CircleArc, _sector_area, carleson_box, to_turns
from .measures import EmbeddingParams, PlanarMeasure, pullback

MAX_STOPPING_DEPTH = 16
_CHUNK = 4096


@dataclass(frozen=True)
class StoppingConfig:
    M: float
    max_depth: int = 12
    #: angular samples per top; the radial count is half of it
    top_samples: int = 8

    def __post_init__(self):
        if not self.M > 1:
            raise ValueError("M must exceed 1")
        if not 0 <= self.max_depth <= MAX_STOPPING_DEPTH:
            raise ValueError(f"max_depth must lie in [0, {MAX_STOPPING_DEPTH}]")
        if self.top_samples < 2:
            raise ValueError("top_samples must be at least 2")

    @property
    def log_M(self) -> float:
        return math.log(self.M)


def default_M(map: ConformalMap, depth: int = 10) -> float:
    """``exp(1 + ||log phi'||_*)`` with the dyadic BMO estimate."""
    return math.exp(1.0 + bmo_norm_estimate(map, depth=depth))


def default_root() -> CarlesonBox:
    """Box over the arc of length ``pi/2`` centered at angle ``pi``."""
    return carleson_box(CircleArc.from_radians(math.pi, math.pi / 2))


@dataclass
class GenerationTree:
    root: CarlesonBox
    config: StoppingConfig
    #: per dyadic level (relative to the root) the region owning each top
    top_region: list[np.ndarray]
    #: region reference points and values; region 0 belongs to the root
    ref_points: np.ndarray
    ref_values: np.ndarray
    #: (level, index) of the box that opened each region; (0, 0) for the root
    region_box: np.ndarray
    region_generation: np.ndarray
    #: coarse sampled deviation of each stopped box's top at its stopping moment
    stop_values: np.ndarray
    parent_region: np.ndarray = field(default=None)

    @property
    def n_regions(self) -> int:
        return len(self.ref_values)

    @property
    def depth(self) -> int:
        return self.config.max_depth

    def arc(self, level: int, index: int) -> CircleArc:
        L = self.root.arc.length_turn / (1 << level)
        return CircleArc(self.root.arc.start_turn + index * L, L)

    def box(self, level: int, index: int) -> CarlesonBox:
        return carleson_box(self.arc(level, index))

    @property
    def generations(self) -> list[list[CarlesonBox]]:
        """``G_1, G_2, ...`` as lists of boxes."""
        n = int(self.region_generation.max()) if self.n_regions else 0
        out = []
        for g in range(1, n + 1):
            ids = np.flatnonzero(self.region_generation == g)
            out.append([self.box(*self.region_box[i]) for i in ids])
        return out

    def top_area(self, level: int) -> float:
        L = self.root.arc.length_turn / (1 << level)
        return _sector_area(L, max(0.0, 1.0 - L), max(0.0, 1.0 - 0.5 * L))

    def region_areas(self) -> np.ndarray:
        areas = np.zeros(self.n_regions)
        for k, reg in enumerate(self.top_region):
            areas += np.bincount(reg, minlength=self.n_regions) * self.top_area(k)
        return areas

    @property
    def unresolved_area(self) -> float:
        L = self.root.arc.length_turn / (1 << (self.depth + 1))
        return _sector_area(self.root.arc.length_turn, max(0.0, 1.0 - L), 1.0)

    def partition_defect(self) -> float:
        """Relative gap between region + unresolved area and the root box area."""
        total = self.region_areas().sum() + self.unresolved_area
        return abs(total - self.root.area) / self.root.area

    def locate(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Region id of each point of the root box, and a below-``max_depth`` flag.

        Points below ``max_depth`` are assigned to the region of their
        deepest resolved top; points outside the root get ``-1``.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        L = self.root.arc.length_turn
        region = np.full(len(z), -1, dtype=int)
        inside = self.root.contains(z)
        gap = 1.0 - np.abs(z[inside])
        with np.errstate(divide="ignore"):
            level = np.floor(np.log2(L / gap)).astype(int)
        level = np.maximum(level, 0)
        deep = level > self.depth
        level = np.minimum(level, self.depth)
        frac = ((to_turns(z[inside]) - self.root.arc.start_turn) % 1.0) / L
        idx = np.minimum(np.floor(frac * (1 << level)).astype(int), (1 << level) - 1)
        reg = np.empty(len(idx), dtype=int)
        for k in np.unique(level):
            s = level == k
            reg[s] = self.top_region[k][idx[s]]
        region[inside] = reg
        flag = np.zeros(len(z), dtype=bool)
        flag[inside] = deep
        return region, flag

    def report_lines(self) -> list[str]:
        """One line per box that opened a region: generation, arc endpoints (radians), reference value."""
        lines = ["generation,start,end,log_abs_deriv_ref"]
        for i in range(self.n_regions):
            arc = self.arc(*self.region_box[i])
            a = float(TWO_PI * arc.start_turn)
            lines.append(f"{int(self.region_generation[i])},{a!r},{a + float(arc.length)!r},{float(self.ref_values[i])!r}")
        return lines


def _top_samples(tree_root: CircleArc, level: int, index: np.ndarray, n_ang: int, n_rad: int) -> np.ndarray:
    """Samples on the boundary of the closed tops ``(level, index)``, one row per top.

    ``|log|phi'| - c|`` is the modulus of a harmonic function, so its max over
    a closed top is attained on the boundary: the two arcs get ``n_ang``
    points each, the two radial sides ``n_rad`` points each.
    """
    L = tree_root.length_turn / (1 << level)
    r_in, r_out = max(0.0, 1.0 - L), max(0.0, 1.0 - 0.5 * L)
    start = tree_root.start_turn + np.asarray(index, dtype=float) * L
    u = np.linspace(0.0, 1.0, n_ang)
    arcs = np.exp(1j * TWO_PI * (start[:, None] + L * u[None, :]))
    rho = np.linspace(r_in, r_out, n_rad)
    ends = np.exp(1j * TWO_PI * np.stack([start, start + L], axis=1))
    sides = (ends[:, :, None] * rho[None, None, :]).reshape(len(start), -1)
    return np.concatenate([r_in * arcs, r_out * arcs, sides], axis=1)


def _max_deviation(map: ConformalMap, root: CircleArc, level: int, index: np.ndarray, ref: np.ndarray, n_ang: int, n_rad: int) -> np.ndarray:
    out = np.empty(len(index))
    for s in range(0, len(index), _CHUNK):
        z = _top_samples(root, level, index[s : s + _CHUNK], n_ang, n_rad)
        out[s : s + _CHUNK] = np.abs(map.log_abs_deriv(z) - ref[s : s + _CHUNK, None]).max(axis=1)
    return out


def build_generations(map: ConformalMap, root: CarlesonBox, config: StoppingConfig) -> GenerationTree:
    """Top-down stopping with a sampled sup over each top."""
    arc = root.arc
    n_ang = config.top_samples
    n_rad = max(2, n_ang // 2)
    log_M = config.log_M

    ref_points = [carleson_box(arc).top.center]
    ref_values = [float(map.log_abs_deriv(ref_points[0]))]
    region_box = [(0, 0)]
    region_gen = [0]
    parent = [-1]
    stop_values = [math.nan]

    top_region = [np.zeros(1, dtype=int)]
    for k in range(1, config.max_depth + 1):
        prev = top_region[-1]
        index = np.arange(1 << k)
        owner = np.repeat(prev, 2)
        refs = np.asarray(ref_values)[owner]
        dev = _max_deviation(map, arc, k, index, refs, n_ang, n_rad)
        stopped = np.flatnonzero(dev > log_M)
        reg = owner.copy()
        if len(stopped):
            L = arc.length_turn / (1 << k)
            rho = 1.0 - 0.75 * L
            mid = arc.start_turn + (stopped + 0.5) * L
            new_pts = rho * np.exp(1j * TWO_PI * mid)
            new_vals = map.log_abs_deriv(new_pts)
            first = len(ref_values)
            reg[stopped] = first + np.arange(len(stopped))
            ref_points.extend(new_pts.tolist())
            ref_values.extend(np.asarray(new_vals, dtype=float).tolist())
            region_box.extend((k, int(j)) for j in stopped)
            region_gen.extend((np.asarray(region_gen)[owner[stopped]] + 1).tolist())
            parent.extend(owner[stopped].tolist())
            stop_values.extend(dev[stopped].tolist())
        top_region.append(reg)

    return GenerationTree(
        root=root,
        config=config,
        top_region=top_region,
        ref_points=np.asarray(ref_points, dtype=complex),
        ref_values=np.asarray(ref_values, dtype=float),
        region_box=np.asarray(region_box, dtype=int).reshape(-1, 2),
        region_generation=np.asarray(region_gen, dtype=int),
        stop_values=np.asarray(stop_values, dtype=float),
        parent_region=np.asarray(parent, dtype=int),
    )


REFERENCE_SAMPLES = 128


def region_oscillations(map: ConformalMap, tree: GenerationTree, samples: int | None = None) -> np.ndarray:
    """``max |log|phi'(z)| - log|phi'(z_ref)||`` over the tops of every region.

    ``samples`` is the angular count per top edge (default: the stopping
    grid); the radial count is half of it.
    """
    n_ang = samples or tree.config.top_samples
    n_rad = max(2, n_ang // 2)
    osc = np.zeros(tree.n_regions)
    for k, reg in enumerate(tree.top_region):
        dev = _max_deviation(map, tree.root.arc, k, np.arange(len(reg)), tree.ref_values[reg], n_ang, n_rad)
        np.maximum.at(osc, reg, dev)
    return osc


def region_oscillation(map: ConformalMap, tree: GenerationTree, region_id: int, samples: int | None = None) -> float:
    return float(region_oscillations(map, tree, samples)[region_id])


def sampling_slack(map: ConformalMap, tree: GenerationTree, samples: int | None = None, reference: int = REFERENCE_SAMPLES) -> float:
    """Largest underestimate of a region oscillation by the ``samples`` grid.

    Measured against a ``reference``-point grid on the same tree, so that
    ``oscillation <= log M + slack`` holds whenever the sampled oscillations
    respect ``log M``.
    """
    coarse = region_oscillations(map, tree, samples)
    fine = region_oscillations(map, tree, reference)
    return max(0.0, float((fine - coarse).max()))


def generation_decay(tree: GenerationTree) -> np.ndarray:
    """``sum_{I_j in G_n} |I_j| / |I|`` for ``n = 1, 2, ...`` (empty if nothing stopped)."""
    n = int(tree.region_generation.max()) if tree.n_regions else 0
    lengths = 0.5 ** tree.region_box[:, 0].astype(float)
    return np.array([lengths[tree.region_generation == g].sum() for g in range(1, n + 1)])


def decay_ratios(totals: np.ndarray) -> np.ndarray:
    """Ratios ``t_n / t_{n-1}`` between consecutive generations, ``n >= 2``."""
    t = np.asarray(totals, dtype=float)
    return t[1:] / t[:-1]


def decay_rate(tree: GenerationTree) -> float:
    """Measured ``rho``: the largest consecutive ratio (0 with fewer than two generations)."""
    r = decay_ratios(generation_decay(tree))
    return float(r.max()) if len(r) else 0.0


@dataclass(frozen=True)
class RegionPullback:
    via_regions: float
    direct: float
    #: mass whose inverse image could not be computed
    failed_mass: float
    failed_count: int
    #: mass of atoms below max_depth (assigned to their deepest resolved region)
    unresolved_mass: float

    @property
    def ratio(self) -> float:
        if self.direct == 0:
            return 1.0 if self.via_regions == 0 else math.inf
        return self.via_regions / self.direct


def region_pullback(map: ConformalMap, mu: PlanarMeasure, tree: GenerationTree, params: EmbeddingParams) -> RegionPullback:
    """Region sum ``sum_l mu(phi(R_l)) / |phi'(z_l)|^s`` next to the direct weighted box mass.

    ``s = q/p``. Atoms of ``mu`` are pulled back once; their preimages are
    located in the tree, which is the point-in-image test for ``phi(R_l)``.
    """
    s = params.hardy_exponent
    pb = pullback(map, mu)
    rep = pb.report
    failed_mass = rep.rejected_mass if rep is not None else 0.0
    failed_count = len(rep.rejected_points) if rep is not None else 0
    region, deep = tree.locate(pb.points)
    keep = region >= 0
    z, w, region = pb.points[keep], pb.weights[keep], region[keep]
    if len(z) == 0:
        return RegionPullback(0.0, 0.0, failed_mass, failed_count, 0.0)
    ref_abs = np.exp(tree.ref_values)
    via = float((w / ref_abs[region] ** s).sum())
    direct = float((w / np.abs(map.deriv(z)) ** s).sum())
    return RegionPullback(via, direct, failed_mass, failed_count, float(w[deep[keep]].sum()))


def pullback_via_regions(map: ConformalMap, mu: PlanarMeasure, tree: GenerationTree, params: EmbeddingParams) -> float:
    return region_pullback(map, mu, tree, params).via_regions
