"""Closed-form univalent maps of the disc and the estimators built on them.

Every catalog entry provides ``phi``, ``phi'`` and a continuous branch of
``log phi'`` on the closed disc (minus isolated boundary singularities).
The estimators here are the analytic ingredients the Carleson-measure
arguments lean on: oscillation of ``log|phi'|`` on box tops, a dyadic BMO
estimate for its boundary values, Poisson extension, the nontangential
maximal function and the Koebe distance sandwich.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .disc_geometry import TWO_PI, BoxTop, CircleArc, Cone, DEFAULT_APERTURE

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConformalMap:
    """Univalent map ``phi: D -> Omega`` with its derivative and ``log phi'``."""

    tag: str
    params: dict
    _phi: ArrayFn = field(repr=False, compare=False)
    _dphi: ArrayFn = field(repr=False, compare=False)
    _log_dphi: ArrayFn = field(repr=False, compare=False)
    is_automorphism: bool = field(default=False, compare=False)

    def __call__(self, z):
        return self._phi(np.asarray(z, dtype=complex))

    def deriv(self, z):
        return self._dphi(np.asarray(z, dtype=complex))

    def log_deriv(self, z):
        return self._log_dphi(np.asarray(z, dtype=complex))

    def log_abs_deriv(self, z):
        """``log|phi'(z)|``; also valid on the unit circle (closed form)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.real(self.log_deriv(z))

    @property
    def descriptor(self) -> dict:
        return {"tag": self.tag, **self.params}

    def inverse(self, w, tol: float = 1e-10, max_iter: int = 100):
        """Solve ``phi(z) = w`` by damped Newton iteration.

        Seeds come from nearest-neighbour lookup on a coarse image grid.
        Returns ``(z, converged)`` arrays of the same shape as ``w``.
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        seeds_z = _seed_grid()
        tree = cKDTree(np.column_stack([self(seeds_z).real, self(seeds_z).imag]))
        _, idx = tree.query(np.column_stack([w.real, w.imag]))
        z = seeds_z[idx]
        res = self(z) - w
        for _ in range(max_iter):
            done = np.abs(res) < tol
            if done.all():
                break
            act = ~done
            za, ra = z[act], res[act]
            with np.errstate(divide="ignore", invalid="ignore"):
                step = ra / self.deriv(za)
            lam = np.ones(za.shape)
            # backtrack until inside the disc and the residual decreases
            for _ in range(30):
                cand = za - lam * step
                inside = np.abs(cand) < 1.0
                cres = np.where(inside, self(np.where(inside, cand, 0)) - w[act], np.inf)
                ok = inside & (np.abs(cres) < np.abs(ra))
                if ok.all():
                    break
                lam = np.where(ok, lam, 0.5 * lam)
            ok = np.isfinite(cres) & (np.abs(cres) < np.abs(ra))
            z[np.flatnonzero(act)[ok]] = cand[ok]
            res[np.flatnonzero(act)[ok]] = cres[ok]
            if not ok.any():
                break
        return z, np.abs(res) < tol


def _seed_grid() -> np.ndarray:
    rho = 1.0 - np.geomspace(1.0, 2.0**-14, 72)
    t = np.arange(192) / 192
    return (rho[:, None] * np.exp(1j * TWO_PI * t)[None, :]).ravel()


def _principal_at_zero(log_fn: ArrayFn, dphi: ArrayFn) -> ArrayFn:
    """Shift a continuous branch of ``log phi'`` by ``2 pi i k`` so it is principal at 0."""
    shift = np.angle(dphi(np.zeros(1, complex))[0]) - np.imag(log_fn(np.zeros(1, complex))[0])
    k = round(shift / TWO_PI)
    if k == 0:
        return log_fn
    return lambda z: log_fn(z) + 2j * math.pi * k


def identity() -> ConformalMap:
    return ConformalMap(
        "identity",
        {},
        lambda z: z.copy(),
        lambda z: np.ones_like(z),
        lambda z: np.zeros_like(z),
        is_automorphism=True,
    )


def moebius(a: complex) -> ConformalMap:
    """``z -> (z + a) / (1 + conj(a) z)``, a disc automorphism sending 0 to ``a``."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError(f"moebius parameter must satisfy |a| < 1, got {a}")
    ac = a.conjugate()
    c0 = math.log(1.0 - abs(a) ** 2)
    return ConformalMap(
        "moebius",
        {"a": [a.real, a.imag]},
        lambda z: (z + a) / (1.0 + ac * z),
        lambda z: (1.0 - abs(a) ** 2) / (1.0 + ac * z) ** 2,
        # Re(1 + conj(a) z) > 0 on the closed disc: principal Log is continuous
        lambda z: c0 - 2.0 * np.log(1.0 + ac * z),
        is_automorphism=True,
    )


def quadratic(c: complex) -> ConformalMap:
    """``z -> z + c z**2``; univalent on the disc for ``|c| <= 1/2``."""
    c = complex(c)
    if abs(c) > 0.5:
        raise ValueError(f"quadratic map is univalent only for |c| <= 1/2, got {c}")
    return ConformalMap(
        "quadratic",
        {"c": [c.real, c.imag]},
        lambda z: z + c * z * z,
        lambda z: 1.0 + 2.0 * c * z,
        lambda z: np.log(1.0 + 2.0 * c * z),
    )


def power_corner(gamma: float) -> ConformalMap:
    """``z -> ((1 + z) / 2) ** gamma``: boundary corner of opening ``gamma * pi`` at 0.

    ``gamma < 1`` gives a convex corner, ``gamma = 1`` a disc, ``gamma = 2``
    the cardioid whose boundary has an inward cusp at the origin.
    """
    gamma = float(gamma)
    if not (0.0 < gamma <= 2.0):
        raise ValueError(f"power_corner is univalent only for 0 < gamma <= 2, got {gamma}")
    lg = math.log(gamma / 2.0)

    def log_dphi(z):
        # Re(1 + z) >= 0 on the closed disc: principal Log continuous away from -1
        with np.errstate(divide="ignore", invalid="ignore"):
            return lg + (gamma - 1.0) * np.log(0.5 * (1.0 + z))

    def phi(z):
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.exp(gamma * np.log(0.5 * (1.0 + z)))
        return np.where(z == -1.0, 0.0, w)

    return ConformalMap(
        "power_corner",
        {"gamma": gamma},
        phi,
        lambda z: np.exp(log_dphi(z)),
        log_dphi,
    )


def compose(*maps: ConformalMap) -> ConformalMap:
    """``maps[0] o maps[1] o ... o maps[-1]`` (rightmost applied first).

    All but the outermost entry must be disc automorphisms so the
    composition stays univalent on the disc.
    """
    if len(maps) < 2:
        raise ValueError("composition needs at least two maps")
    if not all(m.is_automorphism for m in maps[1:]):
        raise ValueError("inner maps of a composition must be disc automorphisms")

    def phi(z):
        for m in reversed(maps):
            z = m(z)
        return z

    def dphi(z):
        out = np.ones_like(z)
        for m in reversed(maps):
            out = out * m.deriv(z)
            z = m(z)
        return out

    def log_dphi(z):
        out = np.zeros_like(z)
        for m in reversed(maps):
            out = out + m.log_deriv(z)
            z = m(z)
        return out

    return ConformalMap(
        "composition",
        {"maps": [m.descriptor for m in maps]},
        phi,
        dphi,
        _principal_at_zero(log_dphi, dphi),
        is_automorphism=all(m.is_automorphism for m in maps),
    )


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def from_descriptor(desc: dict) -> ConformalMap:
    """Build a catalog map from ``{"tag": ..., <params>}`` (config/CLI form)."""
    tag = desc.get("tag")
    if tag == "identity":
        return identity()
    if tag == "moebius":
        return moebius(_as_complex(desc["a"]))
    if tag == "quadratic":
        return quadratic(_as_complex(desc["c"]))
    if tag == "power_corner":
        return power_corner(float(desc["gamma"]))
    if tag == "composition":
        return compose(*(from_descriptor(s) for s in desc["maps"]))
    raise ValueError(f"unknown map tag {tag!r}")


def catalog() -> list[ConformalMap]:
    """The standard battery of maps: smooth, corner and cusp regimes."""
    return [
        identity(),
        moebius(0.5),
        moebius(0.7),
        quadratic(0.5),
        quadratic(0.3j),
        power_corner(0.5),
        power_corner(1.5),
        power_corner(2.0),
        compose(quadratic(0.4), moebius(0.3 + 0.2j)),
    ]


# --- estimators -------------------------------------------------------------


def bloch_oscillation(map: ConformalMap, top: BoxTop, samples: int = 8) -> float:
    """Max over sampled pairs in the top of ``|log|phi'(z1)| - log|phi'(z2)||``."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    v = map.log_abs_deriv(top.sample_grid(samples))
    return float(v.max() - v.min())


def bloch_sweep(map: ConformalMap, depth: int, samples: int = 8) -> np.ndarray:
    """Per-level max of :func:`bloch_oscillation` over all dyadic tops, levels ``0..depth``."""
    out = np.empty(depth + 1)
    n_r = max(2, samples // 2)
    u = np.linspace(0.0, 1.0, samples)
    for k in range(depth + 1):
        n = 1 << k
        L = 1.0 / n
        rho = np.linspace(max(0.0, 1.0 - L), 1.0 - 0.5 * L, n_r)
        t = (np.arange(n)[:, None] + u[None, :]) * L
        z = rho[None, :, None] * np.exp(1j * TWO_PI * t)[:, None, :]
        v = map.log_abs_deriv(z).reshape(n, -1)
        out[k] = np.max(v.max(axis=1) - v.min(axis=1))
    return out


def bmo_reference_point(arc: CircleArc) -> complex:
    """``z_I = (1 - |I| / 4 pi) xi_I``: radius halves the normalized arc length."""
    return (1.0 - 0.5 * arc.length_turn) * arc.midpoint


def bmo_norm_estimate(map: ConformalMap, depth: int = 10, quad_points: int = 16) -> float:
    """Dyadic sup of ``(1/|I|) int_I |log|phi'(xi)| - log|phi'(z_I)|| d xi``.

    Gauss-Legendre with ``quad_points`` nodes per arc. Non-finite integrand
    values (a node on a boundary singularity) are dropped with a warning.
    """
    x, wq = np.polynomial.legendre.leggauss(quad_points)
    u, wq = 0.5 * (x + 1.0), 0.5 * wq
    best, skipped = 0.0, 0
    for k in range(depth + 1):
        n = 1 << k
        L = 1.0 / n
        j = np.arange(n)
        xi = np.exp(1j * TWO_PI * (j[:, None] + u[None, :]) * L)
        zI = (1.0 - 0.5 * L) * np.exp(1j * TWO_PI * (j + 0.5) * L)
        f = map.log_abs_deriv(xi) - map.log_abs_deriv(zI)[:, None]
        bad = ~np.isfinite(f)
        if bad.any():
            skipped += int(bad.sum())
            w = np.where(bad, 0.0, wq[None, :])
            f = np.where(bad, 0.0, f)
            vals = (np.abs(f) * w).sum(axis=1) / w.sum(axis=1)
        else:
            vals = np.abs(f) @ wq
        best = max(best, float(vals.max()))
    if skipped:
        warnings.warn(f"bmo_norm_estimate: {skipped} non-finite nodes skipped", RuntimeWarning)
    return best


def poisson_extension(angles, values, z) -> np.ndarray | float:
    """Discrete Poisson integral of boundary data on a uniform periodic grid.

    Trapezoid rule: the mean of ``values * (1 - |z|^2) / |e^{it} - z|^2``.
    """
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("Poisson extension needs |z| < 1")
    xi = np.exp(1j * angles)
    zz = z[..., None]
    kernel = (1.0 - np.abs(zz) ** 2) / np.abs(xi - zz) ** 2
    out = (kernel * values).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def cone_samples(
    vertex_angle: float,
    aperture: float = DEFAULT_APERTURE,
    radial_levels: int = 20,
    angular_samples: int = 9,
) -> np.ndarray:
    """Points of the cone on radii ``1 - 2**-k``, fanned across its angular width."""
    cone = Cone(vertex_angle, aperture)
    pts = []
    for k in range(radial_levels + 1):
        rho = 1.0 - 2.0**-k
        if rho == 0.0:
            pts.append(np.zeros(1, complex))
            continue
        # |rho e^{is} - 1| < aperture (1 - rho) bounds the angular offset s
        c = (1.0 + rho**2 - (aperture * (1.0 - rho)) ** 2) / (2.0 * rho)
        half = math.acos(max(-1.0, min(1.0, c)))
        s = np.linspace(-half, half, angular_samples + 2)[1:-1]
        cand = rho * np.exp(1j * (vertex_angle + s))
        pts.append(cand[cone.contains(cand)])
    return np.concatenate(pts)


def nontangential_max(
    u: Callable[[np.ndarray], np.ndarray],
    vertex_angle: float,
    aperture: float = DEFAULT_APERTURE,
    radial_levels: int = 20,
    angular_samples: int = 9,
) -> float:
    """Sampled ``sup |u|`` over the cone with vertex ``e^{i vertex_angle}``."""
    pts = cone_samples(vertex_angle, aperture, radial_levels, angular_samples)
    return float(np.max(np.abs(u(pts))))


def koebe_delta_bounds(map: ConformalMap, z) -> tuple:
    """``(|phi'|(1-|z|^2) / 4, |phi'|(1-|z|^2))``, which sandwich ``dist(phi(z), boundary)``."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("koebe bounds need |z| < 1")
    upper = np.abs(map.deriv(z)) * (1.0 - np.abs(z) ** 2)
    if upper.ndim == 0:
        return 0.25 * float(upper), float(upper)
    return 0.25 * upper, upper


def univalence_spot_check(map: ConformalMap, n: int = 200, seed: int = 0) -> float:
    """Smallest pairwise image distance over ``n`` random disc points (0 means a collision)."""
    rng = np.random.default_rng(seed)
    z = np.sqrt(rng.uniform(0, 0.98, n)) * np.exp(1j * rng.uniform(0, TWO_PI, n))
    w = map(z)
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices(n)] = np.inf
    return float(d.min())


def derivative_nonvanishing(map: ConformalMap, grid: Sequence[complex] | None = None) -> bool:
    if grid is None:
        rho = np.linspace(0.0, 0.995, 60)
        grid = (rho[:, None] * np.exp(1j * np.linspace(0, TWO_PI, 120))[None, :]).ravel()
    d = map.deriv(np.asarray(grid, complex))
    return bool(np.all(np.isfinite(d)) and np.all(np.abs(d) > 0))
