"""Arcs, Carleson boxes, box tops, cones and Whitney balls of the unit disc.

Arcs are stored in *turns* (fractions of the full circle) so that dyadic
endpoints ``j / 2**k`` are exact binary floats. All membership tests are
half-open: an arc contains its left endpoint, a box contains its inner
radius and excludes ``|z| = 1``. With this convention the level-``k`` boxes
of a dyadic decomposition tile the disc annulus exactly and an atom is
counted once per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: Lower Whitney constant: balls satisfy ``c * delta <= r <= delta / 2``.
WHITNEY_C = 0.25

#: Default cone aperture; any fixed value > 1 keeps the radius inside the cone.
DEFAULT_APERTURE = 2.0

MAX_DYADIC_DEPTH = 30


def to_turns(z) -> np.ndarray:
    """Argument of ``z`` as a fraction of the full turn, in ``[0, 1)``."""
    t = np.angle(np.asarray(z, dtype=complex)) / TWO_PI
    t = np.where(t < 0.0, t + 1.0, t)
    # angle = -0.0 or a tiny negative value can round up to exactly 1.0
    return np.where(t >= 1.0, 0.0, t)


@dataclass(frozen=True)
class CircleArc:
    """Half-open arc ``[start, start + length)`` of the unit circle, in turns."""

    start_turn: float
    length_turn: float

    def __post_init__(self):
        if not (0.0 < self.length_turn <= 1.0):
            raise ValueError(f"arc length must lie in (0, 1] turns, got {self.length_turn}")
        object.__setattr__(self, "start_turn", self.start_turn % 1.0)

    @classmethod
    def from_radians(cls, center_angle: float, length: float) -> "CircleArc":
        if not (0.0 < length <= TWO_PI):
            raise ValueError(f"arc length must lie in (0, 2pi], got {length}")
        length_turn = 1.0 if length == TWO_PI else length / TWO_PI
        return cls(center_angle / TWO_PI - 0.5 * length_turn, length_turn)

    @classmethod
    def dyadic(cls, level: int, index: int) -> "CircleArc":
        n = 1 << level
        if not 0 <= index < n:
            raise ValueError(f"index {index} out of range for level {level}")
        return cls(index / n, 1.0 / n)

    @property
    def length(self) -> float:
        """Arc length in radians, ``|I|``."""
        return TWO_PI * self.length_turn

    @property
    def center_turn(self) -> float:
        return (self.start_turn + 0.5 * self.length_turn) % 1.0

    @property
    def center_angle(self) -> float:
        return TWO_PI * self.center_turn

    @property
    def midpoint(self) -> complex:
        return complex(np.exp(1j * self.center_angle))

    def contains_turn(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        end = self.start_turn + self.length_turn
        if end <= 1.0:
            return (t >= self.start_turn) & (t < end)
        return (t >= self.start_turn) | (t < end - 1.0)

    def contains_angle(self, theta) -> np.ndarray:
        return self.contains_turn(np.mod(np.asarray(theta, dtype=float) / TWO_PI, 1.0))

    def children(self) -> tuple["CircleArc", "CircleArc"]:
        half = 0.5 * self.length_turn
        return CircleArc(self.start_turn, half), CircleArc(self.start_turn + half, half)

    def rotated(self, turns: float) -> "CircleArc":
        return CircleArc(self.start_turn + turns, self.length_turn)

    def __eq__(self, other):
        if not isinstance(other, CircleArc):
            return NotImplemented
        d = (self.start_turn - other.start_turn) % 1.0
        return self.length_turn == other.length_turn and (d == 0.0 or d == 1.0)

    def __hash__(self):
        return hash((self.start_turn % 1.0, self.length_turn))


def _sector_area(width_turn: float, r_in: float, r_out: float) -> float:
    return math.pi * width_turn * (r_out * r_out - r_in * r_in)


@dataclass(frozen=True)
class CarlesonBox:
    """``S(I) = {r e^{it} : e^{it} in I, 1 - |I|/2pi <= r < 1}``."""

    arc: CircleArc
    inner_radius: float

    @property
    def top(self) -> "BoxTop":
        return box_top(self.arc)

    @property
    def area(self) -> float:
        return _sector_area(self.arc.length_turn, self.inner_radius, 1.0)

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        return (r >= self.inner_radius) & (r < 1.0) & self.arc.contains_turn(to_turns(z))

    def children(self) -> tuple["CarlesonBox", "CarlesonBox"]:
        return tuple(carleson_box(a) for a in self.arc.children())


@dataclass(frozen=True)
class BoxTop:
    """``T(S) = {r e^{it} : e^{it} in I, 1 - |I|/2pi <= r < 1 - |I|/4pi}``."""

    arc: CircleArc
    inner_radius: float
    outer_radius: float

    @property
    def area(self) -> float:
        return _sector_area(self.arc.length_turn, self.inner_radius, self.outer_radius)

    @property
    def center(self) -> complex:
        """Polar midpoint of the top; the stopping-time reference point."""
        rho = 0.5 * (self.inner_radius + self.outer_radius)
        return rho * self.arc.midpoint

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        return (
            (r >= self.inner_radius)
            & (r < self.outer_radius)
            & self.arc.contains_turn(to_turns(z))
        )

    def sample_grid(self, n_angular: int = 8, n_radial: int | None = None) -> np.ndarray:
        """Closed polar sub-grid of the top, shape ``(n_radial * n_angular,)``.

        The closure is sampled (both radial and angular endpoints included);
        the sup of a continuous function over the half-open top equals the
        sup over its closure.
        """
        if n_radial is None:
            n_radial = max(2, n_angular // 2)
        rho = np.linspace(self.inner_radius, self.outer_radius, n_radial)
        t = self.arc.start_turn + self.arc.length_turn * np.linspace(0.0, 1.0, n_angular)
        return (rho[:, None] * np.exp(1j * TWO_PI * t)[None, :]).ravel()


def carleson_box(arc: CircleArc) -> CarlesonBox:
    return CarlesonBox(arc, max(0.0, 1.0 - arc.length_turn))


def box_top(arc: CircleArc) -> BoxTop:
    return BoxTop(arc, max(0.0, 1.0 - arc.length_turn), 1.0 - 0.5 * arc.length_turn)


def dyadic_boxes(depth: int) -> list[CarlesonBox]:
    """All dyadic Carleson boxes of levels ``0..depth`` (``2**(depth+1) - 1`` boxes)."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth > MAX_DYADIC_DEPTH:
        raise ValueError(f"depth {depth} exceeds the resource guard {MAX_DYADIC_DEPTH}")
    return [
        carleson_box(CircleArc.dyadic(k, j)) for k in range(depth + 1) for j in range(1 << k)
    ]


def dyadic_index(z, level: int) -> np.ndarray:
    """Index ``j`` of the level-``level`` dyadic arc containing ``arg z``.

    ``t * 2**level`` is an exact power-of-two scaling, so this agrees with
    :meth:`CircleArc.contains_turn` on ``CircleArc.dyadic(level, j)``.
    """
    n = 1 << level
    j = np.floor(to_turns(z) * n).astype(np.int64)
    return np.minimum(j, n - 1)


@dataclass(frozen=True)
class Cone:
    """Nontangential approach region ``{|z - e^{i xi}| < aperture (1 - |z|)}``."""

    vertex_angle: float
    aperture: float = DEFAULT_APERTURE

    def __post_init__(self):
        if self.aperture <= 0:
            raise ValueError("aperture must be positive")

    @property
    def vertex(self) -> complex:
        return complex(np.exp(1j * self.vertex_angle))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.abs(z - self.vertex) < self.aperture * (1.0 - np.abs(z))


def cone_contains(cone: Cone, z) -> np.ndarray | bool:
    out = cone.contains(z)
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiscWhitneyBall:
    center: complex
    radius: float

    def __post_init__(self):
        delta = 1.0 - abs(self.center)
        if delta <= 0:
            raise ValueError("Whitney ball center must lie in the open disc")
        if not (WHITNEY_C * delta <= self.radius <= 0.5 * delta):
            raise ValueError(
                f"radius {self.radius} outside the Whitney band "
                f"[{WHITNEY_C * delta}, {0.5 * delta}]"
            )

    @classmethod
    def at(cls, center: complex, fraction: float = 0.5) -> "DiscWhitneyBall":
        return cls(center, fraction * (1.0 - abs(center)))

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z, dtype=complex) - self.center) <= self.radius


def hyperbolic_grid(depth: int, oversample: int = 16) -> np.ndarray:
    """Centers on radial levels ``1 - 2**-k``, ``oversample * 2**k`` angles per level.

    Level 0 is the single point 0. ``2**k`` angles per level leave gaps
    between balls of radius ``delta / 2``; ``oversample`` closes them.
    """
    pts = [np.zeros(1, dtype=complex)]
    for k in range(1, depth + 1):
        n = oversample << k
        t = np.arange(n) / n
        pts.append((1.0 - 2.0**-k) * np.exp(1j * TWO_PI * t))
    return np.concatenate(pts)
