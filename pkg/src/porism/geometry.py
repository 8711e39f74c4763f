"""Convex tables as support functions, oriented lines, pedal constructions.

A table is described by its support function h(psi): the signed distance
from the origin to the tangent line whose outer normal points in direction
psi.  Two variants are provided: an ellipse (closed forms) and a truncated
trigonometric series (generic smooth convex tables).  Oriented lines are
written in pedal coordinates, cos(phi) x1 + sin(phi) x2 = p, with phi the
direction of the right normal of the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import NonConvexTable

TWO_PI = 2.0 * math.pi

_EMPTY = np.empty(0, dtype=np.float64)

CONVEXITY_GRID = 4096
CONVEXITY_MARGIN = 1e-6  # min(h + h'') must exceed this times c0


def wrap2pi(x: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    return x % TWO_PI


def wrap_pm(x: float) -> float:
    """Wrap an angle difference into (-pi, pi]."""
    y = x % TWO_PI
    if y > math.pi:
        y -= TWO_PI
    return y


@dataclass(frozen=True)
class Point2:
    """A point of the plane."""

    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise ValueError("point components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x1 - other.x1, self.x2 - other.x2)


@dataclass(frozen=True)
class OrientedLine:
    """Oriented line in pedal coordinates (p, phi).

    Points of travel direction (-sin phi, cos phi); the right normal is
    (cos phi, sin phi).  phi is normalized into [0, 2*pi) on construction.
    """

    p: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", wrap2pi(self.phi))

    def normal(self) -> tuple[float, float]:
        return math.cos(self.phi), math.sin(self.phi)

    def direction(self) -> tuple[float, float]:
        return -math.sin(self.phi), math.cos(self.phi)

    def point_at(self, s: float) -> Point2:
        """Point at arc-length s from the pedal foot of the origin."""
        c, sn = self.normal()
        return Point2(self.p * c - s * sn, self.p * sn + s * c)

    def signed_offset(self, pt: Point2) -> float:
        """cos(phi) x1 + sin(phi) x2 - p; zero exactly on the line."""
        return math.cos(self.phi) * pt.x1 + math.sin(self.phi) * pt.x2 - self.p

    def reverse(self) -> "OrientedLine":
        """Same carrier line, opposite orientation."""
        return OrientedLine(-self.p, self.phi + math.pi)


class SupportCurve:
    """Base class for tables given by a smooth support function."""

    kind: int = -1

    def packed(self):
        """(kind, q0, q1, ks, ca, cb) arguments for the kernel backend."""
        raise NotImplementedError

    def support(self, psi: float) -> tuple[float, float, float]:
        return kernels.support_eval(*self.packed(), psi)

    def support_arrays(self, psis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return kernels.support_batch(*self.packed(), np.asarray(psis, dtype=np.float64))

    def point(self, psi: float) -> Point2:
        h, h1, _ = self.support(psi)
        c, s = math.cos(psi), math.sin(psi)
        return Point2(h * c - h1 * s, h * s + h1 * c)

    def points(self, psis) -> np.ndarray:
        """Curve points for an array of normal angles, shape (m, 2)."""
        psis = np.asarray(psis, dtype=np.float64)
        h, h1, _ = self.support_arrays(psis)
        c, s = np.cos(psis), np.sin(psis)
        return np.column_stack((h * c - h1 * s, h * s + h1 * c))

    def tangent_line(self, psi: float) -> OrientedLine:
        """Tangent line at the point with outer normal direction psi."""
        h, _, _ = self.support(psi)
        return OrientedLine(h, psi)

    def diameter(self) -> float:
        grid = np.linspace(0.0, TWO_PI, 1024, endpoint=False)
        h, _, _ = self.support_arrays(grid)
        return 2.0 * float(np.max(h))


@dataclass(frozen=True)
class Ellipse(SupportCurve):
    """Origin-centered, axis-aligned ellipse with semi-axes a1 >= a2 > 0."""

    a1: float
    a2: float

    kind = 0

    def __post_init__(self):
        if not (self.a1 >= self.a2 > 0.0):
            raise ValueError("ellipse requires a1 >= a2 > 0")

    def packed(self):
        return (0, self.a1, self.a2, _EMPTY, _EMPTY, _EMPTY)

    def diameter(self) -> float:
        return 2.0 * self.a1

    @property
    def linear_eccentricity(self) -> float:
        return math.sqrt(self.a1 * self.a1 - self.a2 * self.a2)


@dataclass(frozen=True)
class TrigPoly(SupportCurve):
    """Table with support function c0 + sum_k (a_k cos k psi + b_k sin k psi).

    Harmonics are (k, a_k, b_k) with integer k >= 2; order-1 terms only
    translate the curve and are instead carried by the origin offset, zero
    by default.  Construction validates h > 0 and strict convexity
    h + h'' > 0 on a dense grid and rejects violations.
    """

    c0: float
    harmonics: tuple[tuple[int, float, float], ...] = ()
    origin: tuple[float, float] = (0.0, 0.0)

    kind = 1

    _ks: np.ndarray = field(init=False, repr=False, compare=False)
    _ca: np.ndarray = field(init=False, repr=False, compare=False)
    _cb: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.c0 <= 0.0:
            raise ValueError("mean width c0 must be positive")
        ks, ca, cb = [], [], []
        for k, ak, bk in self.harmonics:
            if int(k) != k or k < 2:
                raise ValueError("harmonic orders must be integers >= 2")
            ks.append(float(k))
            ca.append(float(ak))
            cb.append(float(bk))
        ox, oy = self.origin
        if ox != 0.0 or oy != 0.0:
            # an offset origin is exactly an order-1 harmonic of h
            ks.append(1.0)
            ca.append(float(ox))
            cb.append(float(oy))
        object.__setattr__(self, "_ks", np.asarray(ks, dtype=np.float64))
        object.__setattr__(self, "_ca", np.asarray(ca, dtype=np.float64))
        object.__setattr__(self, "_cb", np.asarray(cb, dtype=np.float64))
        self._validate()

    def _validate(self):
        grid = np.linspace(0.0, TWO_PI, CONVEXITY_GRID, endpoint=False)
        h, _, h2 = self.support_arrays(grid)
        if np.min(h) <= 0.0:
            raise NonConvexTable("support function is not positive")
        if np.min(h + h2) <= CONVEXITY_MARGIN * self.c0:
            raise NonConvexTable("curvature radius h + h'' not positive")

    def packed(self):
        return (1, self.c0, 0.0, self._ks, self._ca, self._cb)


def support_eval(curve: SupportCurve, psi: float) -> tuple[float, float, float]:
    """h(psi), h'(psi), h''(psi) for the given table."""
    return curve.support(psi)


def curve_point(curve: SupportCurve, psi: float) -> Point2:
    """Point of the table whose outer normal has direction psi."""
    return curve.point(psi)


def pedal_foot(line: OrientedLine, pt: Point2) -> Point2:
    """Orthogonal projection of pt onto the line."""
    c, s = line.normal()
    t = line.p - (c * pt.x1 + s * pt.x2)
    return Point2(pt.x1 + t * c, pt.x2 + t * s)


def focal_distances(line: OrientedLine, c: float) -> tuple[float, float]:
    """Distances from the foci (c, 0) and (-c, 0) to the line."""
    if c < 0.0:
        raise ValueError("linear eccentricity must be nonnegative")
    proj = c * math.cos(line.phi)
    return abs(line.p - proj), abs(line.p + proj)
