"""The billiard reflection map and its generating function.

The map acts on oriented lines (p, phi).  Writing psi for the normal
direction at the reflection point and delta for the reflection angle, the
incoming and outgoing lines have normals phi1 = psi - delta and
phi2 = psi + delta, and S(phi1, phi2) = 2 h(psi) sin(delta) generates the
map: p1 = -dS/dphi1, p2 = dS/dphi2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels
from .errors import DegenerateChord, MissesTable, NoIntersection, TangentRay
from .geometry import Ellipse, OrientedLine, SupportCurve, wrap2pi, wrap_pm

HALF_PI = 0.5 * math.pi

JACOBIAN_STEP = 1e-5  # central-difference step for map derivatives


@dataclass(frozen=True)
class VertexState:
    """Impact-point representation of a trajectory: normal angle at the
    current reflection point and direction angle of the outgoing ray."""

    psi: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap2pi(self.psi))
        object.__setattr__(self, "theta", wrap2pi(self.theta))
        d = wrap2pi((self.theta - HALF_PI) - self.psi)
        if not 0.0 < d < math.pi:
            raise ValueError("outgoing ray must point into the table")

    def line(self, curve: SupportCurve) -> OrientedLine:
        """Oriented line carrying the outgoing ray."""
        phi = wrap2pi(self.theta - HALF_PI)
        m = curve.point(self.psi)
        return OrientedLine(m.x1 * math.cos(phi) + m.x2 * math.sin(phi), phi)


@dataclass(frozen=True)
class ChordData:
    """One reflection in line coordinates: incoming line, the two chord
    normals, the vertex normal psi = (phi1+phi2)/2 and reflection angle
    delta = (phi2-phi1)/2."""

    line: OrientedLine
    phi1: float
    phi2: float
    psi: float
    delta: float

    @classmethod
    def from_normals(cls, curve: SupportCurve, phi1: float, phi2: float) -> "ChordData":
        psi, delta = split_chord(phi1, phi2)
        p1, _ = gen_partials(curve, phi1, phi2)
        return cls(OrientedLine(p1, phi1), wrap2pi(phi1), wrap2pi(phi2), psi, delta)


def split_chord(phi1: float, phi2: float) -> tuple[float, float]:
    """Vertex normal and reflection angle for chord normals (phi1, phi2).

    The gap phi2 - phi1 wrapped into (0, 2*pi) must lie in (0, pi], so the
    reflection angle is in (0, pi/2] (pi/2 exactly for diameter chords).
    """
    gap = wrap2pi(phi2 - phi1)
    if not 0.0 < gap <= math.pi:
        raise DegenerateChord(f"wrapped angle gap {gap:.6g} outside (0, pi]")
    delta = 0.5 * gap
    return wrap2pi(phi1 + delta), delta


def generating_function(curve: SupportCurve, phi1: float, phi2: float) -> float:
    """S(phi1, phi2) = 2 h(psi) sin(delta)."""
    psi, delta = split_chord(phi1, phi2)
    h, _, _ = curve.support(psi)
    return 2.0 * h * math.sin(delta)


def gen_partials(curve: SupportCurve, phi1: float, phi2: float) -> tuple[float, float]:
    """Pedal distances of the incoming and outgoing lines.

    p1 = h cos(delta) - h' sin(delta) = -dS/dphi1,
    p2 = h cos(delta) + h' sin(delta) =  dS/dphi2.
    """
    psi, delta = split_chord(phi1, phi2)
    h, h1, _ = curve.support(psi)
    cd = math.cos(delta)
    sd = math.sin(delta)
    return h * cd - h1 * sd, h * cd + h1 * sd


def _raise_for_status(status: int):
    if status == kernels.MISSES:
        raise MissesTable("line does not cross the table interior")
    if status == kernels.TANGENT:
        raise TangentRay("grazing reflection (delta below cutoff)")
    if status == kernels.NO_INTERSECT:
        raise NoIntersection("sign change bracketing failed; table not convex?")


def map_line(curve: SupportCurve, line: OrientedLine, rootfind: bool = False) -> OrientedLine:
    """Billiard image of an oriented line.

    Ellipses use the exact line-conic quadratic unless rootfind is forced;
    generic tables solve the monotone support-parameter equation by
    bisection.
    """
    status, p2, phi2, _, _ = kernels.reflect_line(
        *curve.packed(), line.p, line.phi, rootfind or curve.kind != 0
    )
    _raise_for_status(status)
    return OrientedLine(p2, phi2)


def _reflect_state(curve: SupportCurve, state: VertexState, rootfind: bool) -> VertexState:
    line = state.line(curve)
    status, _, phi2, psi, _ = kernels.reflect_line(*curve.packed(), line.p, line.phi, rootfind)
    if status == kernels.MISSES:
        # a ray from a boundary point can only "miss" by grazing along it
        raise TangentRay("ray grazes the table at its start point")
    _raise_for_status(status)
    return VertexState(psi, phi2 + HALF_PI)


def reflect_ellipse(ellipse: Ellipse, state: VertexState) -> VertexState:
    """Next impact on an ellipse via the closed-form chord-conic quadratic."""
    if not isinstance(ellipse, Ellipse):
        raise TypeError("reflect_ellipse requires an Ellipse table")
    return _reflect_state(ellipse, state, rootfind=False)


def reflect_generic(curve: SupportCurve, state: VertexState) -> VertexState:
    """Next impact on any strictly convex table via root finding."""
    return _reflect_state(curve, state, rootfind=True)


def jacobian_det(curve: SupportCurve, line: OrientedLine, step: float = JACOBIAN_STEP) -> float:
    """Central-difference Jacobian determinant of map_line in (p, phi).

    Equals 1 for the exact map (dp ^ dphi is invariant); deviations measure
    only the numerics of the map.
    """
    def image(p, phi):
        out = map_line(curve, OrientedLine(p, phi))
        return out.p, out.phi

    p0, f0 = line.p, line.phi
    pa, fa = image(p0 + step, f0)
    pb, fb = image(p0 - step, f0)
    pc, fc = image(p0, f0 + step)
    pd, fd = image(p0, f0 - step)
    dp_dp = (pa - pb) / (2.0 * step)
    df_dp = wrap_pm(fa - fb) / (2.0 * step)
    dp_df = (pc - pd) / (2.0 * step)
    df_df = wrap_pm(fc - fd) / (2.0 * step)
    return dp_dp * df_df - dp_df * df_dp
