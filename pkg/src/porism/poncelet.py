"""Periodic orbit construction.

For ellipses, n-periodic orbits with winding k come in one-parameter
families tangent to a confocal caustic; the caustic parameter is found by
bisecting the angular advance of the exact map and polished with secant
steps.  For generic convex tables, orbits are found variationally by
maximizing the perimeter of inscribed polygons.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .errors import (
    ClosureFailure,
    NoConvergence,
    NotBracketed,
    OrderViolation,
    OutOfRange,
)
from .geometry import Ellipse, OrientedLine, SupportCurve

TWO_PI = 2.0 * math.pi

LAMBDA_MARGIN = 1e-9        # inset of the caustic-parameter search bracket
BISECT_CAP = 200            # bisection step budget for the family search
ORBIT_CLOSURE_FACTOR = 1e-7  # build_orbit rejects residuals above this * a1


@dataclass(frozen=True)
class Caustic:
    """Confocal ellipse with semi-axes (ac, bc), parameter lam in (0, a2^2)."""

    ac: float
    bc: float
    lam: float

    def __post_init__(self):
        if not (self.ac >= self.bc > 0.0):
            raise ValueError("caustic requires ac >= bc > 0")

    @property
    def linear_eccentricity(self) -> float:
        return math.sqrt(self.ac * self.ac - self.bc * self.bc)

    def tangent_line(self, t: float) -> OrientedLine:
        """Tangent line at caustic point (ac cos t, bc sin t), oriented so the
        caustic stays on the driver's left (counterclockwise travel)."""
        c, s = math.cos(t), math.sin(t)
        speed = math.hypot(self.ac * s, self.bc * c)
        return OrientedLine(self.ac * self.bc / speed, math.atan2(self.ac * s, self.bc * c))


@dataclass(frozen=True, eq=False)
class BilliardPolygon:
    """Closed billiard n-gon.

    vertices is an (n, 2) array in traversal order; psis and deltas hold the
    normal and reflection angles at each vertex; side i runs from vertex i
    to vertex i+1 and its oriented line has pedal coordinates
    (side_p[i], side_phi[i]), so side_phi[i] = psis[i] + deltas[i]
    = psis[i+1] - deltas[i+1] (mod 2*pi).
    """

    n: int
    vertices: np.ndarray
    psis: np.ndarray
    deltas: np.ndarray
    side_p: np.ndarray
    side_phi: np.ndarray
    L: float
    closure_residual: float

    def __post_init__(self):
        for arr in (self.vertices, self.psis, self.deltas, self.side_p, self.side_phi):
            arr.setflags(write=False)

    @property
    def side_lines(self) -> tuple[OrientedLine, ...]:
        return tuple(OrientedLine(p, f) for p, f in zip(self.side_p, self.side_phi))

    @property
    def winding(self) -> int:
        gaps = (np.roll(self.psis, -1) - self.psis) % TWO_PI
        return int(round(float(np.sum(gaps)) / TWO_PI))


@dataclass(frozen=True)
class PonceletFamily:
    """One-parameter family of (n, k)-periodic orbits in an ellipse."""

    table: Ellipse
    caustic: Caustic
    n: int
    k: int
    J: float

    def orbit(self, t: float) -> BilliardPolygon:
        return build_orbit(self, t)


class JoachimsthalStat(NamedTuple):
    mean: float
    max_dev: float


def caustic_from_lambda(ellipse: Ellipse, lam: float) -> Caustic:
    """Confocal caustic with semi-axes sqrt(a1^2 - lam), sqrt(a2^2 - lam)."""
    if not 0.0 < lam < ellipse.a2 ** 2:
        raise OutOfRange(f"lambda must lie in (0, {ellipse.a2 ** 2:g})")
    return Caustic(
        math.sqrt(ellipse.a1 ** 2 - lam),
        math.sqrt(ellipse.a2 ** 2 - lam),
        lam,
    )


def _caustic_from_bcsq(ellipse: Ellipse, bc_sq: float) -> Caustic:
    """Caustic built from bc^2 = a2^2 - lambda, the well-conditioned
    coordinate for thin caustics (lambda near a2^2)."""
    csq = ellipse.a1 ** 2 - ellipse.a2 ** 2
    return Caustic(math.sqrt(csq + bc_sq), math.sqrt(bc_sq), ellipse.a2 ** 2 - bc_sq)


def _advance_caustic(ellipse: Ellipse, caustic: Caustic, nsteps: int) -> float:
    """Total normal-angle advance over nsteps impacts, launched tangent to
    the caustic at phase 0."""
    line = caustic.tangent_line(0.0)
    status, _, _, adv = kernels.iterate_line(*ellipse.packed(), line.p, line.phi, nsteps, False)
    if status != kernels.OK:
        raise NoConvergence(f"map iteration failed at lambda={caustic.lam:g} (status {status})")
    return adv


def rotation_number(ellipse: Ellipse, lam: float, m: int = 4096) -> float:
    """Mean fraction of a turn per bounce on the invariant circle of lam.

    Launches a line tangent to the caustic and averages the wrapped
    normal-angle advance over m impacts; monotone non-decreasing in lam up
    to the O(1/m) estimator error.
    """
    if m < 256:
        raise ValueError("m must be at least 256")
    return _advance_caustic(ellipse, caustic_from_lambda(ellipse, lam), m) / (TWO_PI * m)


def find_caustic(ellipse: Ellipse, n: int, k: int, tol: float = 1e-9) -> PonceletFamily:
    """Locate the confocal caustic carrying the (n, k)-periodic family.

    The n-impact advance from a tangency launch equals 2*pi*k exactly at
    the family, so the angular defect is bisected to `tol` (measured as a
    rotation-number mismatch) and polished with secant steps.  The search
    runs in the coordinate bc^2 = a2^2 - lambda, which keeps full relative
    precision for the thin caustics of large-winding families.
    """
    if math.gcd(n, k) != 1:
        raise ValueError(f"n={n} and k={k} must be coprime")
    if not 0.0 < k / n < 0.5:
        raise ValueError("winding must satisfy 0 < k/n < 1/2")
    a2sq = ellipse.a2 ** 2
    lo = LAMBDA_MARGIN * a2sq          # thin caustic end: advance above target
    hi = (1.0 - LAMBDA_MARGIN) * a2sq  # near-table end: advance below target
    target = TWO_PI * k

    def defect(bc_sq):
        return _advance_caustic(ellipse, _caustic_from_bcsq(ellipse, bc_sq), n) - target

    f_lo = defect(lo)
    f_hi = defect(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        raise NotBracketed(f"rotation number {k}/{n} not attained on the bracket")
    mid, f_mid = lo, f_lo
    for _ in range(BISECT_CAP):
        if abs(f_mid) < tol * TWO_PI * n or (hi - lo) < 2.0 * np.finfo(float).eps * lo:
            break
        mid = 0.5 * (lo + hi)
        f_mid = defect(mid)
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise NoConvergence("caustic bisection exceeded its step budget")

    # secant polish on the angular closure defect, confined to the bracket
    m0, f0 = lo, f_mid if lo == mid else defect(lo)
    m1, f1 = hi, f_mid if hi == mid else defect(hi)
    for _ in range(12):
        if f1 == f0:
            break
        m2 = m1 - f1 * (m1 - m0) / (f1 - f0)
        if not lo <= m2 <= hi or m2 == m1:
            break
        m0, f0 = m1, f1
        m1, f1 = m2, defect(m2)
        if f1 == 0.0:
            break
    bc_sq = m1 if abs(f1) < abs(f0) else m0

    caustic = _caustic_from_bcsq(ellipse, bc_sq)
    family = PonceletFamily(ellipse, caustic, n, k, J=0.0)
    probe = build_orbit(family, 0.0)
    j = joachimsthal(ellipse, probe)
    return PonceletFamily(ellipse, caustic, n, k, J=j.mean)


def build_orbit(family: PonceletFamily, t: float) -> BilliardPolygon:
    """Member orbit whose incoming side is tangent to the caustic at phase t."""
    ellipse = family.table
    line = family.caustic.tangent_line(t)
    n = family.n
    psis = np.empty(n)
    deltas = np.empty(n)
    ps = np.empty(n)
    phis = np.empty(n)
    status, p_end, phi_end = kernels.trace_orbit(
        *ellipse.packed(), line.p, line.phi, n, False, psis, deltas, ps, phis
    )
    if status != kernels.OK:
        raise ClosureFailure(f"orbit construction failed at phase {t:g} (status {status})")
    vertices = ellipse.points(psis)
    status, _, _, psi_next, _ = kernels.reflect_line(*ellipse.packed(), p_end, phi_end, False)
    if status != kernels.OK:
        raise ClosureFailure(f"closure probe failed at phase {t:g} (status {status})")
    extra = ellipse.point(psi_next)
    residual = math.hypot(extra.x1 - vertices[0, 0], extra.x2 - vertices[0, 1])
    if residual > ORBIT_CLOSURE_FACTOR * ellipse.a1:
        raise ClosureFailure(f"closure residual {residual:g} at phase {t:g}")
    segs = np.roll(vertices, -1, axis=0) - vertices
    length = float(np.sum(np.hypot(segs[:, 0], segs[:, 1])))
    return BilliardPolygon(n, vertices, psis, deltas, ps, phis, length, residual)


def family_sweep(family: PonceletFamily, samples: int, parallel: bool = False) -> list[BilliardPolygon]:
    """build_orbit at `samples` equally spaced tangency phases."""
    if samples < 2:
        raise ValueError("samples must be at least 2")
    phases = [TWO_PI * i / samples for i in range(samples)]

    def one(t):
        try:
            return build_orbit(family, t)
        except ClosureFailure as exc:
            raise ClosureFailure(f"phase {t:g}: {exc}") from exc

    if parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(one, phases))
    return [one(t) for t in phases]


def joachimsthal(ellipse: Ellipse, polygon: BilliardPolygon) -> JoachimsthalStat:
    """Mean and spread of sin(delta)/h(psi) over the polygon's vertices."""
    h, _, _ = ellipse.support_arrays(polygon.psis)
    vals = np.sin(polygon.deltas) / h
    mean = float(np.mean(vals))
    return JoachimsthalStat(mean, float(np.max(np.abs(vals - mean))))


def axis_orbit(ellipse: Ellipse, axis: str = "major") -> BilliardPolygon:
    """Degenerate 2-periodic bounce along a symmetry axis.

    These sit at the boundary of the rotation-number range and are built
    directly rather than through the caustic search.
    """
    a1, a2 = ellipse.a1, ellipse.a2
    if axis == "major":
        vertices = np.array([[a1, 0.0], [-a1, 0.0]])
        psis = np.array([0.0, math.pi])
        side_phi = np.array([0.5 * math.pi, 1.5 * math.pi])
        length = 4.0 * a1
    elif axis == "minor":
        vertices = np.array([[0.0, a2], [0.0, -a2]])
        psis = np.array([0.5 * math.pi, 1.5 * math.pi])
        side_phi = np.array([math.pi, 0.0])
        length = 4.0 * a2
    else:
        raise ValueError("axis must be 'major' or 'minor'")
    deltas = np.array([0.5 * math.pi, 0.5 * math.pi])
    side_p = np.zeros(2)
    return BilliardPolygon(2, vertices, psis, deltas, side_p, side_phi, length, 0.0)


def _polygon_from_angles(curve: SupportCurve, psis: np.ndarray) -> BilliardPolygon:
    """Assemble polygon data from vertex normal angles (variational route)."""
    n = psis.shape[0]
    vertices = curve.points(psis)
    segs = np.roll(vertices, -1, axis=0) - vertices
    ell = np.hypot(segs[:, 0], segs[:, 1])
    side_phi = np.arctan2(-segs[:, 0], segs[:, 1]) % TWO_PI
    side_p = (vertices[:, 0] * segs[:, 1] - vertices[:, 1] * segs[:, 0]) / ell
    deltas = 0.5 * ((side_phi - np.roll(side_phi, 1)) % TWO_PI)
    return BilliardPolygon(
        n, vertices, psis % TWO_PI, deltas, side_p, side_phi,
        float(np.sum(ell)), 0.0,
    )


def birkhoff_orbit(
    curve: SupportCurve,
    n: int,
    k: int,
    seed: int = 0,
    max_iter: int = 100_000,
) -> BilliardPolygon:
    """(n, k)-periodic orbit of any strictly convex table.

    Maximizes the perimeter over inscribed n-gons with winding k by
    projected gradient ascent with a backtracking (Armijo) line search,
    started from equally spaced normal angles jittered by `seed`.  Trial
    steps use the Barzilai-Borwein spectral length, which handles the flat
    ridge of orbit families in ellipses; the projection keeps the lifted
    angles strictly ordered.  At convergence the gradient (equivalently the
    reflection-law defect) is below 1e-10 * diameter.
    """
    if math.gcd(n, k) != 1:
        raise ValueError(f"n={n} and k={k} must be coprime")
    if not 1 <= k < n:
        raise ValueError("winding must satisfy 1 <= k < n")
    rng = np.random.default_rng(seed)
    gap = TWO_PI * k / n
    psis = rng.uniform(0.0, TWO_PI) + gap * np.arange(n)
    psis += rng.uniform(-0.15 * gap, 0.15 * gap, size=n)

    packed = curve.packed()
    diam = curve.diameter()
    gtol = 1e-11 * diam
    gap_min = 1e-9
    span = TWO_PI * k

    def gaps_ok(x):
        g = np.diff(x, append=x[0] + span)
        return bool(np.all(g > gap_min) and np.all(g < TWO_PI - gap_min))

    if not gaps_ok(psis):
        raise OrderViolation("initial angles violate the winding ordering")

    grad = np.empty(n)
    grad_new = np.empty(n)
    value = kernels.perimeter_grad(*packed, psis, grad)
    alpha = 0.5 / diam
    alpha_min = 1e-18
    for _ in range(max_iter):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < gtol:
            return _polygon_from_angles(curve, psis)
        gsq = float(np.dot(grad, grad))
        # backtracking, Armijo with strictly resolvable perimeter progress
        step = alpha
        step_ok = False
        while step > alpha_min:
            trial = psis + step * grad
            if gaps_ok(trial):
                trial_value = kernels.perimeter(*packed, trial)
                if trial_value > value and trial_value >= value + 1e-4 * step * gsq:
                    step_ok = True
                    break
            step *= 0.5
        if not step_ok:
            # perimeter increments fell below float resolution; finish the
            # approach by backtracking on the first-order optimality merit
            step = alpha
            while step > alpha_min:
                trial = psis + step * grad
                if gaps_ok(trial):
                    kernels.perimeter_grad(*packed, trial, grad_new)
                    if float(np.max(np.abs(grad_new))) < gnorm:
                        step_ok = True
                        break
                step *= 0.5
        if not step_ok:
            if gnorm < 1e-10 * diam:
                return _polygon_from_angles(curve, psis)
            if not gaps_ok(psis + alpha_min * grad):
                raise OrderViolation("ordering constraint blocks every ascent step")
            raise NoConvergence(f"line search stalled at gradient norm {gnorm:g}")
        value = kernels.perimeter_grad(*packed, trial, grad_new)
        s = trial - psis
        y = grad_new - grad
        sy = float(np.dot(s, y))
        alpha = float(np.dot(s, s)) / abs(sy) if sy != 0.0 else 2.0 * step
        psis = trial
        grad, grad_new = grad_new, grad
    raise NoConvergence(f"perimeter ascent did not converge in {max_iter} iterations")
