"""Pure-Python numerics kernels.

Mirrors the compiled module ``porism._kernels`` function for function; the
active implementation is chosen once at import by ``porism._backend``.
Curves are passed in packed form::

    kind 0 -> ellipse,     q0 = major semi-axis, q1 = minor semi-axis
    kind 1 -> trig series, q0 = mean width c0,   q1 unused,
              ks/ca/cb = harmonic orders and cos/sin coefficients

All angles are radians; reflections report status codes instead of raising
so that both backends stay exception-free at this level.
"""

import math

import numpy as np

BACKEND = "python"

TWO_PI = 2.0 * math.pi

# status codes shared with the compiled kernel
OK = 0
MISSES = 1
TANGENT = 2
NO_INTERSECT = 3

# reflection angles closer than this to 0 or pi count as grazing
GRAZE_TOL = 1e-8

_BISECT_STEPS = 64


def _wrap2pi(x):
    return x % TWO_PI


def support_eval(kind, q0, q1, ks, ca, cb, psi):
    """Support function value and first two derivatives at one angle."""
    if kind == 0:
        dd = q0 * q0 - q1 * q1
        c = math.cos(psi)
        s = math.sin(psi)
        u = q1 * q1 + dd * c * c
        up = -2.0 * dd * s * c
        upp = -2.0 * dd * (c * c - s * s)
        h = math.sqrt(u)
        h1 = 0.5 * up / h
        h2 = 0.5 * upp / h - 0.25 * up * up / (u * h)
        return h, h1, h2
    h = q0
    h1 = 0.0
    h2 = 0.0
    for i in range(ks.shape[0]):
        k = ks[i]
        c = math.cos(k * psi)
        s = math.sin(k * psi)
        h += ca[i] * c + cb[i] * s
        h1 += k * (cb[i] * c - ca[i] * s)
        h2 -= k * k * (ca[i] * c + cb[i] * s)
    return h, h1, h2


def support_batch(kind, q0, q1, ks, ca, cb, psis):
    """Vectorized support_eval; returns (h, h', h'') arrays."""
    psis = np.asarray(psis, dtype=np.float64)
    if kind == 0:
        dd = q0 * q0 - q1 * q1
        c = np.cos(psis)
        s = np.sin(psis)
        u = q1 * q1 + dd * c * c
        up = -2.0 * dd * s * c
        upp = -2.0 * dd * (c * c - s * s)
        h = np.sqrt(u)
        h1 = 0.5 * up / h
        h2 = 0.5 * upp / h - 0.25 * up * up / (u * h)
        return h, h1, h2
    if ks.shape[0] == 0:
        shape = psis.shape
        return (np.full(shape, q0), np.zeros(shape), np.zeros(shape))
    arg = np.multiply.outer(psis, ks)
    c = np.cos(arg)
    s = np.sin(arg)
    h = q0 + c @ ca + s @ cb
    h1 = c @ (ks * cb) - s @ (ks * ca)
    h2 = -(c @ (ks * ks * ca)) - (s @ (ks * ks * cb))
    return h, h1, h2


def _curve_xy(kind, q0, q1, ks, ca, cb, psi):
    h, h1, _ = support_eval(kind, q0, q1, ks, ca, cb, psi)
    c = math.cos(psi)
    s = math.sin(psi)
    return h * c - h1 * s, h * s + h1 * c


def _reflect_closed(a1, a2, p, phi):
    """One reflection of the oriented line (p, phi) in an ellipse, exactly.

    Solves the line-conic quadratic for the exit point, then reflects.
    """
    c1 = math.cos(phi)
    s1 = math.sin(phi)
    ia = 1.0 / (a1 * a1)
    ib = 1.0 / (a2 * a2)
    qa = s1 * s1 * ia + c1 * c1 * ib
    qb = 2.0 * p * c1 * s1 * (ib - ia)
    qc = p * p * (c1 * c1 * ia + s1 * s1 * ib) - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        disc = 0.0
    sq = math.sqrt(disc)
    # larger root, cancellation-free
    if qb <= 0.0:
        s_exit = (-qb + sq) / (2.0 * qa)
    else:
        s_exit = 2.0 * qc / (-qb - sq)
    mx = p * c1 - s_exit * s1
    my = p * s1 + s_exit * c1
    psi = math.atan2(my * ib, mx * ia)
    delta = _wrap2pi(psi - phi)
    if delta > math.pi:
        # roundoff pushed a grazing exit across the branch cut
        return (TANGENT, 0.0, 0.0, 0.0, 0.0)
    if delta < GRAZE_TOL or delta > math.pi - GRAZE_TOL:
        return (TANGENT, 0.0, 0.0, 0.0, 0.0)
    phi2 = _wrap2pi(psi + delta)
    p2 = mx * math.cos(phi2) + my * math.sin(phi2)
    return (OK, p2, phi2, _wrap2pi(psi), delta)


def _reflect_rootfind(kind, q0, q1, ks, ca, cb, p, phi):
    """One reflection via the support-parameter equation.

    The signed offset of the curve point at normal angle phi+u from the line
    is F(u) = h(phi+u) cos u - h'(phi+u) sin u - p, strictly decreasing on
    (0, pi) for strictly convex tables, so the exit angle is the unique root
    and plain bisection suffices.
    """
    f_lo, _, _ = support_eval(kind, q0, q1, ks, ca, cb, phi)
    f_lo -= p
    h_back, _, _ = support_eval(kind, q0, q1, ks, ca, cb, phi + math.pi)
    f_hi = -h_back - p
    if f_lo <= 0.0 or f_hi >= 0.0:
        return (NO_INTERSECT, 0.0, 0.0, 0.0, 0.0)
    lo = 0.0
    hi = math.pi
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        h, h1, _ = support_eval(kind, q0, q1, ks, ca, cb, phi + mid)
        f = h * math.cos(mid) - h1 * math.sin(mid) - p
        if f > 0.0:
            lo = mid
        else:
            hi = mid
    delta = 0.5 * (lo + hi)
    if delta < GRAZE_TOL or delta > math.pi - GRAZE_TOL:
        return (TANGENT, 0.0, 0.0, 0.0, 0.0)
    psi = _wrap2pi(phi + delta)
    mx, my = _curve_xy(kind, q0, q1, ks, ca, cb, psi)
    phi2 = _wrap2pi(psi + delta)
    p2 = mx * math.cos(phi2) + my * math.sin(phi2)
    return (OK, p2, phi2, psi, delta)


def reflect_line(kind, q0, q1, ks, ca, cb, p, phi, rootfind):
    """Billiard map on oriented lines; returns (status, p2, phi2, psi, delta)."""
    h_f, _, _ = support_eval(kind, q0, q1, ks, ca, cb, phi)
    h_b, _, _ = support_eval(kind, q0, q1, ks, ca, cb, phi + math.pi)
    if p >= h_f or p <= -h_b:
        return (MISSES, 0.0, 0.0, 0.0, 0.0)
    if kind == 0 and not rootfind:
        return _reflect_closed(q0, q1, p, phi)
    return _reflect_rootfind(kind, q0, q1, ks, ca, cb, p, phi)


def iterate_line(kind, q0, q1, ks, ca, cb, p, phi, nsteps, rootfind):
    """Iterate the map nsteps+1 times, accumulating the normal-angle advance.

    The advance is the sum over nsteps consecutive impacts of the wrapped
    gap psi_{i+1} - psi_i; dividing by 2*pi*nsteps gives the rotation-number
    estimate.  Returns (status, p_end, phi_end, advance).
    """
    status, p, phi, psi_prev, _ = reflect_line(kind, q0, q1, ks, ca, cb, p, phi, rootfind)
    if status != OK:
        return (status, 0.0, 0.0, 0.0)
    advance = 0.0
    for _ in range(nsteps):
        status, p, phi, psi, _ = reflect_line(kind, q0, q1, ks, ca, cb, p, phi, rootfind)
        if status != OK:
            return (status, 0.0, 0.0, 0.0)
        advance += _wrap2pi(psi - psi_prev)
        psi_prev = psi
    return (OK, p, phi, advance)


def trace_orbit(kind, q0, q1, ks, ca, cb, p, phi, n, rootfind, psis, deltas, ps, phis):
    """Run n reflections, recording per-vertex and per-side data.

    psis/deltas hold the normal and reflection angle at each impact;
    ps/phis hold the outgoing side line after each impact.  Returns
    (status, p_end, phi_end) where the end line is side n.
    """
    for i in range(n):
        status, p, phi, psi, delta = reflect_line(kind, q0, q1, ks, ca, cb, p, phi, rootfind)
        if status != OK:
            return (status, 0.0, 0.0)
        psis[i] = psi
        deltas[i] = delta
        ps[i] = p
        phis[i] = phi
    return (OK, p, phi)


def perimeter(kind, q0, q1, ks, ca, cb, psis):
    """Perimeter of the polygon inscribed at normal angles psis."""
    h, h1, _ = support_batch(kind, q0, q1, ks, ca, cb, psis)
    c = np.cos(psis)
    s = np.sin(psis)
    x = h * c - h1 * s
    y = h * s + h1 * c
    dx = np.roll(x, -1) - x
    dy = np.roll(y, -1) - y
    return float(np.sum(np.hypot(dx, dy)))


def perimeter_grad(kind, q0, q1, ks, ca, cb, psis, grad):
    """Perimeter and its gradient with respect to the normal angles.

    grad_i = gamma'(psi_i) . (u_in - u_out) with u_* the unit chord vectors;
    it vanishes exactly when the reflection law holds at every vertex.
    """
    h, h1, h2 = support_batch(kind, q0, q1, ks, ca, cb, psis)
    c = np.cos(psis)
    s = np.sin(psis)
    x = h * c - h1 * s
    y = h * s + h1 * c
    dx = np.roll(x, -1) - x
    dy = np.roll(y, -1) - y
    ell = np.hypot(dx, dy)
    ux = dx / ell
    uy = dy / ell
    speed = h + h2
    tx = -s * speed
    ty = c * speed
    grad[:] = tx * (np.roll(ux, 1) - ux) + ty * (np.roll(uy, 1) - uy)
    return float(np.sum(ell))
