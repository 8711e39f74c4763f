# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerics kernels; API identical to porism._kernels_py.

Hot loops live here: support evaluation, closed-form and root-finding
reflections, bulk map iteration for rotation numbers, and the perimeter
gradient used by the variational orbit solver.
"""

from libc.math cimport atan2, cos, fabs, hypot, sin, sqrt, M_PI

import numpy as np

BACKEND = "cython"

OK = 0
MISSES = 1
TANGENT = 2
NO_INTERSECT = 3

GRAZE_TOL = 1e-8

cdef int _OK = 0
cdef int _MISSES = 1
cdef int _TANGENT = 2
cdef int _NO_INTERSECT = 3

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double _GRAZE = 1e-8
cdef int _BISECT_STEPS = 64


cdef inline double _wrap2pi(double x) noexcept nogil:
    cdef double y = x - TWO_PI * <long long>(x / TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return y


cdef inline void _support(int kind, double q0, double q1,
                          const double[::1] ks, const double[::1] ca, const double[::1] cb,
                          double psi, double* h, double* h1, double* h2) noexcept nogil:
    cdef double dd, c, s, u, up, upp, hv, k
    cdef Py_ssize_t i
    if kind == 0:
        dd = q0 * q0 - q1 * q1
        c = cos(psi)
        s = sin(psi)
        u = q1 * q1 + dd * c * c
        up = -2.0 * dd * s * c
        upp = -2.0 * dd * (c * c - s * s)
        hv = sqrt(u)
        h[0] = hv
        h1[0] = 0.5 * up / hv
        h2[0] = 0.5 * upp / hv - 0.25 * up * up / (u * hv)
        return
    hv = q0
    up = 0.0
    upp = 0.0
    for i in range(ks.shape[0]):
        k = ks[i]
        c = cos(k * psi)
        s = sin(k * psi)
        hv += ca[i] * c + cb[i] * s
        up += k * (cb[i] * c - ca[i] * s)
        upp -= k * k * (ca[i] * c + cb[i] * s)
    h[0] = hv
    h1[0] = up
    h2[0] = upp


def support_eval(int kind, double q0, double q1,
                 const double[::1] ks, const double[::1] ca, const double[::1] cb,
                 double psi):
    """Support function value and first two derivatives at one angle."""
    cdef double h, h1, h2
    _support(kind, q0, q1, ks, ca, cb, psi, &h, &h1, &h2)
    return h, h1, h2


def support_batch(int kind, double q0, double q1,
                  const double[::1] ks, const double[::1] ca, const double[::1] cb,
                  psis):
    """Vectorized support_eval; returns (h, h', h'') arrays."""
    cdef const double[::1] p = np.ascontiguousarray(psis, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    h_arr = np.empty(m)
    h1_arr = np.empty(m)
    h2_arr = np.empty(m)
    cdef double[::1] h = h_arr
    cdef double[::1] h1 = h1_arr
    cdef double[::1] h2 = h2_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            _support(kind, q0, q1, ks, ca, cb, p[i], &h[i], &h1[i], &h2[i])
    return h_arr, h1_arr, h2_arr


cdef int _reflect(int kind, double q0, double q1,
                  const double[::1] ks, const double[::1] ca, const double[::1] cb,
                  double p, double phi, bint rootfind,
                  double* p2, double* phi2, double* psi_out, double* delta_out) noexcept nogil:
    cdef double h_f, h_b, t1, t2
    cdef double c1, s1, ia, ib, qa, qb, qc, disc, sq, s_exit, mx, my, psi, delta
    cdef double lo, hi, mid, f, h, h1
    cdef int it

    _support(kind, q0, q1, ks, ca, cb, phi, &h_f, &t1, &t2)
    _support(kind, q0, q1, ks, ca, cb, phi + M_PI, &h_b, &t1, &t2)
    if p >= h_f or p <= -h_b:
        return _MISSES

    if kind == 0 and not rootfind:
        c1 = cos(phi)
        s1 = sin(phi)
        ia = 1.0 / (q0 * q0)
        ib = 1.0 / (q1 * q1)
        qa = s1 * s1 * ia + c1 * c1 * ib
        qb = 2.0 * p * c1 * s1 * (ib - ia)
        qc = p * p * (c1 * c1 * ia + s1 * s1 * ib) - 1.0
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            disc = 0.0
        sq = sqrt(disc)
        if qb <= 0.0:
            s_exit = (-qb + sq) / (2.0 * qa)
        else:
            s_exit = 2.0 * qc / (-qb - sq)
        mx = p * c1 - s_exit * s1
        my = p * s1 + s_exit * c1
        psi = atan2(my * ib, mx * ia)
        delta = _wrap2pi(psi - phi)
        if delta > M_PI:
            return _TANGENT
        if delta < _GRAZE or delta > M_PI - _GRAZE:
            return _TANGENT
    else:
        # F(u) = h(phi+u) cos u - h'(phi+u) sin u - p is strictly decreasing
        # on (0, pi); bisect to the unique root.
        lo = 0.0
        hi = M_PI
        if h_f - p <= 0.0 or -h_b - p >= 0.0:
            return _NO_INTERSECT
        for it in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            _support(kind, q0, q1, ks, ca, cb, phi + mid, &h, &h1, &t2)
            f = h * cos(mid) - h1 * sin(mid) - p
            if f > 0.0:
                lo = mid
            else:
                hi = mid
        delta = 0.5 * (lo + hi)
        if delta < _GRAZE or delta > M_PI - _GRAZE:
            return _TANGENT
        psi = phi + delta
        _support(kind, q0, q1, ks, ca, cb, psi, &h, &h1, &t2)
        c1 = cos(psi)
        s1 = sin(psi)
        mx = h * c1 - h1 * s1
        my = h * s1 + h1 * c1

    phi2[0] = _wrap2pi(psi + delta)
    p2[0] = mx * cos(phi2[0]) + my * sin(phi2[0])
    psi_out[0] = _wrap2pi(psi)
    delta_out[0] = delta
    return _OK


def reflect_line(int kind, double q0, double q1,
                 const double[::1] ks, const double[::1] ca, const double[::1] cb,
                 double p, double phi, bint rootfind):
    """Billiard map on oriented lines; returns (status, p2, phi2, psi, delta)."""
    cdef double p2 = 0.0, phi2 = 0.0, psi = 0.0, delta = 0.0
    cdef int status
    status = _reflect(kind, q0, q1, ks, ca, cb, p, phi, rootfind, &p2, &phi2, &psi, &delta)
    if status != OK:
        return (status, 0.0, 0.0, 0.0, 0.0)
    return (OK, p2, phi2, psi, delta)


def iterate_line(int kind, double q0, double q1,
                 const double[::1] ks, const double[::1] ca, const double[::1] cb,
                 double p, double phi, long nsteps, bint rootfind):
    """Iterate the map nsteps+1 times, accumulating the normal-angle advance."""
    cdef double p2 = 0.0, phi2 = 0.0, psi = 0.0, delta = 0.0, psi_prev, advance = 0.0
    cdef int status = OK
    cdef long i
    with nogil:
        status = _reflect(kind, q0, q1, ks, ca, cb, p, phi, rootfind, &p2, &phi2, &psi, &delta)
        if status == _OK:
            psi_prev = psi
            for i in range(nsteps):
                p = p2
                phi = phi2
                status = _reflect(kind, q0, q1, ks, ca, cb, p, phi, rootfind,
                                  &p2, &phi2, &psi, &delta)
                if status != _OK:
                    break
                advance += _wrap2pi(psi - psi_prev)
                psi_prev = psi
    if status != OK:
        return (status, 0.0, 0.0, 0.0)
    return (OK, p2, phi2, advance)


def trace_orbit(int kind, double q0, double q1,
                const double[::1] ks, const double[::1] ca, const double[::1] cb,
                double p, double phi, long n, bint rootfind,
                double[::1] psis, double[::1] deltas, double[::1] ps, double[::1] phis):
    """Run n reflections, recording per-vertex and per-side data."""
    cdef double p2 = 0.0, phi2 = 0.0, psi = 0.0, delta = 0.0
    cdef int status = OK
    cdef long i
    with nogil:
        for i in range(n):
            status = _reflect(kind, q0, q1, ks, ca, cb, p, phi, rootfind,
                              &p2, &phi2, &psi, &delta)
            if status != _OK:
                break
            psis[i] = psi
            deltas[i] = delta
            ps[i] = p2
            phis[i] = phi2
            p = p2
            phi = phi2
    if status != OK:
        return (status, 0.0, 0.0)
    return (OK, p2, phi2)


def perimeter(int kind, double q0, double q1,
              const double[::1] ks, const double[::1] ca, const double[::1] cb,
              const double[::1] psis):
    """Perimeter of the polygon inscribed at normal angles psis."""
    cdef Py_ssize_t n = psis.shape[0]
    cdef double total = 0.0
    cdef double h, h1, h2, c, s, x0, y0, xp, yp, xfirst, yfirst
    cdef Py_ssize_t i
    with nogil:
        _support(kind, q0, q1, ks, ca, cb, psis[0], &h, &h1, &h2)
        c = cos(psis[0])
        s = sin(psis[0])
        xfirst = h * c - h1 * s
        yfirst = h * s + h1 * c
        xp = xfirst
        yp = yfirst
        for i in range(1, n):
            _support(kind, q0, q1, ks, ca, cb, psis[i], &h, &h1, &h2)
            c = cos(psis[i])
            s = sin(psis[i])
            x0 = h * c - h1 * s
            y0 = h * s + h1 * c
            total += hypot(x0 - xp, y0 - yp)
            xp = x0
            yp = y0
        total += hypot(xfirst - xp, yfirst - yp)
    return total


def perimeter_grad(int kind, double q0, double q1,
                   const double[::1] ks, const double[::1] ca, const double[::1] cb,
                   const double[::1] psis, double[::1] grad):
    """Perimeter and its gradient with respect to the normal angles."""
    cdef Py_ssize_t n = psis.shape[0]
    x_arr = np.empty(n)
    y_arr = np.empty(n)
    tx_arr = np.empty(n)
    ty_arr = np.empty(n)
    ux_arr = np.empty(n)
    uy_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr
    cdef double[::1] tx = tx_arr
    cdef double[::1] ty = ty_arr
    cdef double[::1] ux = ux_arr
    cdef double[::1] uy = uy_arr
    cdef double h, h1, h2, c, s, dx, dy, ell, total = 0.0
    cdef Py_ssize_t i, j, prev
    with nogil:
        for i in range(n):
            _support(kind, q0, q1, ks, ca, cb, psis[i], &h, &h1, &h2)
            c = cos(psis[i])
            s = sin(psis[i])
            x[i] = h * c - h1 * s
            y[i] = h * s + h1 * c
            tx[i] = -s * (h + h2)
            ty[i] = c * (h + h2)
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            dx = x[j] - x[i]
            dy = y[j] - y[i]
            ell = hypot(dx, dy)
            total += ell
            ux[i] = dx / ell
            uy[i] = dy / ell
        for i in range(n):
            prev = i - 1 if i > 0 else n - 1
            grad[i] = tx[i] * (ux[prev] - ux[i]) + ty[i] * (uy[prev] - uy[i])
    return total
