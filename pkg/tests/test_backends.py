"""Agreement between the compiled kernels and the pure-Python fallback."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from porism import Ellipse, TrigPoly
from porism import _kernels_py as kpy

kcy = pytest.importorskip("porism._kernels", reason="compiled kernels not built")

TWO_PI = 2.0 * math.pi

CURVES = [
    Ellipse(2.0, 1.0),
    Ellipse(1.3, 1.3),
    TrigPoly(1.0, ((2, 0.01, -0.02), (3, 0.04, 0.01), (5, 0.005, -0.01))),
]


def test_status_codes_match():
    for name in ("OK", "MISSES", "TANGENT", "NO_INTERSECT", "GRAZE_TOL"):
        assert getattr(kcy, name) == getattr(kpy, name)


@pytest.mark.parametrize("curve", CURVES)
def test_support_eval_agreement(curve):
    rng = np.random.default_rng(21)
    for psi in rng.uniform(-10.0, 10.0, 200):
        a = kcy.support_eval(*curve.packed(), psi)
        b = kpy.support_eval(*curve.packed(), psi)
        assert a == pytest.approx(b, abs=1e-15)


@pytest.mark.parametrize("curve", CURVES)
def test_support_batch_agreement(curve):
    psis = np.linspace(0.0, TWO_PI, 512, endpoint=False)
    for a, b in zip(kcy.support_batch(*curve.packed(), psis),
                    kpy.support_batch(*curve.packed(), psis)):
        assert np.max(np.abs(a - b)) < 1e-15


@pytest.mark.parametrize("curve", CURVES)
@pytest.mark.parametrize("rootfind", [False, True])
def test_reflect_agreement(curve, rootfind):
    if rootfind is False and curve.kind != 0:
        pytest.skip("closed form is ellipse-only")
    rng = np.random.default_rng(22)
    for _ in range(200):
        phi = rng.uniform(0.0, TWO_PI)
        h_f, _, _ = curve.support(phi)
        h_b, _, _ = curve.support(phi + math.pi)
        p = rng.uniform(-1.2 * h_b, 1.2 * h_f)  # includes missing lines
        a = kcy.reflect_line(*curve.packed(), p, phi, rootfind)
        b = kpy.reflect_line(*curve.packed(), p, phi, rootfind)
        assert a[0] == b[0]
        if a[0] == kcy.OK:
            assert a[1:] == pytest.approx(b[1:], abs=1e-13)


def test_iterate_agreement():
    # last-bit differences accumulate linearly along the invariant circle,
    # so the tolerance scales with the iteration count
    curve = CURVES[0]
    nsteps = 500
    a = kcy.iterate_line(*curve.packed(), 0.3, 1.0, nsteps, False)
    b = kpy.iterate_line(*curve.packed(), 0.3, 1.0, nsteps, False)
    assert a[0] == b[0] == kcy.OK
    assert a[1:] == pytest.approx(b[1:], abs=nsteps * 1e-13)


def test_trace_agreement():
    curve = CURVES[2]
    out_c = [np.empty(9) for _ in range(4)]
    out_p = [np.empty(9) for _ in range(4)]
    a = kcy.trace_orbit(*curve.packed(), 0.2, 0.7, 9, True, *out_c)
    b = kpy.trace_orbit(*curve.packed(), 0.2, 0.7, 9, True, *out_p)
    assert a[0] == b[0] == kcy.OK
    for x, y in zip(out_c, out_p):
        assert np.max(np.abs(x - y)) < 1e-12


@pytest.mark.parametrize("curve", CURVES)
def test_perimeter_grad_agreement(curve):
    rng = np.random.default_rng(23)
    psis = np.sort(rng.uniform(0.0, TWO_PI, 8))
    ga = np.empty(8)
    gb = np.empty(8)
    pa = kcy.perimeter_grad(*curve.packed(), psis, ga)
    pb = kpy.perimeter_grad(*curve.packed(), psis, gb)
    assert pa == pytest.approx(pb, rel=1e-14)
    assert np.max(np.abs(ga - gb)) < 1e-13
    assert kcy.perimeter(*curve.packed(), psis) == pytest.approx(pa, rel=1e-14)


def test_backend_env_override():
    code = (
        "import porism; import sys; "
        "sys.exit(0 if porism.BACKEND == 'python' else 1)"
    )
    env = dict(os.environ, PORISM_BACKEND="python")
    env["PYTHONPATH"] = os.pathsep.join(
        [os.path.join(os.path.dirname(__file__), "..", "src"),
         env.get("PYTHONPATH", "")])
    assert subprocess.run([sys.executable, "-c", code], env=env).returncode == 0


def test_compiled_backend_active_by_default():
    import porism

    if os.environ.get("PORISM_BACKEND", "") == "python":
        assert porism.BACKEND == "python"
    else:
        assert porism.BACKEND == "cython"
