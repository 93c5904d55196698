import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nlscatter import _kernels_py, kernels

BACKENDS = kernels.backends()

floats = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_fallback_is_always_available():
    assert BACKENDS["python"] is _kernels_py
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_phase_multiply(name):
    rng = np.random.default_rng(1)
    z = rng.normal(size=257) + 1j * rng.normal(size=257)
    th = rng.normal(size=257)
    want = z * np.exp(-0.7j * th)
    BACKENDS[name].phase_multiply(z, th, -0.7)
    np.testing.assert_allclose(z, want, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_shape_mismatch(name):
    with pytest.raises(ValueError):
        BACKENDS[name].weighted_mass(np.zeros(4, complex), np.zeros(3))
    with pytest.raises(ValueError):
        BACKENDS[name].masked_mass(np.zeros(4, complex), np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        BACKENDS[name].phase_multiply(np.zeros(4, complex), np.zeros(3), 1.0)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 200), elements=floats),
       arrays(np.float64, st.integers(1, 200), elements=floats),
       st.floats(0, 1e3))
def test_backends_agree(re, r, radius):
    n = min(len(re), len(r))
    z = re[:n] + 0.5j * re[::-1][:n]
    rr = np.abs(r[:n])
    res = {k: (m.masked_mass(z.copy(), rr, radius), m.weighted_mass(z.copy(), rr))
           for k, m in BACKENDS.items()}
    ref = res["python"]
    for (inside, total), w in res.values():
        assert inside == pytest.approx(ref[0][0], rel=1e-12, abs=1e-300)
        assert total == pytest.approx(ref[0][1], rel=1e-12, abs=1e-300)
        assert w == pytest.approx(ref[1], rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 100), elements=floats), st.floats(-50, 50))
def test_phase_multiply_preserves_modulus(th, scale):
    for m in BACKENDS.values():
        z = np.ones(len(th), complex)
        m.phase_multiply(z, th, scale)
        np.testing.assert_allclose(np.abs(z), 1.0, rtol=1e-14)


def test_env_forces_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, NLSCATTER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import nlscatter; print(nlscatter.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
