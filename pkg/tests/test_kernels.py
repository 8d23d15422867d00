import numpy as np
import pytest

from wandering import _kernels_py, kernels
from wandering.evaluator import frame

compiled = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="extension not built")


def _case(seq, k=30, n=512):
    fr = frame(seq, k, -1.0, 1.0, 1e-12, 0.0)
    t = np.linspace(0, 2 * np.pi, n, endpoint=False) + 0.01   # off the zeros
    return 0.4 * np.sin(3 * t) + 1j * t, fr


@compiled
def test_factor_sum_agrees(seed):
    lw, fr = _case(seed)
    a = _kernels_py.factor_sum(lw, fr.shift, fr.mult, fr.below)
    b = kernels.BACKENDS["cython"].factor_sum(lw, fr.shift, fr.mult, fr.below)
    np.testing.assert_allclose(np.asarray(b), a, rtol=1e-13, atol=1e-13)


@compiled
def test_logderiv_sum_agrees(seed):
    lw, fr = _case(seed)
    ga, da = _kernels_py.logderiv_sum(lw, fr.shift, fr.mult, fr.below)
    gb, db = kernels.BACKENDS["cython"].logderiv_sum(lw, fr.shift, fr.mult, fr.below)
    np.testing.assert_allclose(np.asarray(gb), ga, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(np.asarray(db), da, rtol=1e-12, atol=1e-12)


def test_use_backend_roundtrip():
    prev = kernels.use_backend("python")
    assert kernels.backend_name() == "python"
    kernels.use_backend(prev)
    assert kernels.backend_name() == prev
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")
