import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from avprec import kernels
from avprec.kernels import available_backends

BACKENDS = available_backends()


def test_python_backend_always_present():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
@given(st.sampled_from([1, 2]), st.sampled_from([1, 3, 7, 15, 31]), st.floats(0, 5000), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_backends_agree(dim, n1d, shift, seed):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    r = np.random.default_rng(seed)
    n = n1d ** dim
    v = r.standard_normal(n)
    inv_h2 = float((n1d + 1) ** 2)
    a = py.apply_stencil(v, n1d, dim, inv_h2, shift)
    b = cy.apply_stencil(v, n1d, dim, inv_h2, shift)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13 * np.max(np.abs(a)))
    if n1d >= 3:
        np.testing.assert_allclose(py.restrict(v, n1d, dim), cy.restrict(v, n1d, dim), rtol=1e-14, atol=1e-14)
    nf = n1d
    vc = r.standard_normal(((nf + 1) // 2 - 1) ** dim) if nf >= 3 else None
    if vc is not None and vc.size:
        nc = (nf + 1) // 2 - 1
        np.testing.assert_allclose(py.prolong(vc, nc, dim), cy.prolong(vc, nc, dim), rtol=1e-14, atol=1e-14)


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("AVPREC_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("AVPREC_PURE_PYTHON")
        importlib.reload(kernels)
