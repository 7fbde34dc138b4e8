import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from junta_probe import kernels
from junta_probe.kernels import available_backends, get_backend

BACKENDS = available_backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("fortran")


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi_matches_numpy(name):
    rng = np.random.default_rng(0)
    for m in (1, 2, 7, 20):
        B = rng.standard_normal((m, m))
        A = (B + B.T) / 2
        w, V, sweeps = get_backend(name).jacobi_eigh(A)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-10)
        assert np.allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)


@pytest.mark.parametrize("name", BACKENDS)
def test_nearest_first_index_wins_ties(name):
    net = np.array([[0.0], [1.0], [2.0]])
    idx = get_backend(name).nearest_index(net, np.array([[0.5], [1.5], [-3.0], [1.9]]))
    assert idx.tolist() == [0, 1, 0, 2]


@pytest.mark.parametrize("name", BACKENDS)
def test_greedy_packing_respects_separation(name):
    rng = np.random.default_rng(1)
    C = rng.uniform(-1, 1, (400, 2))
    keep = get_backend(name).greedy_packing(C, 0.2)
    P = C[keep]
    d = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(len(P)) * 10
    assert d.min() >= 0.2
    assert keep[0] == 0 and np.all(np.diff(keep) > 0)
    # maximality: every candidate is within sep of a kept point
    dc = np.linalg.norm(C[:, None] - P[None], axis=2)
    assert np.all(dc.min(axis=1) < 0.2)


needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")


@needs_both
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-5, 5)))
def test_backends_agree_on_jacobi(a):
    A = (a + a.T) / 2
    py, cy = get_backend("python"), get_backend("cython")
    w1, V1, s1 = py.jacobi_eigh(A)
    w2, V2, s2 = cy.jacobi_eigh(A)
    assert s1 == s2
    assert np.allclose(w1, w2, atol=1e-12 * max(1.0, np.abs(A).max()))


@needs_both
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (30, 2), elements=st.floats(-3, 3)),
       arrays(np.float64, (50, 2), elements=st.floats(-4, 4)))
def test_backends_agree_on_nearest(net, q):
    assert np.array_equal(get_backend("python").nearest_index(net, q),
                          get_backend("cython").nearest_index(net, q))


@needs_both
@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (60, 2), elements=st.floats(-3, 3)), st.floats(0.01, 2.0))
def test_backends_agree_on_packing(c, sep):
    assert np.array_equal(get_backend("python").greedy_packing(c, sep),
                          get_backend("cython").greedy_packing(c, sep))
