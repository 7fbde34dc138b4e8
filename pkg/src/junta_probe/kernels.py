"""Backend selection for the hot kernels.

The compiled extension is used when it imports cleanly; otherwise the
pure-Python module is used. Setting ``JUNTA_PROBE_PURE_PYTHON=1`` forces
the fallback (handy for debugging and for the backend comparison tests).
"""
import os

from . import _pykernels

_compiled = None
if os.environ.get("JUNTA_PROBE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    return _impl.jacobi_eigh(a, tol, max_sweeps)


def nearest_index(net, queries):
    return _impl.nearest_index(net, queries)


def greedy_packing(candidates, sep):
    return _impl.greedy_packing(candidates, sep)
