"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CECHLAB_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python implementations are used. Both expose the same
functions, and ``set_backend`` switches between them at run time.
"""
import contextlib
import os

from . import _pykernels

_EXPORTS = ("neighbor_graph", "cech_enumerate", "miniball", "circumsphere_local",
            "face_indices", "transpose_incidence", "gf2_reduce", "gf2_reduce_csr")

BARY_TOL = _pykernels.BARY_TOL
SV_CUTOFF = _pykernels.SV_CUTOFF
BALL_TOL = _pykernels.BALL_TOL


def backends():
    """Available kernel modules keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def set_backend(name: str) -> str:
    """Route every kernel call to backend ``name`` ("cython" or "python"); returns the previous one."""
    global BACKEND
    avail = backends()
    if name not in avail:
        raise ValueError(f"kernel backend {name!r} unavailable (have {sorted(avail)})")
    prev = globals().get("BACKEND")
    impl = avail[name]
    for fn in _EXPORTS:
        globals()[fn] = getattr(impl, fn)
    BACKEND = name
    return prev


@contextlib.contextmanager
def using(name: str):
    prev = set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


_force_python = os.environ.get("CECHLAB_PURE_PYTHON", "") not in ("", "0")
set_backend("python" if _force_python or "cython" not in backends() else "cython")
