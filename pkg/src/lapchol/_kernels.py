"""Backend selection for the hot kernels.

Two instances of :mod:`lapchol._kernel_impl` are kept: the plain import
runs as pure Python over numpy arrays, a second instance has its module
globals rebound to ``numba.njit``-compiled versions so that cross-kernel
calls dispatch to compiled code.  Both produce bit-identical results.

The compiled backend is the default whenever numba imports successfully;
set ``LAPCHOL_NUMBA=0`` in the environment to force the pure path.
"""

import importlib.util
import os

from . import _kernel_impl as py

_IMPL_MODULE = "lapchol._kernel_impl"


def _load_jit():
    spec = importlib.util.find_spec(_IMPL_MODULE)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    from numba import njit

    for name in mod.JIT_KERNELS:
        setattr(mod, name, njit(cache=True)(getattr(mod, name)))
    return mod


_env = os.environ.get("LAPCHOL_NUMBA", "").strip().lower()
NUMBA_DISABLED = _env in {"0", "false", "no", "off"}

jit = None
if not NUMBA_DISABLED:
    try:
        jit = _load_jit()
    except ImportError:
        jit = None

NUMBA_ENABLED = jit is not None
active = jit if NUMBA_ENABLED else py


def _state_of_pure(state):
    # Pure mode carries RNG state as a Python int so that the masked
    # 64-bit arithmetic in the kernels never touches numpy scalar overflow.
    return int(state[0])


py._state_of = _state_of_pure


def get_backend(name="auto"):
    """Resolve a backend by name: "auto", "numba", or "numpy"."""
    if name in (None, "auto"):
        return active
    if name == "numba":
        if jit is None:
            raise RuntimeError("numba backend unavailable "
                               "(not installed or disabled by LAPCHOL_NUMBA=0)")
        return jit
    if name == "numpy":
        return py
    raise ValueError(f"unknown backend {name!r}")


def backend_name(backend=None):
    b = active if backend is None else backend
    return "numba" if b is jit and jit is not None else "numpy"
