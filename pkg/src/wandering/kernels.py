"""Backend selection: the compiled kernels when they import, numpy otherwise."""
from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_active = _ckernels if _ckernels is not None else _kernels_py


def backend():
    return _active


def backend_name() -> str:
    return _active.NAME


def use_backend(name: str) -> str:
    """Switch backend ("python" or "cython"); returns the previous name."""
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    prev = _active.NAME
    _active = BACKENDS[name]
    return prev


def factor_sum(log_w, shift, mult, below):
    return _active.factor_sum(log_w, shift, mult, below)


def logderiv_sum(log_w, shift, mult, below):
    return _active.logderiv_sum(log_w, shift, mult, below)


def orbit_layers(table, base0, lw0, max_iter, target, stuck_log):
    return _active.orbit_layers(table, base0, lw0, max_iter, target, stuck_log)
