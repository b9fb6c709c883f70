"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; otherwise the numpy
versions are bound. Set ``AQUANET_KERNELS=python`` to force the fallback,
or call :func:`use` at runtime (tests and the benchmark do this).
"""

import logging
import os

from . import _python

log = logging.getLogger(__name__)

try:
    from . import _ckernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_FUNCS = (
    "lstm_gates_forward",
    "lstm_gates_backward",
    "causal_conv_forward",
    "causal_conv_backward",
    "rank_auc",
)

BACKEND = "python"


def available():
    """Names of the backends importable in this environment."""
    return ["cython", "python"] if _compiled is not None else ["python"]


def use(name):
    """Rebind the module-level kernel functions to backend ``name``."""
    global BACKEND
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        mod = _compiled
    elif name == "python":
        mod = _python
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    g = globals()
    for fn in _FUNCS:
        g[fn] = getattr(mod, fn)
    BACKEND = name


def backend_module(name):
    return _compiled if name == "cython" else _python


_requested = os.environ.get("AQUANET_KERNELS", "").strip().lower()
if _requested == "python" or _compiled is None:
    if _requested == "cython":
        log.warning("AQUANET_KERNELS=cython but the extension is missing; using numpy kernels")
    use("python")
else:
    use("cython")
