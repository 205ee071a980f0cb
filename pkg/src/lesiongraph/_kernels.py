"""Pick the compiled graph kernels when available, else the pure-Python ones.

Set ``LESIONGRAPH_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _graphkern_py as python_backend

try:
    if os.environ.get("LESIONGRAPH_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _graphkern as compiled_backend
except ImportError:
    compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

all_pairs_shortest = active.all_pairs_shortest
betweenness = active.betweenness
local_efficiency = active.local_efficiency

__all__ = ["BACKEND", "all_pairs_shortest", "betweenness", "local_efficiency",
           "python_backend", "compiled_backend"]
