"""Kernel backend chosen at import time.

The compiled extension is preferred; ``SFE_IDS_PURE_PYTHON=1`` forces the
numpy implementation.  Both produce identical trees.
"""
import logging
import os

from . import _splitter_py

log = logging.getLogger(__name__)

try:
    from . import _splitter as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("SFE_IDS_PURE_PYTHON"):
    kernels = _compiled
    BACKEND = "compiled"
else:
    kernels = _splitter_py
    BACKEND = "python"


def get_kernels(name: str | None = None):
    """Kernel module by name ("compiled" or "python"); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _splitter_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])
