"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``RMT_PURE_PYTHON=1`` in the environment to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("RMT_PURE_PYTHON", "").strip() not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _core
    except ImportError:
        return _fallback, "python"
    return _core, "compiled"


kernels, name = _load()


def get(backend: str | None = None) -> ModuleType:
    """Return the kernel module for ``backend`` ('compiled', 'python' or None for the active one)."""
    if backend is None:
        return kernels
    if backend == "python":
        return _fallback
    if backend == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {backend!r}")


def available() -> list[str]:
    """Names of the backends importable in this environment."""
    out = ["python"]
    try:
        from . import _core  # noqa: F401
    except ImportError:
        return out
    return ["compiled", *out]
