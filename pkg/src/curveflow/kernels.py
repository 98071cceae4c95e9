"""Backend selection for the flow step kernel.

The compiled extension is used when it was built; otherwise the numpy
implementation is imported.  Setting ``CURVEFLOW_PURE_PYTHON=1`` forces the
fallback.
"""
import os

BACKEND = "python"
if os.environ.get("CURVEFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import implicit_step  # noqa: F401
        BACKEND = "compiled"
    except ImportError:
        pass
if BACKEND == "python":
    from ._kernels_py import implicit_step  # noqa: F401,F811

from . import _kernels_py as python_backend  # noqa: E402


def compiled_backend():
    """Return the compiled module, or ``None`` if it is unavailable."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
