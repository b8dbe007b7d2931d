"""Backend selection for the Euler walker.

Prefers the compiled extension; falls back to the pure-Python walker when the
extension is missing or when ``JUMPEST_NO_EXT`` is set (used by the backend
benchmark and the cross-backend tests).  Both backends are bit-identical.
"""

import os

if os.environ.get("JUMPEST_NO_EXT"):
    from jumpest._pathkernel_py import euler_walk
    BACKEND = "python"
else:
    try:
        from jumpest._pathkernel import euler_walk  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        from jumpest._pathkernel_py import euler_walk  # type: ignore[no-redef]
        BACKEND = "python"

__all__ = ["euler_walk", "BACKEND"]
