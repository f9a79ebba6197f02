"""Runtime selection of the sweep kernels.

Two implementations of the solver sweep exist: numba-jitted loops (fast) and
pure-numpy array code (always available).  Selection order:

1. an explicit ``backend=`` argument at the call site,
2. the ``HJPLATOON_BACKEND`` environment variable (``numba``, ``numpy`` or
   ``auto``),
3. ``numba`` when importable, else ``numpy``.

``HJPLATOON_WORKERS`` caps the numba thread count; 0 or unset means
auto-detect.
"""

from __future__ import annotations

import os

ENV_BACKEND = "HJPLATOON_BACKEND"
ENV_WORKERS = "HJPLATOON_WORKERS"

_numba_ok: bool | None = None


def numba_available() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def select_backend(backend: str | None = None) -> str:
    """Resolve a backend name to 'numba' or 'numpy'."""
    choice = backend or os.environ.get(ENV_BACKEND, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if numba_available() else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not numba_available():
            raise RuntimeError(
                "numba backend requested but numba is not importable; "
                f"set {ENV_BACKEND}=numpy or install numba"
            )
        return "numba"
    raise ValueError(f"unknown backend {choice!r} (expected numba, numpy or auto)")


def apply_worker_limit() -> None:
    """Apply the HJPLATOON_WORKERS override to numba's thread pool."""
    raw = os.environ.get(ENV_WORKERS, "").strip()
    if not raw or not numba_available():
        return
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ValueError(f"{ENV_WORKERS} must be >= 0, got {n}")
    if n > 0:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
