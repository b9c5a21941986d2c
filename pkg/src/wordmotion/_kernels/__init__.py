"""Backend selection for the numeric kernels.

The compiled extension is preferred when it was built; otherwise the numpy
fallback is used. ``WORDMOTION_KERNELS=python|compiled`` forces a backend
(``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from wordmotion._kernels import _ref

_requested = os.environ.get("WORDMOTION_KERNELS", "").strip().lower()

if _requested not in ("", "compiled", "python"):
    raise ValueError(
        f"WORDMOTION_KERNELS must be 'compiled' or 'python', got {_requested!r}"
    )

if _requested == "python":
    _impl = _ref
else:
    try:
        from wordmotion._kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _ref

BACKEND: str = _impl.BACKEND

window_deltas = _impl.window_deltas
logreg_fit = _impl.logreg_fit


def available_backends() -> dict[str, object]:
    """Importable backend modules keyed by name (for tests and benchmarks)."""
    backends: dict[str, object] = {"python": _ref}
    try:
        from wordmotion._kernels import _core
    except ImportError:
        pass
    else:
        backends["compiled"] = _core
    return backends
