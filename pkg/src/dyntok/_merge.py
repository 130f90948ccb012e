"""Kernel selection: compiled extension when present, pure Python otherwise.

Set ``DYNTOK_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the kernel-parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("DYNTOK_PURE_PYTHON"):
    from . import _merge_py as _impl
else:
    try:
        from . import _merge_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _merge_py as _impl

run_merges = _impl.run_merges
KERNEL_NAME: str = _impl.KERNEL_NAME
