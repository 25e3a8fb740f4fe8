"""Kernel backend selection.

Imports the compiled stepping core when available and falls back to the
pure-Python twin otherwise. ``MIDIODE_BACKEND=python`` forces the fallback,
``MIDIODE_BACKEND=compiled`` refuses to fall back. The selected module is
exposed as the attribute ``kernel``; consumer modules bind it once at
import, so tests that switch backends in-process rebind ``kernel`` both
here and in the consumer modules (see tests/conftest.py).
"""

import os

from . import _pykernels

_forced = os.environ.get("MIDIODE_BACKEND", "").strip().lower()

if _forced == "python":
    kernel = _pykernels
elif _forced == "compiled":
    from . import _core as kernel  # noqa: F401  (ImportError is the contract)
else:
    try:
        from . import _core as kernel
    except ImportError:
        kernel = _pykernels


def backend_name():
    """Name of the active stepping backend ("compiled" or "python")."""
    return kernel.BACKEND_NAME
