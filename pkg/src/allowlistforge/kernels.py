"""Backend selection for the hot loops.

The compiled ``_speedups`` extension is used when it was built; otherwise
the pure-Python ``_purepy`` module is used. Setting the environment
variable ``ALLOWLISTFORGE_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _purepy

pure = _purepy

if os.environ.get("ALLOWLISTFORGE_PURE", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _speedups as compiled
    except ImportError:
        compiled = None

backend = compiled if compiled is not None else _purepy
BACKEND = "compiled" if compiled is not None else "pure"

IN_APP = _purepy.IN_APP
OBFUSCATED = _purepy.OBFUSCATED
LIBRARY = _purepy.LIBRARY
OTHER = _purepy.OTHER
MALFORMED = _purepy.MALFORMED

prune_covered = backend.prune_covered
is_covered = backend.is_covered
covered_mask = backend.covered_mask
classify_one = backend.classify_one
classify_many = backend.classify_many
field_stats = backend.field_stats
