"""Hot-kernel backend selection.

The compiled extension is preferred when built; UAVPOS_PURE=1 forces the
pure-Python fallback (used by the parity tests and the benchmark).
"""

import os

from . import pure

if os.environ.get("UAVPOS_PURE") == "1":
    backend = pure
else:
    try:
        from . import _ckern as backend  # type: ignore[no-redef]
    except ImportError:
        backend = pure

BACKEND = backend.NAME
