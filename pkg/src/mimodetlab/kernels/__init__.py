"""Kernel implementation selection.

The compiled extension is preferred when present; set MIMODETLAB_PURE=1
to force the pure-Python kernels (same contracts, same orderings).
"""

import os

if os.environ.get("MIMODETLAB_PURE"):
    from . import pure as _impl
    HAVE_COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        HAVE_COMPILED = True
    except ImportError:
        from . import pure as _impl
        HAVE_COMPILED = False

IMPLEMENTATION = _impl.IMPLEMENTATION
clll_kernel = _impl.clll_kernel
sphere_search = _impl.sphere_search
round_gaussian = _impl.round_gaussian
