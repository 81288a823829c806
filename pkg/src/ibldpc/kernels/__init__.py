"""Decode kernel backend selection.

The compiled Cython extension is preferred; the pure-numpy reference backend
is the fallback and the semantics ground truth. Set IBLDPC_BACKEND=py (or
=c) to force a choice.
"""

import os

from . import reference

backend = reference
backend_name = "reference"

_want = os.environ.get("IBLDPC_BACKEND", "auto").lower()
if _want in ("auto", "c"):
    try:
        from . import _core as _compiled
        backend = _compiled
        backend_name = "compiled"
    except ImportError:
        if _want == "c":
            raise


def use(name: str):
    """Switch backend at runtime ('compiled'/'c' or 'reference'/'py')."""
    global backend, backend_name
    if name in ("reference", "py"):
        backend, backend_name = reference, "reference"
    elif name in ("compiled", "c"):
        from . import _core as _compiled
        backend, backend_name = _compiled, "compiled"
    else:
        raise ValueError(name)
    return backend
