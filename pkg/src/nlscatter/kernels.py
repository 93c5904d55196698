"""Backend selection for the hot loops.

The compiled extension ``nlscatter._kernels`` is used when it imports;
otherwise (or when ``NLSCATTER_PURE_PYTHON=1``) the numpy fallback is used.
Both expose ``phase_multiply``, ``masked_mass`` and ``weighted_mass`` on flat
contiguous arrays. ``BACKEND`` names the active one.
"""

import os

from nlscatter import _kernels_py

_python = _kernels_py

if os.environ.get("NLSCATTER_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from nlscatter import _kernels as _compiled
    except ImportError:
        _compiled = None

_active = _compiled if _compiled is not None else _python
BACKEND = "cython" if _compiled is not None else "python"

phase_multiply = _active.phase_multiply
masked_mass = _active.masked_mass
weighted_mass = _active.weighted_mass


def backends():
    """Available backend modules keyed by name (the fallback is always present)."""
    out = {"python": _python}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
