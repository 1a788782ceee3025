"""Selects the compiled kernel module when available, else the pure-Python one.

Set ``PRESTAGE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as pure

compiled = None
if not os.environ.get("PRESTAGE_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

impl = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

EARTH_RADIUS_KM = pure.EARTH_RADIUS_KM
SCHEME_JET = pure.SCHEME_JET
SCHEME_REDBLUE = pure.SCHEME_REDBLUE
SCHEME_GREENRED = pure.SCHEME_GREENRED
SCHEME_GREENRED_DULL = pure.SCHEME_GREENRED_DULL

haversine = impl.haversine
haversine_many = impl.haversine_many
unit_value = impl.unit_value
unit_values = impl.unit_values
rgb = impl.rgb
kml_hex = impl.kml_hex
kml_colors = impl.kml_colors
format_ring = impl.format_ring
