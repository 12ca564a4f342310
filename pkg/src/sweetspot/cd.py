"""Coordinate-descent backend selection.

The compiled ``_cd`` extension is used when importable; set
``SWEETSPOT_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

import os

from . import _cd_py

BACKEND = "python"
if os.environ.get("SWEETSPOT_PURE_PYTHON") != "1":
    try:
        from . import _cd as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _cd_py
else:
    _impl = _cd_py

enet_gram = _impl.enet_gram
enet_path_gram = _impl.enet_path_gram
