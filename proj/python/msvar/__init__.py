"""Mixed-frequency structural VAR toolkit (bindings for the C++ core)."""

try:
    from ._msvar import *  # noqa: F401,F403  (installed layout)
    from ._msvar import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension lives next to the build
    import os
    import sys

    _ext_dir = os.environ.get("MSVAR_EXT_DIR")
    if not _ext_dir:
        raise
    if _ext_dir not in sys.path:
        sys.path.insert(0, _ext_dir)
    from _msvar import *  # noqa: F401,F403
    from _msvar import __version__  # noqa: F401
