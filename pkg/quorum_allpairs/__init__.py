"""Cyclic quorum systems for shared-nothing all-pairs computation.

The library lives in `quorum_core`; this package adds the pipeline coordinator,
diagnostics and the command line.
"""

from .const import NAME, VERSION

__version__ = VERSION

__all__ = ["NAME", "VERSION", "__version__"]
