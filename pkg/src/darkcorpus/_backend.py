"""Pick the compiled kernels when available, else the numpy fallback.

``DARKCORPUS_BACKEND=numpy`` forces the fallback.
"""

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("DARKCORPUS_BACKEND", "").lower() in ("numpy", "python", "fallback"):
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        log.debug("compiled kernels unavailable, using numpy fallback")
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND
