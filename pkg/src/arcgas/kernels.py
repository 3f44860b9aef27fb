"""Select the compiled sweep kernel, falling back to pure Python.

Set ARCGAS_PURE_PYTHON=1 to force the fallback.
"""

import logging
import os

logger = logging.getLogger(__name__)

if os.environ.get("ARCGAS_PURE_PYTHON"):
    from . import _kernels_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as _impl
        BACKEND = "python"
        logger.info("compiled kernels unavailable; using the pure-Python sweep")

sweep = _impl.sweep
cos_sums = _impl.cos_sums
delta_energy = _impl.delta_energy
