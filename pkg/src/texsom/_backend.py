"""Select the kernel implementation at import time.

The compiled extension is used when it was built; set ``TEXSOM_PURE_PYTHON=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None

if not os.environ.get("TEXSOM_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if kernels is compiled_kernels else "python"
