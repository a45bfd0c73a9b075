"""Select the Fock right-hand-side kernel at import.

The compiled extension is used when it is built and ``DOUBLELAMBDA_PURE_PYTHON``
is unset; otherwise the NumPy implementation is used.
"""
from __future__ import annotations

import os

from . import _fock_numpy

numpy_master_rhs = _fock_numpy.master_rhs

compiled_master_rhs = None
if not os.environ.get("DOUBLELAMBDA_PURE_PYTHON"):
    try:
        from ._fock_kernel import master_rhs as compiled_master_rhs
    except ImportError:  # extension not built
        compiled_master_rhs = None

if compiled_master_rhs is not None:
    master_rhs = compiled_master_rhs
    BACKEND = "compiled"
else:
    master_rhs = numpy_master_rhs
    BACKEND = "numpy"
