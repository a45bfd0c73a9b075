"""Build hook for the optional compiled Fock-space kernel.

The extension is declared ``optional`` so that a missing compiler or Cython
leaves a working install that runs on the NumPy fallback.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - exercised only without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "doublelambda._fock_kernel",
                ["src/doublelambda/_fock_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
