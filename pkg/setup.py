"""Build the optional Cython kernels.

The package works without them: ``darkcorpus._backend`` falls back to the
numpy implementation when the extension is missing. Set
``DARKCORPUS_NO_EXT=1`` to skip compilation entirely.
"""
import os
import sys

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("DARKCORPUS_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        print("Cython/numpy unavailable; installing pure-Python backend only", file=sys.stderr)
        return []
    ext = Extension(
        "darkcorpus._kernels",
        ["src/darkcorpus/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3, compiler_directives={"boundscheck": False, "wraparound": False})


setup(ext_modules=_extensions())
