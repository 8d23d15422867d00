"""Build the optional Cython kernels; the package works without them."""
import os
import sys

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("WANDERING_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("Cython/numpy unavailable: installing the pure-Python kernels only\n")
        return []
    ext = Extension(
        "wandering._ckernels",
        ["src/wandering/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
