"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure-numpy fallback is selected at
import time), so a failed compile downgrades to a warning instead of an error.
"""
import sys

from setuptools import setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"advped: skipping compiled kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "advped.nn._kernels",
        sources=["src/advped/nn/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


try:
    setup(ext_modules=_extensions())
except SystemExit:
    print("advped: extension build failed, installing pure-python fallback",
          file=sys.stderr)
    setup(ext_modules=[])
