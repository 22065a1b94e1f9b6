"""Build script for the optional Cython kernel core.

The package works without the extension; ``lapconv._accel`` falls back to
the numpy implementation when ``lapconv._core`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LAPCONV_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lapconv._core",
                    ["src/lapconv/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
