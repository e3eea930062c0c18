"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time).  Set ROBUSTBOOST_SKIP_EXT=1 to skip compilation entirely,
e.g. on platforms without a C toolchain.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ROBUSTBOOST_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "robustboost._kernels_cy",
                    ["src/robustboost/_kernels_cy.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
