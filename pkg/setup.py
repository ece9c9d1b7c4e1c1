"""Builds the optional Cython kernels; metadata lives in pyproject.toml.

Without Cython or a compiler the package installs pure-Python and uses the
numpy fallback in ``nonlocality._pykernels``.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("NONLOCALITY_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "nonlocality._ckernels",
                    [os.path.join("src", "nonlocality", "_ckernels.pyx")],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
