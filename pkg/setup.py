"""Build script: compiles the hot-path kernels as a Cython extension.

The extension is optional. If it cannot be built (no compiler, no Cython)
the package installs anyway and falls back to the numpy kernel lane at
import time. `-ffp-contract=off` keeps the compiled arithmetic bit-identical
to the numpy lane so the two can be cross-checked exactly.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "vhap._native",
                sources=["src/vhap/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
