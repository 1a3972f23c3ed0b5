"""Build the optional compiled residual kernel.

The package is fully functional without the extension (a vectorized numpy
twin is selected at import time), so a failed compile must not fail the
install: we attempt the Cython build and fall back to a pure-Python wheel.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "memsq._kernels._residual",
                ["src/memsq/_kernels/_residual.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    warnings.warn(f"compiled kernel skipped ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
