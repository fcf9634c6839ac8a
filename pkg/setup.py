"""Build the optional compiled kernels.

The package works without them; ``fou_sheet._backend`` falls back to the
NumPy implementations when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FOU_SHEET_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "fou_sheet._kernels_c",
                    ["src/fou_sheet/_kernels_c.pyx"],
                    include_dirs=[np.get_include()],
                    # no contraction or fast-math: the double-double arithmetic
                    # needs exact IEEE rounding, and results must match the
                    # NumPy fallback bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
