import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: rationeval._kernels falls back to the
# pure NumPy implementation when the extension is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rationeval._kernels._core",
                ["src/rationeval/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
