"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure NumPy lane is
selected at import time); building it just makes the hot loops faster:

    python setup.py build_ext --inplace

or simply `pip install -e . --no-build-isolation`, which attempts the build
and falls back to the pure-Python lane if Cython or a C compiler is missing.
"""

from setuptools import Extension, setup

ext_modules = []
include_dirs = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "heislab._kernels._core",
        ["src/heislab/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
