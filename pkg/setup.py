"""Build script for the optional compiled kernels.

The package is fully functional without the extension; bidbg.kernels falls
back to the numpy implementation when the import fails.  Build in place with:

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists("src/bidbg/_speedups.pyx"):
    extensions = cythonize(
        [Extension("bidbg._speedups", ["src/bidbg/_speedups.pyx"])],
        compiler_directives={"language_level": 3},
    )
else:
    extensions = []

setup(ext_modules=extensions)
