import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "depparse.kernels._ckernels",
                ["src/depparse/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    # No Cython available: install pure-Python only, the kernels package
    # falls back to its numpy implementations at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
