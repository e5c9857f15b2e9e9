"""Build the optional Cython kernel. Without Cython the package falls back to
the pure-Python kernel at import time."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ABSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("absim._kernels", ["src/absim/_kernels.pyx"], libraries=["m"])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
