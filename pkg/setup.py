"""Build script for the compiled pairwise-summation kernels.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-numpy kernels in
``coopdipole._kernels._fallback``.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    openmp_args = ["-fopenmp"] if sys.platform.startswith("linux") else []
    ext = Extension(
        "coopdipole._kernels._pairsum",
        ["src/coopdipole/_kernels/_pairsum.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"] + openmp_args,
        extra_link_args=openmp_args,
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": 3})
except ImportError:
    pass

setup(ext_modules=ext_modules)
