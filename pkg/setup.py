"""Build script: compiles the optional fast-kernel extension when Cython and a
C toolchain are available.  A failed or skipped extension build still yields a
fully working install; podium._kernels falls back to the pure-Python kernels.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PODIUM_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "podium._kernels._ckernels",
                    ["src/podium/_kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
