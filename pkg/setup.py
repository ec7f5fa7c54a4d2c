"""Build the optional compiled sweep kernel; the package runs without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ECODRIVE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "ecodrive._ckernel",
                    ["src/ecodrive/_ckernel.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
