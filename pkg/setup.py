"""Build the optional compiled stepping core.

Without Cython (or a compiler) the package installs without the extension and
falls back to the numpy stepper at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("EITFWM_NO_EXTENSION") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "eitfwm._mbcore",
                    ["src/eitfwm/_mbcore.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
