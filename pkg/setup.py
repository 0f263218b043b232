"""Build script: compiles the optional Cython edit-distance core.

The package works without the extension (a pure-Python twin is selected at
import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "parasphere.metrics._editcore",
                ["src/parasphere/metrics/_editcore.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
