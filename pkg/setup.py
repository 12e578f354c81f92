"""Build script for the compiled envelope kernel.

The pure-Python twin in ``temposcale.decomposition._envelope_py`` is used
automatically when the extension is unavailable, so a plain
``pip install -e . --no-build-isolation`` without a C compiler still yields a
working package.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build-time only
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "temposcale.decomposition._envelope_cy",
                ["src/temposcale/decomposition/_envelope_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
