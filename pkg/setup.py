"""Build script for the optional compiled merge kernel.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time); building it just makes batch
compression much faster.  `python setup.py build_ext --inplace` works
for development checkouts.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dyntok._merge_cy",
                ["src/dyntok/_merge_cy.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
