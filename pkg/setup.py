"""Build script for the optional compiled kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes training faster.
"""

from setuptools import Extension, setup


def make_extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "telegraphnn._speedups",
                ["src/telegraphnn/_speedups.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-march=native"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=make_extensions())
