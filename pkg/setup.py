"""Build hook for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile must not break installation.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "wordmotion._kernels._core",
                ["src/wordmotion/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
