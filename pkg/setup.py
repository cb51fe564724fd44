"""Build script: compiles the optional Cython propagation kernel.

If the extension fails to build (no compiler, no Cython), the package still
works through the pure-Python kernel in lzsweep._kernel._pykernel; the
extension is selected at import time when present.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "lzsweep._kernel._cykernel",
                ["src/lzsweep/_kernel/_cykernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
