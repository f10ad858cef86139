# Build in place for development: pip install -e . --no-build-isolation
import os

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    # the package still works through the numpy fallback kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "spcanet._ckernels",
                ["src/spcanet/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

if os.environ.get("SPCANET_NO_EXT"):
    ext_modules = []

setup(ext_modules=ext_modules)
