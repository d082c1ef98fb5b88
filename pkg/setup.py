import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math: kernel results must be IEEE-reproducible so the compiled and
# pure-Python engines agree bit-for-bit.
ext_modules = [
    Extension(
        "glasspath.engine._kernels",
        ["src/glasspath/engine/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O2"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        ext_modules,
        compiler_directives={"language_level": "3"},
    )
)
