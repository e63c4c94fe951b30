import numpy
from setuptools import Extension, setup

# The compiled core is optional: singint falls back to the numpy
# implementation in singint._core_py when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "singint._core",
                ["src/singint/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
