import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def extensions():
    # QDENSE_SKIP_EXT=1 installs the pure-python build; the package falls
    # back to the numpy kernels at import time when the extension is absent.
    if os.environ.get("QDENSE_SKIP_EXT") == "1" or cythonize is None:
        return []
    import numpy

    ext = Extension(
        "qdense._ckernels",
        ["src/qdense/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
