import numpy
from Cython.Build import cythonize
from setuptools import setup
from setuptools.extension import Extension

# The compiled kernels are an optional speedup; the package falls back to
# the numpy implementation if the extension is missing.
extensions = [
    Extension(
        "ossmentor._kernels._fast",
        ["src/ossmentor/_kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    ),
]

setup(ext_modules=cythonize(extensions, language_level=3))
