import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; _backend falls back to numpy
    ext_modules = []
else:
    cflags = ["-O3", "-fcx-limited-range"]
    if os.environ.get("DUALGRASS_NATIVE"):
        cflags.append("-march=native")
    ext_modules = cythonize(
        [Extension("dualgrass._ckernels", ["src/dualgrass/_ckernels.pyx"], extra_compile_args=cflags)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
