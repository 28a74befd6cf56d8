import os

from setuptools import setup

ext_modules = []
if os.environ.get("UAVPOS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/uavpos/_kernels/_ckern.pyx"],
            language_level=3,
        )
    except ImportError:
        # Pure-Python fallback kernels are picked up at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
