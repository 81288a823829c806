"""Build script: compiles the optional Cython decode kernels.

The package works without the extension (a pure-numpy reference backend is
selected at import time), so any build failure here degrades gracefully.
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
                "ibldpc.kernels._core",
                ["src/ibldpc/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"ibldpc: skipping Cython extension build ({exc}); "
          "pure-python kernels will be used")

setup(ext_modules=ext_modules)
