"""Build script: compiles the optional scan/pivot kernels when Cython and a C
compiler are available, otherwise installs pure Python (the package selects the
numpy fallback at import). Set ATOMPURSUIT_PURE_PYTHON=1 to skip the extension
outright."""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("ATOMPURSUIT_PURE_PYTHON") == "1":
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "atompursuit._kernels._scan",
        ["src/atompursuit/_kernels/_scan.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


class OptionalBuildExt(build_ext):
    """Degrade to the pure-Python install if compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            print("skipping compiled kernels (%s); using numpy fallback" % exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print("skipping %s (%s); using numpy fallback" % (ext.name, exc))


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
