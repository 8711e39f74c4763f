"""Build script for the optional compiled kernel.

The package is pure Python plus one Cython extension (porism._kernels) that
accelerates the hot loops: billiard-map iteration, root-finding reflections
on generic tables, and the perimeter-ascent orbit solver.  If the extension
cannot be compiled the package still installs and transparently falls back
to porism._kernels_py.
"""

import sys
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Try to build the extension; warn and continue on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building porism._kernels failed ({exc!r}); "
            "the pure-Python kernels will be used instead.",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "porism._kernels",
        ["src/porism/_kernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
