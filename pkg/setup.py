"""Build script: compiles the optional Cython acceleration for the AEC inner loop.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any failure to cythonize or compile downgrades
to a warning instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that tolerates a missing compiler or a failed compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"skipping compiled extensions ({exc}); "
                          "srpmask will use the pure-Python AEC kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"could not build {ext.name} ({exc}); "
                          "srpmask will use the pure-Python AEC kernel")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; srpmask will use the "
                      "pure-Python AEC kernel")
        return []
    exts = [
        Extension(
            "srpmask._aec_core",
            ["src/srpmask/_aec_core.pyx"],
            extra_compile_args=["-O3"],
        )
    ]
    return cythonize(exts, compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
