"""Build the optional compiled geometry kernels.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile degrades gracefully instead of breaking
the install.
"""

import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            # -ffp-contract=off keeps the C kernels bit-compatible with the
            # numpy fallback (no FMA contraction).
            "src/curricnav/_geomcore.pyx",
        ],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args += ["-O3", "-ffp-contract=off"]
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
