"""Build the optional compiled kernel core.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it just makes the per-household inner
loops faster and enables multi-worker agent evaluation. Set
``DECARBSIM_NO_OPENMP=1`` to build the extension without OpenMP on
toolchains that lack it (the ``--workers`` flag then runs serially).
"""

import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off: no FMA contraction, so float results are bit-identical
# to the numpy fallback.
compile_args = ["-O3", "-ffp-contract=off"]
link_args = []
if not os.environ.get("DECARBSIM_NO_OPENMP"):
    compile_args.append("-fopenmp")
    link_args.append("-fopenmp")

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "decarbsim.kernels._core",
                ["src/decarbsim/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                extra_link_args=link_args,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions)
