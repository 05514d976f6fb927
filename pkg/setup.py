# Builds the optional Cython kernel extension. The package works without it
# (pure-numpy fallback is selected at import), so the extension is marked
# optional and any build failure is non-fatal.

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "retouchq._kernels._cyext",
                sources=["src/retouchq/_kernels/_cyext.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off: no FMA fusion, so compiled results stay
                # bit-equal to the numpy fallback's unfused float64 math
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
