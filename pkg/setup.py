import os

from setuptools import Extension, setup


def ext_modules():
    if os.environ.get("PLANCK_LAB_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    extensions = [
        Extension(
            "planck_lab.kernels._ckernels",
            ["src/planck_lab/kernels/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
    ]
    return cythonize(extensions, compiler_directives={"language_level": "3"})


setup(ext_modules=ext_modules())
