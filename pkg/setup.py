from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("nbsr._kernels", ["src/nbsr/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    ),
)
