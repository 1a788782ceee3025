"""Builds the optional compiled kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    pass
else:
    ext_modules = cythonize(
        [Extension("prestage._ckernels", ["src/prestage/_ckernels.pyx"], extra_compile_args=["-O2", "-ffp-contract=off"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
