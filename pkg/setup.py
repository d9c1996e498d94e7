from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "vlasovpairs._kernel_cy",
        ["src/vlasovpairs/_kernel_cy.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
