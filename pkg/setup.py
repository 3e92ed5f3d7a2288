from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off: the fallback backend must reproduce the compiled kernels
# bit-for-bit, so FMA contraction of a*b+c expressions is not allowed.
extensions = [
    Extension(
        "floatersim._kernels",
        ["src/floatersim/_kernels.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
