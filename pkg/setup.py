from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled kernels bit-compatible with the
# pure-numpy fallback (no fused multiply-add in the accumulation loops).
extensions = [
    Extension(
        "fedsim._kernels._speedups",
        ["src/fedsim/_kernels/_speedups.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
