from setuptools import setup

# The compiled kernels are optional: the package falls back to numpy
# implementations when the extension is missing or fails to build.
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "lcentropy._kernels._fast",
                ["src/lcentropy/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
