"""Build script: compiles the SAT kernel with Cython when available.

The kernel (argos/_satcore.py) is plain Python that Cython can compile in
pure-Python mode. When the extension builds, imports pick up the compiled
module; otherwise the interpreted file is used unchanged. Set ARGOS_NO_EXT=1
to skip compilation and force the pure-Python kernel.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ARGOS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("argos._satcore", ["src/argos/_satcore.py"])],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
