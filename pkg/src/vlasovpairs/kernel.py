"""Selection of the integration kernel at import time.

The compiled Cython extension is preferred; the pure-Python twin in
:mod:`vlasovpairs._kernel_py` is used when the extension is unavailable or
when ``VLASOVPAIRS_FORCE_PYTHON`` is set in the environment.  Both expose
the same entry points and implement the same algorithms, so results agree
to rounding; the compiled kernel is roughly two orders of magnitude faster
(see ``benchmarks/bench_kernel.py``).
"""

import os

from . import _kernel_py


def _select():
    if os.environ.get("VLASOVPAIRS_FORCE_PYTHON"):
        return _kernel_py
    try:
        from . import _kernel_cy
        return _kernel_cy
    except ImportError:
        return _kernel_py


active = _select()
IMPLEMENTATION = active.IMPLEMENTATION


def get_kernel(name: str):
    """Fetch a kernel by name ('python' or 'compiled'), for benchmarks."""
    if name == "python":
        return _kernel_py
    if name == "compiled":
        from . import _kernel_cy
        return _kernel_cy
    raise ValueError(f"unknown kernel {name!r}")
