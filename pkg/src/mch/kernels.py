"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise,
or when ``MCH_PURE_PYTHON=1`` is set, the numpy fallback is used.
"""
import os

from . import _kernels_py

BACKEND = "python"
green_quadrature = _kernels_py.green_quadrature
trig_eval = _kernels_py.trig_eval

if os.environ.get("MCH_PURE_PYTHON") != "1":
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        green_quadrature = _ckernels.green_quadrature
        trig_eval = _ckernels.trig_eval

__all__ = ["BACKEND", "green_quadrature", "trig_eval"]
