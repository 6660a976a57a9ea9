"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it has been built;
otherwise, or when the environment variable ``ICNASH_PURE_PYTHON`` is set
to a true value, the numpy implementation in ``_pykernels`` is used.  Both
expose ``project``, ``t_affine``, ``t_partial`` and ``fd_grad_affine``
with identical signatures.
"""

import importlib
import os

from . import _pykernels

__all__ = ["BACKEND", "load_backend", "available_backends",
           "project", "t_affine", "t_partial", "fd_grad_affine"]

_FORCE_PURE = os.environ.get("ICNASH_PURE_PYTHON", "").lower() in (
    "1", "true", "yes", "on")


def load_backend(name):
    """Return the kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module(".._kernels", __name__)
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if _FORCE_PURE:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        _impl = load_backend("cython")
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

project = _impl.project
t_affine = _impl.t_affine
t_partial = _impl.t_partial
fd_grad_affine = _impl.fd_grad_affine
