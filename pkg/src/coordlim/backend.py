"""Kernel backend selection.

Two interchangeable implementations of the hot numerical kernels exist:
``coordlim._fastcore`` (Cython, built at install time when a compiler is
available) and ``coordlim._purekernels`` (NumPy).  The compiled one is
preferred; the environment variable ``COORDLIM_BACKEND=python`` or
``=compiled`` forces a choice at import, and :func:`use` switches at
runtime (mainly for parity tests and benchmarks).
"""

import os

from . import _purekernels
from .errors import ValidationError

_IMPLS = {"python": _purekernels}

try:
    from . import _fastcore

    _IMPLS["compiled"] = _fastcore
except ImportError:
    _fastcore = None


def available():
    """Names of the importable kernel backends."""
    return sorted(_IMPLS)


def _default_name():
    forced = os.environ.get("COORDLIM_BACKEND")
    if forced:
        if forced not in _IMPLS:
            raise ValidationError(
                f"COORDLIM_BACKEND={forced!r} is not available; "
                f"choose from {available()}"
            )
        return forced
    return "compiled" if "compiled" in _IMPLS else "python"


_active = _IMPLS[_default_name()]


def active():
    """The currently selected kernel module."""
    return _active


def use(name):
    """Select a backend by name ('python' or 'compiled'); returns it."""
    global _active
    if name not in _IMPLS:
        raise ValidationError(f"unknown backend {name!r}; available: {available()}")
    _active = _IMPLS[name]
    return _active
