"""Kernel selection: compiled extension if built, numpy fallback otherwise."""

from . import geometry as _fallback

try:
    from . import _geomcore as _compiled

    COMPILED = True
except ImportError:  # extension not built; pure-Python install
    _compiled = None
    COMPILED = False

_active = _compiled if COMPILED else _fallback

ray_hit = _active.ray_hit
scan_hits = _active.scan_hits
min_clearance = _active.min_clearance


def implementations():
    """(name, module) pairs of every available kernel implementation."""
    impls = [("fallback", _fallback)]
    if COMPILED:
        impls.append(("compiled", _compiled))
    return impls
