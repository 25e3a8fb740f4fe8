"""Shared fixtures: kernel-backend switching and deterministic hypothesis."""

import importlib

import pytest
from hypothesis import HealthCheck, settings

from midiode._kernels import _pykernels

try:
    from midiode._kernels import _core
except ImportError:
    _core = None

settings.register_profile(
    "suite", derandomize=True, deadline=None, max_examples=150,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

BACKENDS = {"python": _pykernels}
if _core is not None:
    BACKENDS["compiled"] = _core

# modules that bind the kernel at import time
_KERNEL_SITES = ("midiode._kernels", "midiode.cubic", "midiode.potential",
                 "midiode.bvp", "midiode.bifurcation")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Rebind every kernel call site to one backend; yields its name."""
    mod = BACKENDS[request.param]
    for site in _KERNEL_SITES:
        monkeypatch.setattr(importlib.import_module(site), "kernel", mod)
    return request.param
