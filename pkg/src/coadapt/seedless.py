"""Guard that turns any random-number draw into an error."""
from __future__ import annotations

import contextlib
import random

import numpy as np


class RandomnessUsed(RuntimeError):
    pass


_NP_NAMES = ("default_rng", "seed", "rand", "randn", "random", "randint", "normal", "uniform", "choice",
             "permutation", "shuffle", "RandomState", "Generator")
_PY_NAMES = ("random", "uniform", "randint", "choice", "shuffle", "gauss", "seed", "sample")


def _trap(name):
    def raiser(*args, **kwargs):
        raise RandomnessUsed(f"{name} called while running seedless")
    return raiser


@contextlib.contextmanager
def no_rng():
    """Patch numpy.random and random so that any use raises RandomnessUsed."""
    saved = []
    for mod, names, prefix in ((np.random, _NP_NAMES, "numpy.random."), (random, _PY_NAMES, "random.")):
        for name in names:
            if hasattr(mod, name):
                saved.append((mod, name, getattr(mod, name)))
                setattr(mod, name, _trap(prefix + name))
    try:
        yield
    finally:
        for mod, name, obj in saved:
            setattr(mod, name, obj)
