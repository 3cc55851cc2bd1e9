"""One-period ring buffer backing every (t - T) lookup."""
from __future__ import annotations

import numpy as np

from .errors import BufferUnderflow


class PeriodBuffer:
    """Stores the last N samples of named quantities on the h-grid.

    ``delayed(name, step)`` returns the value written at ``step - N``
    exactly; there is no interpolation.
    """

    def __init__(self, N: int, h: float, shapes: dict[str, tuple]):
        if N < 1:
            raise ValueError("N must be >= 1")
        self.N = int(N)
        self.h = float(h)
        self._data = {name: np.zeros((self.N,) + tuple(shape)) for name, shape in shapes.items()}
        self._written = np.full(self.N, -1, dtype=np.int64)

    @property
    def T(self):
        return self.N * self.h

    def names(self):
        return tuple(self._data)

    def write(self, step: int, **values):
        slot = step % self.N
        for name, value in values.items():
            self._data[name][slot] = value
        self._written[slot] = step

    def delayed(self, name: str, step: int):
        """Value of ``name`` written at ``step - N``."""
        if step < self.N:
            raise BufferUnderflow(f"step {step} has no sample one period earlier (N={self.N})")
        slot = step % self.N
        if self._written[slot] != step - self.N:
            raise BufferUnderflow(
                f"slot for step {step - self.N} holds step {self._written[slot]}"
            )
        return self._data[name][slot].copy()

    def delayed_many(self, step: int, names):
        """``delayed`` for several quantities with a single bookkeeping check."""
        if step < self.N:
            raise BufferUnderflow(f"step {step} has no sample one period earlier (N={self.N})")
        slot = step % self.N
        if self._written[slot] != step - self.N:
            raise BufferUnderflow(f"slot for step {step - self.N} holds step {self._written[slot]}")
        return [self._data[name][slot].copy() for name in names]

    def period(self, name: str):
        """Copy of the stored period in phase order (slot i holds phase i)."""
        return self._data[name].copy()


def delayed_value(buffer: PeriodBuffer, quantity: str, t: float):
    """Sample of ``quantity`` at t - T; t must sit on the buffer's h-grid."""
    step = int(round(t / buffer.h))
    if abs(step * buffer.h - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t={t} is not on the h-grid (h={buffer.h})")
    return buffer.delayed(quantity, step)
