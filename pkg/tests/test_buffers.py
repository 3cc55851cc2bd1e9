import numpy as np
import pytest
from hypothesis import given, strategies as st

from coadapt.buffers import PeriodBuffer, delayed_value
from coadapt.errors import BufferUnderflow


def test_delay_returns_value_from_one_period_earlier():
    # reads for step s happen before step s is written
    b = PeriodBuffer(4, 0.5, {"a": (2,)})
    for s in range(9):
        b.write(s, a=np.array([s, -s]))
    assert np.array_equal(b.delayed("a", 9), [5, -5])
    assert np.array_equal(b.delayed_many(9, ["a"])[0], [5, -5])
    assert b.T == 2.0
    assert np.array_equal(delayed_value(b, "a", 4.5), [5, -5])
    b.write(9, a=np.array([9, -9]))
    with pytest.raises(BufferUnderflow):
        b.delayed("a", 9)


def test_underflow_and_stale_slots():
    b = PeriodBuffer(3, 0.1, {"a": ()})
    b.write(0, a=1.0)
    with pytest.raises(BufferUnderflow):
        b.delayed("a", 2)
    with pytest.raises(BufferUnderflow):
        b.delayed("a", 4)  # slot of step 1 never written
    with pytest.raises(ValueError):
        delayed_value(b, "a", 0.35)


@given(st.integers(1, 50), st.integers(0, 200))
def test_delayed_is_exact_copy(N, extra):
    b = PeriodBuffer(N, 1.0, {"v": (3,)})
    rng = np.random.default_rng(N + extra)
    vals = rng.standard_normal((N + extra + 1, 3))
    for s, v in enumerate(vals[:-1]):
        b.write(s, v=v)
    s = N + extra
    out = b.delayed("v", s)
    assert np.array_equal(out, vals[s - N])
    out[:] = 0.0  # returned array is a copy
    assert np.array_equal(b.delayed("v", s), vals[s - N])
