"""Hypothesis strategies shared by the property suites."""

import numpy as np
from hypothesis import strategies as st

finite = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


def vectors(n, lo=-2.0, hi=2.0):
    return st.lists(st.floats(lo, hi, allow_nan=False, allow_infinity=False), min_size=n, max_size=n).map(np.array)


def matrices(rows, cols, lo=-2.0, hi=2.0):
    return vectors(rows * cols, lo, hi).map(lambda v: v.reshape(rows, cols))


# rotation angle kept below pi so log is well defined
twists = st.tuples(vectors(3, -1.0, 1.0), st.floats(0.0, 3.0), vectors(3)).map(
    lambda t: np.concatenate([t[1] * t[0] / max(np.linalg.norm(t[0]), 1e-300) if np.linalg.norm(t[0]) > 1e-6 else np.zeros(3), t[2]])
)
