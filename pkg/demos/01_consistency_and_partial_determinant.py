"""The partial-determinant consistency test on synthetic data.

An expectation matrix built as states-times-observables always has a
partial determinant equal to the identity, no matter how the states and
observables were chosen.  Perturbing any single element breaks that.
"""

import numpy as np

from spamtomo import partial_determinant

rng = np.random.default_rng(1)
np.set_printoptions(precision=4, suppress=True)


def random_ball(n):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random((n, 1)) ** (1 / 3)


print("-- consistent data --")
p = random_ball(6)           # six random preparations (Stokes rows)
w = random_ball(6).T         # six random detector settings (observable columns)
s = p @ w
delta = partial_determinant(s)
print("expectation matrix:\n", s)
print("max |Delta - 1| =", np.abs(delta - np.eye(3)).max())

print()
print("-- one corrupted element --")
s_bad = s.copy()
s_bad[0, 0] += 0.25          # pretend preparation 1 / setting 1 is correlated
delta_bad = partial_determinant(s_bad)
print("Delta - 1:\n", delta_bad - np.eye(3))
print("the deviation concentrates in the corrupted element's column;")
print("the bench's default settings sharpen it to the single element (see demo 05)")
