"""Outward-rounded intervals and verified linear algebra.

Every arithmetic result encloses the exact real result; non-dyadic decimals
like 0.2 become two-sided enclosures at construction, and matrix inverses
come with an a-posteriori certificate that every member matrix is invertible.
"""

import numpy as np

from tailflow.intervals import Interval, IntervalMatrix, IntervalVector, verified_inverse

# non-dyadic decimals are enclosed, not rounded
d1 = Interval.from_decimal("0.2")
print(f"0.2 as an interval: {d1}  (width {d1.width:.3e})")

# arithmetic is outward rounded and inclusion monotone
a = Interval(1, 2)
b = Interval(3, 4)
print(f"[1,2] + [3,4] = {a + b}")
print(f"[1,1]/[3,3] = {Interval(1, 1) / Interval(3, 3)}")
print(f"exp([-1,0]) = {Interval(-1, 0).exp()}")

# an exactly representable computation stays exact (no spurious widening)
z = Interval(0, 0)
print(f"0 * [-5,7] = {z * Interval(-5, 7)} (exact zero preserved)")

# verified inverse: [B] A contains the identity for every A in the family
rng = np.random.default_rng(0)
A = rng.normal(size=(6, 6)) + 6 * np.eye(6)
B = verified_inverse(A)
prod = B @ IntervalMatrix.point(A)
print("\nverified inverse of a random 6x6:")
print("  [B]A encloses I:", prod.contains_point(np.eye(6)))
print("  max radius of [B]:", float(np.max(B.rad)))
