"""Fourier coefficient enclosures with polynomial tails, and their algebra.

A TailVector stores n explicit coefficient intervals plus a uniform bound
[C-,C+]/i^s for everything beyond; products of sine/cosine series keep that
form with computable constants, which is what lets a PDE's cubic
nonlinearity be evaluated over an infinite-dimensional set.
"""

import numpy as np

from tailflow.intervals import IntervalVector
from tailflow.series import cos_times_sin, cube_term, sin_times_sin
from tailflow.tails import Kind, Parity, TailVector

# sin(x)^2 = 1/2 - 1/2 cos(2x): a finite series stays finite and sharp
u = TailVector.from_point_coeffs([1.0], 5.0, Kind.SINE)
w = sin_times_sin(u, u)
print("sin^2 x:")
print(f"  constant term {w.const}")
print(f"  cos(2x) coefficient {w.coeff(2)}")
print(f"  tail is exactly zero: {w.tail_is_zero()}")

# with tails: the product's tail constant is explicit
ut = TailVector(IntervalVector([0.6, -0.1], [0.7, 0.1]), -0.5, 0.5, 5.0)
vt = TailVector(IntervalVector([3.8, 1.1], [3.9, 1.2]), -0.5, 0.5, 5.0)
cube = cube_term(ut, vt)
print(f"\nu^2 v with tails: head {cube.n}, "
      f"tail [{cube.c_lo:.3f},{cube.c_hi:.3f}]/i^{cube.s}")

# selector soundness: any concrete member sequence's product lies inside
rng = np.random.default_rng(1)
m = 24
cu = ut.coeffs(m)
cv = vt.coeffs(m)
su = cu.lo + rng.random(m) * (cu.hi - cu.lo)
sv = cv.lo + rng.random(m) * (cv.hi - cv.lo)
from scipy.signal import fftconvolve  # noqa: F401  (numpy is enough below)
c0 = 0.5 * float(su @ sv)
print(f"sampled selector (u v)_0 = {c0:.6f} in "
      f"{sin_times_sin(ut, vt).const}")

# reshaping: folding explicit heads into the tail, weakening the decay
folded = cube.shrink_head(2)
print(f"\nfolded to head 2: tail [{folded.c_lo:.3f},{folded.c_hi:.3f}]"
      f"/i^{folded.s}")
weaker = folded.weaken_decay(3.0)
print(f"re-expressed at i^-3: [{weaker.c_lo:.5f},{weaker.c_hi:.5f}]/i^3")

# norms certify function-space bounds for every member
nb = vt.norms()
print(f"\nnorm bounds of v: sup <= {nb.sup:.4f}, L2 <= {nb.l2:.4f}, "
      f"H1 <= {nb.h1:.4f}")
