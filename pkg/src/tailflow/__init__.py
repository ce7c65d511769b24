"""tailflow: rigorous integration of dissipative 1-D PDEs in interval Fourier
series with polynomial tail bounds, and machine-checked existence certificates
for time-periodic orbits (Brusselator reaction-diffusion system)."""

from tailflow.intervals import (
    EMPTY,
    PI,
    Interval,
    IntervalMatrix,
    IntervalVector,
    verified_inverse,
)
from tailflow.tails import TailVector

__version__ = "0.1.0"
