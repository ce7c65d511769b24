"""The compatibility limitation: why decay exponents above 5 fail.

For u_t = u_xx + u - u^2 the square of a sine series is an even function;
its own sine expansion only decays like 1/i^3 no matter how fast the state
decays.  Divided by the eigenvalues (~ i^2) the motion of mode i is ~ 1/i^5,
so validated enclosures with tails C/i^s exist only for s < 5.  Running the
same search at s = 4 and s = 6 shows both sides of the threshold.
"""

import math

import numpy as np

from tailflow.enclosure import EnclosurePolicy, find_enclosure
from tailflow.models import LogisticModel, LogisticParams, PdeState
from tailflow.tails import Kind, TailVector

model = LogisticModel(LogisticParams.make("1"))
head = np.zeros(8)
head[0] = math.sqrt(math.pi / 8.0)

for s in (4.0, 6.0):
    x0 = PdeState((TailVector.from_point_coeffs(head, s, Kind.SINE),))
    res = find_enclosure(model, x0, 1e-2, EnclosurePolicy(max_retries=20))
    print(f"s = {s}: accepted = {res.accepted} after {res.retries} retries "
          f"(tau = {res.tau:.1e})")
    d = res.diagnostics["components"][0]
    print(f"   tail comparison ok: {d['tail_ok']}, "
          f"candidate tail {d['tail_z1'][0]:.2e}/i^{d['tail_z1'][2]} "
          f"vs allowed {d['tail_z'][0]:.2e}/i^{d['tail_z'][2]}")
