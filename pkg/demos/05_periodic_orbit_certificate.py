"""The full machine-checked existence certificate for the B = 2 orbit.

Runs the complete pipeline: approximate orbit -> section + initial set ->
rigorous integration around the loop -> crossing refinement -> the C1/C2
inclusions whose validity implies a periodic orbit via the Schauder theorem.

The full head-59 run takes tens of minutes; pass --quick for a reduced-head
variant (weaker constants, same machinery) that finishes in a few minutes.
The CLI equivalent:

    tailflow approx configs/b2.json
    tailflow prove  configs/b2.json proof_input.json
"""

import argparse
import json
import time

import numpy as np

from tailflow.approx import GalerkinConfig, bundled_seed, find_periodic_orbit
from tailflow.enclosure import EnclosurePolicy
from tailflow.evolution import EvolutionConfig
from tailflow.models import BrusselatorHeadField, BrusselatorModel, BrusselatorParams
from tailflow.poincare import ProofPolicy, validate_fixed_point
from tailflow.tails import Parity

ap = argparse.ArgumentParser()
ap.add_argument("--quick", action="store_true",
                help="head 41 instead of 59 (minutes instead of ~an hour)")
args = ap.parse_args()

n = 41 if args.quick else 59
tau = 2.0 ** -10 if args.quick else 2.0 ** -11

params = BrusselatorParams.make("0.2", "0.02", "1", "2")
model = BrusselatorModel(params, Parity.ODD)
print(f"approximating the orbit at head {n} ...")
orbit = find_periodic_orbit(GalerkinConfig(params, n=n, transient=60.0),
                            bundled_seed("B2.0"))
print(f"T* = {orbit.period:.6f}, return residual {orbit.residual:.1e}")

fld = BrusselatorHeadField(model, n)
cfg = EvolutionConfig(tau=tau, order=6, grow=1.0, tau_max=tau,
                      enclosure=EnclosurePolicy(max_retries=12))
t0 = time.time()
last = [0.0]


def obs(ta, tb, pq, rep, lval):
    if float(tb) - last[0] > 0.5:
        last[0] = float(tb)
        print(f"  t = {float(tb):5.2f}  l = [{lval.lo:+.2e},{lval.hi:+.2e}] "
              f" tails ({pq.q_tails[0][1]:.1e}, {pq.q_tails[1][1]:.1e})")


cert = validate_fixed_point(model, fld, orbit, cfg, ProofPolicy(),
                            observer=obs)
print(f"\nresult after {time.time() - t0:.0f}s:")
print(f"  PASSED = {cert.passed} (C1 {cert.c1}, C2 {cert.c2}, "
      f"transversal {cert.transversal})")
print(f"  period in [{cert.period[0]:.6f}, {cert.period[1]:.6f}]")
print(f"  sup-over-period norm bounds: "
      f"{ {k: round(v, 5) for k, v in cert.norms.items()} }")
print("\nfirst coordinates (r0 vs computed q0):")
print(cert.table(10))
