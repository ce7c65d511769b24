"""Non-rigorous observation of the period-doubling bifurcation.

Between B = 2.83 and B = 2.84 (d1 = 1, d2 = 1/64) the attracting orbit's
fundamental period roughly doubles; the return map converges to a fixed
point on one side and to a genuine 2-cycle on the other.
"""

from tailflow.approx import GalerkinConfig, bundled_seed, find_periodic_orbit
from tailflow.models import BrusselatorParams

for btext in ("2.71", "2.83", "2.84"):
    params = BrusselatorParams.make("1", "1/64", "1", btext)
    cfg = GalerkinConfig(params, n=25, transient=150.0, return_tol=1e-8,
                         max_returns=400)
    orb = find_periodic_orbit(cfg, bundled_seed("B2.71"), with_jacobian=False)
    kind = "fixed point" if orb.cycle == 1 else f"{orb.cycle}-cycle"
    print(f"B = {btext}: period {orb.period:8.4f}  ({kind}, "
          f"residual {orb.residual:.1e})")
