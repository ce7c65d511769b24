import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from tailflow.inclusion import (
    AffineSet,
    InclusionOptions,
    RoughEnclosureError,
    rough_enclosure,
    tight_step,
)
from tailflow.intervals import IntervalVector
from tailflow.models import BrusselatorHeadField, BrusselatorModel, BrusselatorParams
from tailflow.tails import Parity

from helpers import DiagonalLinearField

RNG = np.random.default_rng(41)


# ---------------------------------------------------------------------------
# rough enclosure
# ---------------------------------------------------------------------------

def test_rough_pure_delta():
    f = DiagonalLinearField([0.0])
    w = rough_enclosure(f, IntervalVector([-1.0], [1.0]),
                        IntervalVector.zeros(1), 0.1)
    assert w.lo[0] <= -0.1 and w.hi[0] >= 0.1
    assert w.hi[0] < 0.2


def test_rough_scalar_decay():
    f = DiagonalLinearField([-1.0])
    w = rough_enclosure(f, IntervalVector.zeros(1),
                        IntervalVector.point([1.0]), 0.1)
    assert 0.8 <= w.lo[0] and w.hi[0] <= 1.05
    assert w.lo[0] <= math.exp(-0.1) and w.hi[0] >= 1.0


def test_rough_brusselator_head():
    model = BrusselatorModel(BrusselatorParams.make("0.2", "0.02", "1", "2.1"),
                             Parity.ODD)
    fld = BrusselatorHeadField(model, 13)   # 14 variables, the paper's size
    assert fld.dim == 14
    x = np.zeros(fld.dim)
    x[0], x[fld.nm] = 0.7, 3.87
    w = rough_enclosure(fld, IntervalVector.symmetric(np.full(fld.dim, 1e-8)),
                        IntervalVector(x - 1e-5, x + 1e-5), 2.0 ** -9)
    assert w.contains_point(x)


def test_rough_failure_on_huge_tau():
    # the cubic coupling cannot close a self-consistent box over a huge step
    model = BrusselatorModel(BrusselatorParams.make("0.2", "0.02", "1", "2"),
                             Parity.ODD)
    fld = BrusselatorHeadField(model, 5)
    x = np.zeros(fld.dim)
    x[0], x[fld.nm] = 0.7, 3.9
    with pytest.raises(RoughEnclosureError):
        rough_enclosure(fld, IntervalVector.zeros(fld.dim),
                        IntervalVector(x - 1e-3, x + 1e-3), 50.0)


# ---------------------------------------------------------------------------
# tight step: closed forms
# ---------------------------------------------------------------------------

def test_linear_diagonal_contains_exact_flow():
    lam = np.array([-1.0, -3.0, 0.5])
    f = DiagonalLinearField(lam)
    x0c = np.array([1.0, -0.5, 0.2])
    aff = AffineSet.from_box(IntervalVector(x0c - 1e-3, x0c + 1e-3))
    out, diag = tight_step(f, IntervalVector.zeros(3), aff, 0.1,
                           InclusionOptions(order=4))
    for _ in range(50):
        s = x0c + (2 * RNG.random(3) - 1) * 1e-3
        exact = np.exp(lam * 0.1) * s
        assert out.contains_point(exact, slack=1e-12)
    assert diag.qr_ok


def test_delta_only_step():
    # g == 0: result must contain X0 + tau*[delta] and not be much larger
    f = DiagonalLinearField([0.0, 0.0])
    aff = AffineSet.from_box(IntervalVector.point([1.0, -1.0]))
    d = IntervalVector([-0.5, -0.1], [1.0, 0.2])
    out, _ = tight_step(f, d, aff, 0.25, InclusionOptions(order=3))
    box = out.box()
    assert box.lo[0] <= 1.0 - 0.5 * 0.25 and box.hi[0] >= 1.0 + 1.0 * 0.25
    assert box.hi[0] <= 1.0 + 1.0 * 0.25 + 0.05


def test_order_of_defect():
    # defect shrinks as O(tau^{p+1}) for the linear closed form
    lam = np.array([-1.0, 2.0])
    f = DiagonalLinearField(lam)
    x0c = np.array([1.0, 0.3])
    for p in (2, 4):
        widths = []
        for k in range(3, 9):
            tau = 2.0 ** -k
            aff = AffineSet.from_box(IntervalVector.point(x0c))
            out, _ = tight_step(f, IntervalVector.zeros(2), aff, tau,
                                InclusionOptions(order=p))
            widths.append(np.max(out.box().width))
        ratios = [widths[i] / widths[i + 1] for i in range(len(widths) - 1)]
        for r in ratios:
            assert r >= 2.0 ** (p + 1) / 1.5, (p, ratios)


# ---------------------------------------------------------------------------
# containment under selections (piecewise-constant delta(t))
# ---------------------------------------------------------------------------

def brusselator_setup(n=9, b="2"):
    model = BrusselatorModel(BrusselatorParams.make("0.2", "0.02", "1", b),
                             Parity.ODD)
    fld = BrusselatorHeadField(model, n)
    x = np.zeros(fld.dim)
    x[0], x[fld.nm] = 0.69990, 3.86918
    x[1], x[fld.nm + 1] = -0.08167, 1.13598
    return model, fld, x


def _integrate_selection(fld, x0, tau, delta_sel, nseg=4):
    """High-accuracy trajectory with piecewise-constant delta(t)."""
    y = np.asarray(x0, float)
    for seg in range(nseg):
        d = delta_sel[seg]

        def rhs(t, z):
            return fld.eval(IntervalVector.point(z)).mid + d
        sol = solve_ivp(rhs, (0, tau / nseg), y, rtol=1e-12, atol=1e-14)
        y = sol.y[:, -1]
    return y


def test_containment_under_selection():
    model, fld, x = brusselator_setup()
    tau = 2.0 ** -8
    dbox = IntervalVector.symmetric(np.full(fld.dim, 2e-6))
    aff = AffineSet.from_box(IntervalVector(x - 1e-5, x + 1e-5))
    w = rough_enclosure(fld, dbox, aff.box(), tau)
    out, _ = tight_step(fld, dbox, aff, tau, InclusionOptions(order=5), w=w)
    for trial in range(20):
        x0 = x + (2 * RNG.random(fld.dim) - 1) * 1e-5
        sel = [(2 * RNG.random(fld.dim) - 1) * 2e-6 for _ in range(4)]
        y = _integrate_selection(fld, x0, tau, sel)
        assert out.contains_point(y, slack=1e-10), trial
        assert w.contains_point(y, slack=1e-10)


def test_fifty_consecutive_steps_containment():
    model, fld, x = brusselator_setup()
    tau = 2.0 ** -8
    dbox = IntervalVector.symmetric(np.full(fld.dim, 1e-8))
    cur = AffineSet.from_box(IntervalVector(x - 1e-6, x + 1e-6))
    # sample trajectories with per-step random selections
    nsamp = 8
    ys = [x + (2 * RNG.random(fld.dim) - 1) * 1e-6 for _ in range(nsamp)]
    growth = []
    prev_w = np.max(cur.box().width)
    for step in range(50):
        cur, diag = tight_step(fld, dbox, cur, tau, InclusionOptions(order=5))
        assert diag.qr_ok
        wnow = np.max(cur.box().width)
        growth.append(wnow / prev_w)
        prev_w = wnow
        for i in range(nsamp):
            sel = [(2 * RNG.random(fld.dim) - 1) * 1e-8 for _ in range(2)]
            ys[i] = _integrate_selection(fld, ys[i], tau, sel, nseg=2)
        for i in range(nsamp):
            assert cur.contains_point(ys[i], slack=1e-9), (step, i)
    # frame stays verified and the per-step growth factor stays bounded
    assert max(growth) < 1.2
