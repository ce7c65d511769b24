"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Heavy artifacts (approximate orbits, full certificates) are computed once
per session and cached under /tmp/tailflow_test_cache so reruns are cheap;
delete that directory for a from-scratch run.
"""

import json
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from tailflow.approx import (
    ApproxOrbit,
    GalerkinConfig,
    GalerkinSystem,
    bundled_seed,
    find_periodic_orbit,
)
from tailflow.enclosure import EnclosurePolicy, find_enclosure
from tailflow.evolution import EvolutionConfig
from tailflow.intervals import Interval, IntervalVector
from tailflow.models import (
    BrusselatorHeadField,
    BrusselatorModel,
    BrusselatorParams,
    LogisticModel,
    LogisticParams,
    PdeState,
)
from tailflow.poincare import ProofPolicy, build_initial_set, validate_fixed_point
from tailflow.series import cos_times_sin, cube_term, sin_times_sin
from tailflow.tails import Kind, Parity, TailVector, psum_upper

from helpers import (
    contains_coeffs,
    dense_cos_times_sin,
    dense_cube,
    dense_sin_times_sin,
    rand_tail_vector,
    sample_selector,
)

_CACHE = "/tmp/tailflow_test_cache"


def _report(num, name, ok, detail=""):
    line = f"[criterion {num:>2}] {'PASS' if ok else 'FAIL'}  {name}"
    if detail:
        line += f"  ({detail})"
    print("\n" + line)
    return ok


# ---------------------------------------------------------------------------
# shared heavy artifacts
# ---------------------------------------------------------------------------

def _b2_proof_config():
    return EvolutionConfig(tau=2.0 ** -11, order=6, grow=1.0,
                           tau_max=2.0 ** -11,
                           enclosure=EnclosurePolicy(max_retries=12,
                                                     min_tau=1e-6))


@pytest.fixture(scope="session")
def b2_certificate(b2_model, b2_field, b2_orbit):
    os.makedirs(_CACHE, exist_ok=True)
    path = os.path.join(_CACHE, "cert_b2.json")
    if os.path.exists(path):
        return json.load(open(path))
    t0 = time.time()
    cert = validate_fixed_point(b2_model, b2_field, b2_orbit,
                                _b2_proof_config(), ProofPolicy())
    data = cert.to_json()
    data["meta"]["seconds"] = time.time() - t0
    json.dump(data, open(path, "w"))
    return data


@pytest.fixture(scope="session")
def b271_certificate():
    os.makedirs(_CACHE, exist_ok=True)
    path = os.path.join(_CACHE, "cert_b271.json")
    if os.path.exists(path):
        return json.load(open(path))
    params = BrusselatorParams.make("1", "1/64", "1", "2.71")
    model = BrusselatorModel(params, Parity.ODD)
    n = 37
    orb_path = os.path.join(_CACHE, "orbit_b271_n37.json")
    if os.path.exists(orb_path):
        orbit = ApproxOrbit.from_json(json.load(open(orb_path)))
    else:
        orbit = find_periodic_orbit(
            GalerkinConfig(params, n=n, transient=80.0),
            bundled_seed("B2.71"))
        json.dump(orbit.to_json(), open(orb_path, "w"))
    fld = BrusselatorHeadField(model, n)
    cfg = EvolutionConfig(tau=2.0 ** -11, order=6, grow=1.0,
                          tau_max=2.0 ** -11,
                          enclosure=EnclosurePolicy(max_retries=12,
                                                    min_tau=1e-6))
    t0 = time.time()
    cert = validate_fixed_point(model, fld, orbit, cfg,
                                ProofPolicy(t_max=40.0))
    data = cert.to_json()
    data["meta"]["seconds"] = time.time() - t0
    json.dump(data, open(path, "w"))
    return data


def _sweep_proof(btext: str):
    path = os.path.join(_CACHE, f"cert_sweep_{btext}.json")
    if os.path.exists(path):
        return json.load(open(path))
    params = BrusselatorParams.make("0.2", "0.02", "1", btext)
    model = BrusselatorModel(params, Parity.ODD)
    n = 45
    orbit = find_periodic_orbit(GalerkinConfig(params, n=n, transient=100.0),
                                bundled_seed("B2.0"))
    fld = BrusselatorHeadField(model, n)
    cfg = EvolutionConfig(tau=2.0 ** -10, order=6, grow=1.0,
                          tau_max=2.0 ** -10,
                          enclosure=EnclosurePolicy(max_retries=12,
                                                    min_tau=1e-6))
    t0 = time.time()
    cert = validate_fixed_point(model, fld, orbit, cfg,
                                ProofPolicy(t_max=40.0))
    data = cert.to_json()
    data["meta"]["seconds"] = time.time() - t0
    json.dump(data, open(path, "w"))
    return data


# ---------------------------------------------------------------------------
# criterion 1: series-algebra selector containment, 1000 randomized pairs
# ---------------------------------------------------------------------------

def test_criterion_1_series_containment():
    t0 = time.time()
    rng = np.random.default_rng(20240817)
    count = 0
    ok = True
    for trial in range(334):
        n = int(rng.integers(1, 9))
        s = float(rng.choice([2.0, 3.0, 5.0]))
        u = rand_tail_vector(rng, n, s, tail_scale=0.4)
        v = rand_tail_vector(rng, n, s, tail_scale=0.4)
        big = 6 * n
        cu, cv = u.tail_mag, v.tail_mag
        eps = cu * cv * psum_upper(4 * n, 2 * s) + 1e-10

        w = sin_times_sin(u, v)
        xs, _ = sample_selector(u, rng, big)
        ys, _ = sample_selector(v, rng, big)
        c0, ck = dense_sin_times_sin(xs, ys)
        m = 4 * n
        got = w.coeffs(m)
        ok &= bool(w.const.lo - eps <= c0 <= w.const.hi + eps)
        ok &= bool(np.all(got.lo - eps <= ck[:m])
                   and np.all(ck[:m] <= got.hi + eps))
        count += 1

        uc = rand_tail_vector(rng, n, s, kind=Kind.COSINE, tail_scale=0.4)
        w2 = cos_times_sin(uc, v)
        xs2, x0c = sample_selector(uc, rng, big)
        ck2 = dense_cos_times_sin(x0c, xs2, ys)
        got2 = w2.coeffs(m)
        ok &= bool(np.all(got2.lo - eps <= ck2[:m])
                   and np.all(ck2[:m] <= got2.hi + eps))
        count += 1

        w3 = cube_term(u, v)
        ck3 = dense_cube(xs, ys)
        supu = np.sum(np.abs(xs))
        supv = np.sum(np.abs(ys))
        eps3 = (cu * cv + cu * supv + cv * supu + 1.0) \
            * psum_upper(4 * n, s) * 0.5 + 1e-9
        m3 = min(len(ck3), m)
        got3 = w3.coeffs(m3)
        ok &= bool(np.all(got3.lo - eps3 <= ck3[:m3])
                   and np.all(ck3[:m3] <= got3.hi + eps3))
        count += 1
    dt = time.time() - t0
    assert _report(1, "series selector containment", ok and count >= 1000,
                   f"{count} pairs in {dt:.1f}s") and dt < 30.0


# ---------------------------------------------------------------------------
# criterion 2: tail-sum and power-mean inequalities
# ---------------------------------------------------------------------------

def test_criterion_2_propositions():
    t0 = time.time()
    big = 1_000_000
    inv = 1.0 / np.arange(1, big + 1, dtype=float)
    ok = True
    for s in (1.5, 2.0, 5.0):
        csum = np.cumsum((inv ** s)[::-1])[::-1]
        for n in range(1, 51):
            ok &= bool(csum[n] <= psum_upper(n, s) * (1 + 1e-12))
    rng = np.random.default_rng(9)
    a = rng.uniform(1e-6, 1e3, size=10_000)
    b = rng.uniform(1e-6, 1e3, size=10_000)
    s = rng.uniform(1.0, 8.0, size=10_000)
    ok &= bool(np.all((a + b) ** s <= 2.0 ** (s - 1.0)
                      * (a ** s + b ** s) * (1 + 1e-12)))
    dt = time.time() - t0
    assert _report(2, "tail-sum / power-mean propositions", ok,
                   f"{dt:.1f}s") and dt < 5.0


# ---------------------------------------------------------------------------
# criterion 3: enclosure soundness for the B=2 initial set
# ---------------------------------------------------------------------------

def test_criterion_3_enclosure_soundness(b2_model, b2_field, b2_orbit):
    t0 = time.time()
    pol = ProofPolicy()
    pq, sec, amat, bmat, r0 = build_initial_set(
        b2_model, b2_field, b2_orbit.x_star, b2_orbit.alpha,
        b2_orbit.eigvecs, np.abs(b2_orbit.eigvals), pol)
    from tailflow.evolution import Evolver
    ev = Evolver(b2_model, b2_field, _b2_proof_config())
    x0 = ev.as_tail_state(pq)
    res = find_enclosure(b2_model, x0, 2.0 ** -11,
                         EnclosurePolicy(max_retries=12, min_tau=1e-5))
    ok = res.accepted and res.tau >= 1e-5
    tau = res.tau

    params = BrusselatorParams.make("0.2", "0.02", "1", "2")
    gsys = GalerkinSystem(GalerkinConfig(params, n=119, rtol=1e-11,
                                         atol=1e-13))
    rng = np.random.default_rng(3)
    nm = b2_field.nm
    n_traj = 100
    contained = 0
    c3_ok = 0
    enc = res.enclosure
    f = res.f_bounds
    lam_u = b2_model.lam[0].head(np.arange(1, 60))
    lam_v = b2_model.lam[1].head(np.arange(1, 60))
    for trial in range(n_traj):
        rho = (2 * rng.random(b2_field.dim) - 1) * 1e-5
        rho[0] = 0.0
        xh = b2_orbit.x_star + amat.mid @ rho
        big = np.zeros(gsys.dim)
        big[:nm] = xh[:nm]
        big[gsys.nm:gsys.nm + nm] = xh[nm:]
        for j, k in enumerate(gsys.modes):
            if k > 59:
                big[j] = (2 * rng.random() - 1) / k ** 5
                big[gsys.nm + j] = (2 * rng.random() - 1) / k ** 5
        sol = gsys.integrate(big, (0.0, tau), dense=True)
        inside = True
        for tt in np.linspace(0.0, tau, 5):
            y = sol.sol(tt)
            for c, (lo_ix, hi_ix) in enumerate(((0, gsys.nm),
                                                (gsys.nm, 2 * gsys.nm))):
                coeffs = enc[c].coeffs(119)
                mine = np.zeros(119)
                mine[gsys.modes - 1] = y[lo_ix:hi_ix]
                if not (np.all(coeffs.lo - 1e-9 <= mine)
                        and np.all(mine <= coeffs.hi + 1e-9)):
                    inside = False
        contained += inside
        # Duhamel endpoint bound per head mode
        y = sol.sol(tau)
        good = True
        for c, lam in enumerate((lam_u, lam_v)):
            off = 0 if c == 0 else gsys.nm
            for j, k in enumerate(b2_field.modes):
                lamk = lam[k - 1].mid
                x0k = big[off + j] if c == 0 else big[gsys.nm + j]
                fk = f[c].coeff(int(k))
                e = math.exp(lamk * tau)
                lo = e * x0k + (e - 1.0) / lamk * fk.lo - 1e-11
                hi = e * x0k + (e - 1.0) / lamk * fk.hi + 1e-11
                val = y[off + j] if c == 0 else y[gsys.nm + j]
                if not (min(lo, hi) <= val <= max(lo, hi)):
                    good = False
        c3_ok += good
    dt = time.time() - t0
    ok = ok and contained == n_traj and c3_ok == n_traj
    assert _report(3, "enclosure soundness (B=2 initial set)", ok,
                   f"tau={tau:.1e}, {contained}/{n_traj} inside, "
                   f"{c3_ok}/{n_traj} endpoint bound, {dt:.0f}s") and dt < 120


# ---------------------------------------------------------------------------
# criterion 4: logistic compatibility limitation
# ---------------------------------------------------------------------------

def test_criterion_4_logistic_limitation():
    t0 = time.time()
    model = LogisticModel(LogisticParams.make("1"))
    a = math.sqrt(math.pi / 8.0)
    head = np.zeros(8)
    head[0] = a
    x4 = PdeState((TailVector.from_point_coeffs(head, 4.0, Kind.SINE),))
    r4 = find_enclosure(model, x4, 1e-2,
                        EnclosurePolicy(max_retries=5, shrink_tau=False))
    x6 = PdeState((TailVector.from_point_coeffs(head, 6.0, Kind.SINE),))
    r6 = find_enclosure(model, x6, 1e-2, EnclosurePolicy(max_retries=20))
    ok = r4.accepted and r4.retries < 5 and not r6.accepted
    dt = time.time() - t0
    assert _report(4, "logistic decay limitation (s=4 ok, s=6 fails)", ok,
                   f"s4 retries={r4.retries}, s6 accepted={r6.accepted}, "
                   f"{dt:.0f}s") and dt < 60


# ---------------------------------------------------------------------------
# criteria 5 and 6: the full B=2 certificate and the contraction table
# ---------------------------------------------------------------------------

def test_criterion_5_main_theorem(b2_certificate):
    c = b2_certificate
    plo, phi = c["period_float"]
    ok = c["passed"] and c["c1"] and c["c2"]
    ok &= plo <= 7.69666 and phi >= 7.69667
    ok &= (phi - plo) <= 1e-2
    l2u = float.fromhex(c["norms"]["u_l2"])
    ok &= 1.27 <= l2u <= 2.0
    assert _report(5, "B=2 periodic-orbit certificate", bool(ok),
                   f"period=[{plo:.6f},{phi:.6f}], L2(u)<= {l2u:.5f}, "
                   f"{c['meta'].get('seconds', 0):.0f}s")


def test_criterion_6_contraction_table(b2_certificate):
    c = b2_certificate
    q0 = [(float.fromhex(lo), float.fromhex(hi)) for lo, hi in c["q0"]]
    table1 = [6.87377e-6, 1.17766e-6, 2.8735e-11, 5.43755e-9, 1.60821e-9,
              1.59018e-10, 6.65989e-11, 5.29417e-11, 2.59156e-11]
    ok = True
    details = []
    for i in range(1, 10):      # coordinates 2..10 (0-based 1..9)
        lo, hi = q0[i]
        rad = max(abs(lo), abs(hi))
        ok &= lo > -1e-5 and hi < 1e-5 and rad <= 1e-5
        ratio = rad / table1[i - 1]
        ok &= ratio <= 100.0
        details.append(f"{rad:.1e}")
    assert _report(6, "contraction table (q0 inside 1e-5 boxes)", bool(ok),
                   "radii " + ",".join(details))


# ---------------------------------------------------------------------------
# criterion 7: sweep spot-check at B = 2.1 and 2.3
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("btext,paper_dim", [("2.1", 14), ("2.3", 22)])
def test_criterion_7_sweep(btext, paper_dim):
    c = _sweep_proof(btext)
    ok = c["passed"]
    dim = c["meta"]["inclusion_dim"]
    ok &= dim >= paper_dim
    assert _report(7, f"sweep proof B={btext}", bool(ok),
                   f"inclusion dim {dim} (paper {paper_dim}), "
                   f"{c['meta'].get('seconds', 0):.0f}s")


# ---------------------------------------------------------------------------
# criterion 8: cross-validation at B=2.71
# ---------------------------------------------------------------------------

def test_criterion_8_cross_validation(b271_certificate):
    c = b271_certificate
    plo, phi = c["period_float"]
    ok = c["passed"] and plo <= 10.4549 and phi >= 10.455
    assert _report(8, "B=2.71 cross-validation", bool(ok),
                   f"period=[{plo:.5f},{phi:.5f}], "
                   f"{c['meta'].get('seconds', 0):.0f}s")


# ---------------------------------------------------------------------------
# criterion 9: period-doubling observable
# ---------------------------------------------------------------------------

def test_criterion_9_period_doubling():
    t0 = time.time()
    os.makedirs(_CACHE, exist_ok=True)
    path = os.path.join(_CACHE, "period_doubling.json")
    if os.path.exists(path):
        periods = json.load(open(path))
    else:
        periods = {}
        for btext in ("2.83", "2.84"):
            params = BrusselatorParams.make("1", "1/64", "1", btext)
            cfg = GalerkinConfig(params, n=25, transient=150.0,
                                 return_tol=1e-8, max_returns=400)
            orb = find_periodic_orbit(cfg, bundled_seed("B2.71"),
                                      with_jacobian=False)
            periods[btext] = {"period": orb.period, "cycle": orb.cycle}
        json.dump(periods, open(path, "w"))
    t283 = periods["2.83"]["period"]
    t284 = periods["2.84"]["period"]
    ok = abs(t283 - 13.2129) <= 0.05 and abs(t284 - 27.2437) <= 0.05
    dt = time.time() - t0
    assert _report(9, "period doubling (13.21 -> 27.24)", bool(ok),
                   f"T(2.83)={t283:.4f}, T(2.84)={t284:.4f}, {dt:.0f}s") \
        and dt < 300


# ---------------------------------------------------------------------------
# criterion 10: inclusion-solver order and containment
# ---------------------------------------------------------------------------

def test_criterion_10_inclusion_properties():
    t0 = time.time()
    from tailflow.inclusion import AffineSet, InclusionOptions, tight_step
    from helpers import DiagonalLinearField
    lam = np.array([-1.0, 2.0])
    f = DiagonalLinearField(lam)
    x0c = np.array([1.0, 0.3])
    ok = True
    p = 4
    widths = []
    for k in range(3, 9):
        tau = 2.0 ** -k
        aff = AffineSet.from_box(IntervalVector.point(x0c))
        out, _ = tight_step(f, IntervalVector.zeros(2), aff, tau,
                            InclusionOptions(order=p))
        widths.append(np.max(out.box().width))
        exact = np.exp(lam * tau) * x0c
        ok &= out.contains_point(exact, slack=1e-12)
    ratios = [widths[i] / widths[i + 1] for i in range(len(widths) - 1)]
    ok &= all(r >= 2.0 ** (p + 1) / 1.5 for r in ratios)
    dt = time.time() - t0
    assert _report(10, "inclusion solver order/containment", bool(ok),
                   f"defect ratios {[f'{r:.0f}' for r in ratios]}, "
                   f"{dt:.0f}s") and dt < 60
