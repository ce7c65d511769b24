"""Non-rigorous Galerkin machinery that manufactures proof inputs.

Finds an approximate periodic point x*, period T*, section normal alpha and
approximate return-map eigenvectors by plain floating-point integration of
the projected system (scipy's stiff solvers with an analytic Jacobian).
Everything here is heuristic; its outputs are only ever used as *candidate*
data that the rigorous pipeline then validates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from tailflow.headconv import multiplier_matrix
from tailflow.models import BrusselatorModel, BrusselatorParams
from tailflow.tails import Parity

__all__ = ["GalerkinConfig", "ApproxOrbit", "GalerkinSystem",
           "find_periodic_orbit", "bundled_seed"]


# approximate periodic points used to seed the search (coefficients of the
# leading odd modes, one list per component)
_SEEDS = {
    "B2.0": {
        "params": ("0.2", "0.02", "1", "2"),
        "u": [6.999e-1, -8.170e-2, -5.377e-3, 1.325e-2, 1.050e-3,
              -2.585e-4, -1.764e-6, 5.029e-7, 2.779e-8],
        "v": [3.869, 1.136, 1.017e-1, -9.291e-3, -1.297e-3,
              1.960e-4, 1.993e-5, -4.109e-6, -3.147e-7],
        "period": 7.6967,
    },
    "B2.71": {
        "params": ("1", "1/64", "1", "2.71"),
        "u": [0.43, -0.0231361, -0.00129933, 7.48643e-5, 7.466799e-6,
              -2.998759e-7, -3.89921e-8, 1.15918e-9, 1.98398e-10],
        "v": [7.85996, 1.59666, 0.091348, -0.0041776, -4.73146e-4,
              1.66984e-5, 2.42261e-6, -6.5405e-8, -1.23104e-8],
        "period": 10.4549,
    },
}


def bundled_seed(name: str) -> dict:
    return _SEEDS[name]


@dataclass
class GalerkinConfig:
    params: BrusselatorParams
    n: int = 59                       # highest sine mode tracked
    parity: Parity = Parity.ODD
    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "LSODA"
    transient: float = 60.0
    return_tol: float = 1e-10
    max_returns: int = 80
    fd_step: float = 1e-6


@dataclass
class ApproxOrbit:
    x_star: np.ndarray
    period: float
    alpha: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    residual: float
    cycle: int = 1

    def to_json(self):
        return {
            "x_star": self.x_star.tolist(),
            "period": self.period,
            "alpha": self.alpha.tolist(),
            "eigvecs": [row.tolist() for row in self.eigvecs],
            "eigvals_abs": np.abs(self.eigvals).tolist(),
            "residual": self.residual,
            "cycle": self.cycle,
        }

    @classmethod
    def from_json(cls, d):
        return cls(np.array(d["x_star"]), d["period"], np.array(d["alpha"]),
                   np.array([np.array(r) for r in d["eigvecs"]]),
                   np.array(d["eigvals_abs"]), d["residual"],
                   d.get("cycle", 1))


class GalerkinSystem:
    """Float-arithmetic projected Brusselator on the active (odd) modes."""

    def __init__(self, cfg: GalerkinConfig):
        self.cfg = cfg
        p = cfg.params
        n = cfg.n
        if cfg.parity is Parity.ODD:
            self.modes = np.arange(1, n + 1, 2)
        else:
            self.modes = np.arange(1, n + 1)
        self.n = n
        self.nm = len(self.modes)
        self.dim = 2 * self.nm
        k = np.arange(1, n + 1, dtype=float)
        self.lam_u = -(p.d1.mid * k * k + (p.B.mid + 1.0))
        self.lam_v = -(p.d2.mid * k * k)
        self.A = p.A.mid
        self.B = p.B.mid

    def scatter(self, x):
        u = np.zeros(self.n)
        v = np.zeros(self.n)
        idx = self.modes - 1
        u[idx] = x[:self.nm]
        v[idx] = x[self.nm:]
        return u, v

    def gather(self, u, v):
        idx = self.modes - 1
        return np.concatenate([u[idx], v[idx]])

    def _cube(self, u, v):
        m = self.n
        # cosine series of u^2 (indices 0..2m)
        c0 = 0.5 * float(np.dot(u, u))
        full = np.correlate(u, u, mode="full")     # lags -(m-1)..(m-1)
        s12 = np.zeros(2 * m)
        s12[:m - 1] = 2.0 * full[m:]
        conv = np.convolve(u, u)
        s3 = np.zeros(2 * m)
        s3[1:2 * m] = conv[:2 * m - 1]
        w = 0.5 * (s12 - s3)
        # sine series of w * v (indices 1..m)
        t1 = np.correlate(v, w[:m], mode="full")[m:]        # sum w_i v_{i+k}
        t1 = np.pad(t1, (0, m - len(t1)))
        wpad = np.concatenate([w, np.zeros(m + 1)])
        t2 = np.array([np.dot(wpad[k:k + m], v) for k in range(1, m + 1)])
        conv2 = np.convolve(w[:m], v)
        t3 = np.zeros(m)
        t3[1:] = conv2[:m - 1]
        return c0 * v + 0.5 * (t1 - t2 + t3)

    def rhs(self, t, x):
        u, v = self.scatter(x)
        nterm = self._cube(u, v)
        fu = self.lam_u * u + nterm
        fu[0] += self.A
        fv = self.lam_v * v + self.B * u - nterm
        return self.gather(fu, fv)

    def jac(self, t, x):
        u, v = self.scatter(x)
        c0w = 0.5 * float(np.dot(u, u))
        full = np.correlate(u, u, mode="full")
        m = self.n
        s12 = np.zeros(2 * m)
        s12[:m - 1] = 2.0 * full[m:]
        conv = np.convolve(u, u)
        s3 = np.zeros(2 * m)
        s3[1:2 * m] = conv[:2 * m - 1]
        w = 0.5 * (s12 - s3)
        fully = np.correlate(u, v, mode="full")
        s12y = np.zeros(2 * m)
        s12y[:m - 1] = fully[m:] + np.correlate(v, u, mode="full")[m:]
        convy = np.convolve(u, v)
        s3y = np.zeros(2 * m)
        s3y[1:2 * m] = convy[:2 * m - 1]
        y = 0.5 * (s12y - s3y)
        c0y = 0.5 * float(np.dot(u, v))
        mw = multiplier_matrix(c0w, c0w, w, w.copy()).mid
        my = 2.0 * multiplier_matrix(c0y, c0y, y, y.copy()).mid
        idx = self.modes - 1
        mw = mw[np.ix_(idx, idx)]
        my = my[np.ix_(idx, idx)]
        nm = self.nm
        out = np.zeros((2 * nm, 2 * nm))
        out[:nm, :nm] = my + np.diag(self.lam_u[idx])
        out[:nm, nm:] = mw
        out[nm:, :nm] = -my + self.B * np.eye(nm)
        out[nm:, nm:] = -mw + np.diag(self.lam_v[idx])
        return out

    def integrate(self, x0, span, dense=False, events=None):
        return solve_ivp(self.rhs, span, x0, method=self.cfg.method,
                         jac=self.jac if self.cfg.method in ("LSODA", "BDF", "Radau") else None,
                         rtol=self.cfg.rtol, atol=self.cfg.atol,
                         dense_output=dense, events=events)

    def field_at(self, x):
        return self.rhs(0.0, x)


def _next_crossing(sys: GalerkinSystem, x0, alpha, x_ref, t_max=60.0,
                   t_min=1e-3):
    """Integrate until the section alpha.(x - x_ref) = 0 is crossed upward."""
    sol0 = sys.integrate(x0, (0.0, t_min))
    x1 = sol0.y[:, -1]

    def ev(t, y):
        return float(np.dot(alpha, y - x_ref))
    ev.terminal = True
    ev.direction = 1.0
    sol = solve_ivp(sys.rhs, (t_min, t_max), x1, method=sys.cfg.method,
                    jac=sys.jac, rtol=sys.cfg.rtol, atol=sys.cfg.atol,
                    events=ev)
    if len(sol.t_events[0]) == 0:
        raise RuntimeError("no section crossing found")
    return float(sol.t_events[0][0]), sol.y_events[0][0]


def _rephase_to_seed(sys: GalerkinSystem, x_star, period, x0_seed):
    """Slide x_star along its own orbit to the phase closest to the seed:
    the phase where the first coordinate matches the seed's, on the branch
    minimizing the second component's mismatch."""
    from scipy.optimize import brentq
    sol = sys.integrate(x_star, (0.0, period), dense=True)
    ts = np.linspace(0.0, period, 8000)
    u1 = np.array([sol.sol(t)[0] for t in ts])
    target = x0_seed[0]
    crossings = np.where(np.diff(np.sign(u1 - target)))[0]
    if len(crossings) == 0:
        return x_star
    best = None
    for i in crossings:
        t_at = brentq(lambda t: sol.sol(t)[0] - target, ts[i], ts[i + 1])
        x = sol.sol(t_at)
        miss = abs(x[sys.nm] - x0_seed[sys.nm])
        if best is None or miss < best[0]:
            best = (miss, x)
    return best[1]


def find_periodic_orbit(cfg: GalerkinConfig,
                        seed: Optional[dict] = None,
                        transient: Optional[float] = None,
                        with_jacobian: bool = True) -> ApproxOrbit:
    """Iterate the numeric return map from a seed until it converges; then
    estimate the period, section normal and return-map eigenvectors."""
    sys = GalerkinSystem(cfg)
    if seed is None:
        seed = _SEEDS["B2.0"]
    x0 = np.zeros(sys.dim)
    nu = min(len(seed["u"]), sys.nm)
    x0[:nu] = seed["u"][:nu]
    x0[sys.nm:sys.nm + nu] = seed["v"][:nu]

    # the search section passes through the seed point, so the converged
    # fixed point lands at the seed's phase on the orbit
    x_ref = x0.copy()
    f = sys.field_at(x_ref)
    alpha = f / np.linalg.norm(f)

    tr = cfg.transient if transient is None else transient
    if tr > 0:
        sol = sys.integrate(x0, (0.0, tr))
        x0 = sol.y[:, -1]

    xs = [x0]
    times = []
    cycle = 1
    for k in range(cfg.max_returns):
        t, x1 = _next_crossing(sys, xs[-1], alpha, x_ref)
        times.append(t)
        xs.append(x1)
        if k >= 1 and np.max(np.abs(xs[-1] - xs[-2])) < cfg.return_tol:
            cycle = 1
            break
        if k >= 3 and np.max(np.abs(xs[-1] - xs[-3])) < cfg.return_tol:
            # near a period doubling the map converges by alternation: a
            # "2-cycle" whose two points coincide macroscopically is a slowly
            # approached fixed point
            if np.max(np.abs(xs[-1] - xs[-2])) < 1e-3:
                cycle = 1
            else:
                cycle = 2
            break
    else:
        raise RuntimeError("return map did not converge (non-attracting?)")

    x_star = xs[-1]
    period = sum(times[-cycle:])
    if cycle == 1:
        x_star = _rephase_to_seed(sys, x_star, period, x0_seed=np.concatenate(
            [np.pad(seed["u"][:nu], (0, sys.nm - nu)),
             np.pad(seed["v"][:nu], (0, sys.nm - nu))]))
    fstar = sys.field_at(x_star)
    alpha = fstar / np.linalg.norm(fstar)

    def pmap(x):
        x1 = x
        for _ in range(cycle):
            _, x1 = _next_crossing(sys, x1, alpha, x_star,
                                   t_max=2.0 * period + 5.0,
                                   t_min=0.45 * period / cycle)
        return x1

    h = cfg.fd_step
    p0 = pmap(x_star)
    residual = float(np.max(np.abs(p0 - x_star)))
    if not with_jacobian:
        return ApproxOrbit(x_star, float(period), alpha,
                           np.zeros((sys.dim, 0)), np.zeros(0), residual,
                           cycle)
    jac = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        dx = np.zeros(sys.dim)
        dx[j] = h
        jac[:, j] = (pmap(x_star + dx) - p0) / h
    vals, vecs = np.linalg.eig(jac)
    order = np.argsort(-np.abs(vals))
    vals = vals[order]
    vecs = vecs[:, order]
    cols = []
    seen_conj = set()
    for j in range(sys.dim):
        if j in seen_conj:
            continue
        if abs(vals[j].imag) > 1e-14:
            cols.append(np.real(vecs[:, j]))
            cols.append(np.imag(vecs[:, j]))
            for j2 in range(j + 1, sys.dim):
                if j2 not in seen_conj and np.isclose(vals[j2], vals[j].conj()):
                    seen_conj.add(j2)
                    break
        else:
            cols.append(np.real(vecs[:, j]))
        if len(cols) >= sys.dim:
            break
    basis = np.array(cols[:sys.dim]).T
    return ApproxOrbit(x_star, float(period), alpha, basis,
                       vals[:sys.dim], residual, cycle)
