"""Shared test utilities: selector sampling and brute-force series oracles.

A *selector* of a TailVector is a concrete real sequence choosing one point
from every coefficient interval (head and tail).  Soundness tests sample
selectors, apply the exact pointwise/functional operation, and assert the
result lies inside the computed enclosure.
"""

import numpy as np

from tailflow.intervals import Interval, IntervalMatrix, IntervalVector
from tailflow.models import LambdaSpec, PdeState
from tailflow.tails import Kind, Parity, TailVector


class DiagonalLinearModel:
    """Pure linear test system x_i' = lambda_i x_i with lambda_i = -(a i^2 + b)."""

    ncomp = 1
    component_names = ("x",)
    parity = Parity.NONE

    def __init__(self, a=1.0, b=0.0):
        self.lam = (LambdaSpec(Interval.point(a), Interval.point(b)),)

    def apply_f(self, state: PdeState) -> PdeState:
        return PdeState(tuple(TailVector.zeros(c.n, c.s, c.kind, c.parity)
                              for c in state.components))

    def apply_f2(self, p: PdeState, q: PdeState) -> PdeState:
        return self.apply_f(p)

    def rhs_head_bounds(self, state, f=None):
        n = state[0].n
        lam = self.lam[0].head(np.arange(1, n + 1))
        return (lam * state[0].head,)

    def mode_rhs_bound(self, state, comp, i, f=None):
        return self.lam[0].at(i) * state[0].coeff(i)

    def zero_state(self, n, s):
        return PdeState((TailVector.zeros(n, s, Kind.SINE, self.parity),))


def sample_selector(tv: TailVector, rng: np.random.Generator, upto: int):
    """Concrete coefficients x_1..x_upto with x_i in V_i; zero beyond is a
    valid member whenever the tail interval contains zero."""
    c = tv.coeffs(upto)
    t = rng.random(upto)
    x = c.lo + t * (c.hi - c.lo)
    x = np.clip(x, c.lo, c.hi)
    const = None
    if tv.kind is Kind.COSINE:
        t0 = rng.random()
        const = tv.const.lo + t0 * (tv.const.hi - tv.const.lo)
    return x, const


def contains_coeffs(tv: TailVector, coeffs, slack: float = 0.0,
                    const: float = None) -> bool:
    """Check a concrete coefficient array (indices 1..len) against tv."""
    m = len(coeffs)
    c = tv.coeffs(m)
    ok = bool(np.all(c.lo - slack <= coeffs) and np.all(coeffs <= c.hi + slack))
    if const is not None and tv.const is not None:
        ok = ok and (tv.const.lo - slack <= const <= tv.const.hi + slack)
    return ok


def rand_tail_vector(rng: np.random.Generator, n: int, s: float,
                     kind: Kind = Kind.SINE, parity: Parity = Parity.NONE,
                     scale: float = 1.0, tail_scale: float = 1.0,
                     zero_tail: bool = False) -> TailVector:
    mid = rng.normal(scale=scale, size=n)
    rad = np.abs(rng.normal(scale=0.3 * scale, size=n))
    lo, hi = mid - rad, mid + rad
    idx = np.arange(1, n + 1)
    if parity is Parity.ODD:
        lo[idx % 2 == 0] = 0.0
        hi[idx % 2 == 0] = 0.0
    elif parity is Parity.EVEN:
        lo[idx % 2 == 1] = 0.0
        hi[idx % 2 == 1] = 0.0
    if zero_tail:
        clo = chi = 0.0
    else:
        a, b = sorted(rng.normal(scale=tail_scale, size=2))
        clo, chi = a, b
    const = None
    if kind is Kind.COSINE:
        c = rng.normal(scale=scale)
        const = Interval(c - 0.1, c + 0.1)
    return TailVector(IntervalVector(lo, hi), clo, chi, s, kind, parity, const)


# ---------------------------------------------------------------------------
# dense convolution oracles (plain float arithmetic on selectors)
# ---------------------------------------------------------------------------

def _corr_at_lag(u, v, kmax):
    """c_k = sum_i u_{i+k} v_i for k = 1..kmax (1-based mode arrays)."""
    n = len(u)
    full = np.correlate(u, v, mode="full")  # lags -(n-1)..(n-1), u shifted
    out = np.zeros(kmax)
    avail = min(kmax, n - 1)
    if avail > 0:
        out[:avail] = full[n:n + avail]
    return out


def dense_sin_times_sin(u, v):
    """Exact cosine coefficients of (sum u_i sin ix)(sum v_i sin ix).

    Returns (c0, c[1..2N]):
      (uv)_0 = 1/2 sum u_i v_i
      (uv)_k = 1/2 [ sum u_{i+k} v_i + sum u_i v_{i+k} - sum_{i<k} u_i v_{k-i} ]
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    nu = len(u)
    kmax = 2 * nu
    c0 = 0.5 * float(np.dot(u, v))
    s1 = _corr_at_lag(u, v, kmax)
    s2 = _corr_at_lag(v, u, kmax)
    conv = np.convolve(u, v)               # index k-2 <-> sum_{i<k} u_i v_{k-i}
    s3 = np.zeros(kmax)
    s3[1:min(kmax, len(conv) + 1)] = conv[:min(kmax - 1, len(conv))]
    return c0, 0.5 * (s1 + s2 - s3)


def dense_cos_times_sin(c0, u, v):
    """Exact sine coefficients of (c0 + sum u_i cos ix)(sum v_i sin ix).

    (uv)_k = c0 v_k + 1/2 [ sum u_i v_{i+k} - sum u_{i+k} v_i
                            + sum_{i<k} u_i v_{k-i} ]
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    n = max(len(u), len(v))
    u = np.pad(u, (0, n - len(u)))
    v = np.pad(v, (0, n - len(v)))
    kmax = 2 * n
    s1 = _corr_at_lag(v, u, kmax)          # sum u_i v_{i+k}
    s2 = _corr_at_lag(u, v, kmax)          # sum u_{i+k} v_i
    conv = np.convolve(u, v)
    s3 = np.zeros(kmax)
    s3[1:min(kmax, len(conv) + 1)] = conv[:min(kmax - 1, len(conv))]
    vk = np.zeros(kmax)
    vk[:n] = v
    return c0 * vk + 0.5 * (s1 - s2 + s3)


def dense_cube(u, v):
    """Sine coefficients of u^2 v via the two dense product identities."""
    c0, w = dense_sin_times_sin(u, u)
    return dense_cos_times_sin(c0, w, np.pad(np.asarray(v, float),
                                             (0, len(w) - len(v))))


def dense_cube_triple(u, v):
    """Independent oracle: the triple sum
    N(u,v)_k = 1/4 sum_{i1+i2+i3=k, ij != 0} u_|i1| u_|i2| v_|i3| sgn(-i1 i2 i3),
    for small supports only."""
    nu = len(u)
    nout = 3 * nu
    out = np.zeros(nout)
    rng_idx = [i for i in range(-nu, nu + 1) if i != 0]
    for i1 in rng_idx:
        for i2 in rng_idx:
            for i3 in rng_idx:
                k = i1 + i2 + i3
                if 1 <= k <= nout:
                    sgn = -np.sign(i1 * i2 * i3)
                    out[k - 1] += 0.25 * u[abs(i1) - 1] * u[abs(i2) - 1] * v[abs(i3) - 1] * sgn
    return out


def sine_coeffs_of_product_function(coeffs_fn, m, grid=20001):
    """Sine coefficients b_1..b_m of a function on (0,pi) by Simpson quadrature.
    coeffs_fn: vectorized f(x).  Oracle-grade accuracy ~1e-10 for smooth f."""
    from scipy.integrate import simpson
    x = np.linspace(0.0, np.pi, grid)
    fx = coeffs_fn(x)
    out = np.empty(m)
    for i in range(1, m + 1):
        out[i - 1] = (2.0 / np.pi) * simpson(fx * np.sin(i * x), x=x)
    return out


class DiagonalLinearField:
    """Inclusion-solver test field x' = diag(lam) x + const (nonlin == 0)."""

    def __init__(self, lam, const=None):
        lam = np.asarray(lam, dtype=float)
        self.dim = len(lam)
        self.lam = IntervalVector.point(lam)
        self.const = (IntervalVector.zeros(self.dim) if const is None
                      else IntervalVector.point(np.asarray(const, float)))

    def with_extra_const(self, extra):
        f = DiagonalLinearField(self.lam.mid)
        f.const = self.const + extra
        return f

    def nonlin(self, x):
        return IntervalVector.zeros(self.dim) + self.const

    def eval(self, x):
        return self.lam * x + self.nonlin(x)

    def flow_jets(self, x, order, need_jac=True):
        jets = [x]
        for j in range(order):
            nxt = jets[j] * self.lam
            if j == 0:
                nxt = nxt + self.const
            inv = Interval(1.0, 1.0) / Interval.point(float(j + 1))
            jets.append(nxt * inv)
        return jets, None, None, None

    def jet_coeff(self, uj, vj, j):
        return uj[j]

    def dg_matrices(self, wj, yj, upto):
        out = []
        z = np.zeros((self.dim, self.dim))
        for a in range(upto + 1):
            if a == 0:
                out.append(IntervalMatrix(np.diag(self.lam.lo),
                                          np.diag(self.lam.hi)))
            else:
                out.append(IntervalMatrix(z, z.copy()))
        return out


class LinearHeadField(DiagonalLinearField):
    """Single-component head field over sine modes 1..n (nonlin == 0)."""

    def __init__(self, spec: LambdaSpec, n: int):
        self.spec = spec
        self.n = n
        self.modes = np.arange(1, n + 1)
        self.nm = n
        lamv = spec.head(self.modes)
        super().__init__(lamv.mid)
        self.lam = lamv

    def with_extra_const(self, extra):
        f = LinearHeadField(self.spec, self.n)
        f.const = self.const + extra
        return f

    def scatter(self, xlo, xhi):
        return (xlo.copy(), xhi.copy()), (None, None)

    def gather(self, ulo, uhi, vlo, vhi):
        return IntervalVector(ulo, uhi)


class LinearPdeModel:
    """Full-system linear model x_i' = lambda_i x_i (one component)."""

    ncomp = 1
    component_names = ("x",)
    parity = Parity.NONE

    def __init__(self, a=1.0, b=0.0):
        self.lam = (LambdaSpec(Interval.point(a), Interval.point(b)),)

    def apply_f(self, state: PdeState) -> PdeState:
        return PdeState(tuple(TailVector.zeros(c.n, c.s, c.kind, c.parity)
                              for c in state.components))

    def apply_f2(self, p, q):
        return self.apply_f(p)

    def rhs_head_bounds(self, state, f=None):
        n = state[0].n
        lam = self.lam[0].head(np.arange(1, n + 1))
        return (lam * state[0].head,)

    def mode_rhs_bound(self, state, comp, i, f=None):
        return self.lam[0].at(i) * state[0].coeff(i)

    def zero_state(self, n, s):
        return PdeState((TailVector.zeros(n, s, Kind.SINE, self.parity),))
