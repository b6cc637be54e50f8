"""Classical integration comparators and test oracles.

* ``euler_integrate``: left-endpoint Riemann accumulation on a fixed grid.
* ``rk45_integrate``: Dormand-Prince 5(4) embedded pair with PI step control
  and the standard quartic dense-output interpolant, applied to F' = f(t).
* ``reference_quadrature``: adaptive Simpson bisection with Richardson
  extrapolation, robust to isolated kinks.
* ``mc_box_integrate``: plain Monte Carlo over a box, driven by a splitmix64
  stream so results are reproducible bit for bit across platforms.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    ShapeError,
    StiffnessError,
    ToleranceNotMetError,
)


@dataclass
class QuadratureResult:
    """Estimate plus bookkeeping: evaluation count, Monte Carlo standard
    error (None for deterministic rules), achieved tolerance (None for MC)."""

    estimate: float
    n_evals: int
    stderr: float = None
    achieved_tol: float = None


@dataclass
class SampledFunction:
    """Piecewise-linear interpolant of samples on strictly increasing abscissae."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.ys = np.asarray(self.ys, dtype=np.float64)
        if self.xs.ndim != 1 or self.ys.ndim != 1 or self.xs.shape != self.ys.shape:
            raise ShapeError(
                f"samples must be matching 1-D arrays, got {self.xs.shape} and {self.ys.shape}"
            )
        if self.xs.shape[0] < 2:
            raise ShapeError("sampled function needs at least two samples")
        if not np.all(np.diff(self.xs) > 0):
            raise ShapeError("sample abscissae must be strictly increasing")
        if not (np.all(np.isfinite(self.xs)) and np.all(np.isfinite(self.ys))):
            raise ShapeError("samples must be finite")

    @property
    def domain(self):
        return float(self.xs[0]), float(self.xs[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < self.xs[0]) or np.any(t_arr > self.xs[-1]):
            raise DomainError(
                f"evaluation outside sampled domain [{self.xs[0]}, {self.xs[-1]}]"
            )
        out = np.interp(t_arr, self.xs, self.ys)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def euler_integrate(f, a, b, steps) -> SampledFunction:
    """Left-endpoint Riemann partial sums of f on a uniform grid.

    Returns the accumulation curve: F(a + k h) = h * sum_{i<k} f(a + i h).
    """
    steps = int(steps)
    if steps < 1:
        raise ShapeError(f"steps must be >= 1, got {steps}")
    a = float(a)
    b = float(b)
    grid = np.linspace(a, b, steps + 1)
    h = (b - a) / steps
    values = np.array([float(f(t)) for t in grid[:-1]])
    partials = np.concatenate([[0.0], h * np.cumsum(values)])
    return SampledFunction(grid, partials)


# -- Dormand-Prince 5(4) -------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and embedded 4th order weights
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# quartic dense-output coefficients (Shampine)
_DP_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.17  # 1/5 - 0.75 * beta
_PI_BETA = 0.04


class Rk45Curve:
    """Accepted solution nodes plus a quartic dense-output interpolant."""

    def __init__(self, ts, ys, segments, n_evals):
        self.ts = np.asarray(ts)
        self.ys = np.asarray(ys)
        self._segments = segments  # (t0, h, y0, q) per accepted step
        self.n_evals = n_evals

    @property
    def n_steps(self):
        return len(self._segments)

    def endpoint(self):
        return float(self.ys[-1])

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        lo, hi = self.ts[0], self.ts[-1]
        if np.any(t_arr < min(lo, hi)) or np.any(t_arr > max(lo, hi)):
            raise DomainError(f"evaluation outside solved interval [{lo}, {hi}]")
        out = np.empty_like(t_arr)
        for i, tv in enumerate(t_arr):
            k = int(np.searchsorted(self.ts, tv, side="right")) - 1
            k = min(max(k, 0), len(self._segments) - 1)
            t0, h, y0, q = self._segments[k]
            theta = (tv - t0) / h
            powers = np.array([theta, theta**2, theta**3, theta**4])
            out[i] = y0 + h * (q @ powers)
        return float(out[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def rk45_integrate(f, a, b, rel_tol=1e-8, abs_tol=1e-10) -> Rk45Curve:
    """Solve F' = f(t), F(a) = 0 on [a, b] with the Dormand-Prince 5(4) pair.

    PI step-size control; the first trial step spans the whole interval and
    the controller shrinks it as needed, so exactly integrable right-hand
    sides finish in one accepted step.
    """
    if rel_tol <= 0 or abs_tol <= 0:
        raise ShapeError("tolerances must be positive")
    a = float(a)
    b = float(b)
    if b <= a:
        raise ShapeError(f"need a < b, got [{a}, {b}]")
    span = b - a
    n_evals = 0

    def eval_f(t):
        nonlocal n_evals
        n_evals += 1
        return float(f(t))

    t = a
    y = 0.0
    h = span
    k1 = eval_f(t)  # FSAL: reused across accepted steps
    err_old = 1e-4
    ts = [a]
    ys = [0.0]
    segments = []
    while t < b:
        if h < 1e-14 * span:
            raise StiffnessError(
                f"step size underflow near t={t} (h={h}); integrand appears stiff"
            )
        if t + h > b:
            h = b - t
        k = np.empty(7)
        k[0] = k1
        for s in range(1, 7):
            # F' depends on t only, so stage values need no y combination
            k[s] = eval_f(t + _DP_C[s] * h)
        y_new = y + h * float(_DP_B @ k)
        err_est = h * float(_DP_E @ k)
        scale = abs_tol + rel_tol * max(abs(y), abs(y_new))
        err_norm = abs(err_est) / scale
        if err_norm <= 1.0:
            q = _DP_P.T @ k
            segments.append((t, h, y, q))
            t = t + h
            y = y_new
            ts.append(t)
            ys.append(y)
            k1 = k[6]  # stage 7 sits at t + h
            if err_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err_old**_PI_BETA * err_norm**-_PI_ALPHA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_old = max(err_norm, 1e-4)
            h *= factor
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err_norm**-0.2)
    return Rk45Curve(ts, ys, segments, n_evals)


# -- adaptive Simpson ----------------------------------------------------------

_WIDTH_FLOOR = 1e-12


def reference_quadrature(f, a, b, tol) -> QuadratureResult:
    """Adaptive Simpson quadrature with bisection down to width 1e-12.

    The per-interval acceptance test is the classic |S2 - S1| <= 15 tol with
    Richardson extrapolation on acceptance; the budget halves per split.
    Raises ToleranceNotMetError (carrying the best estimate) if some interval
    hits the width floor before meeting its budget.
    """
    if tol <= 0:
        raise ShapeError("tolerance must be positive")
    a = float(a)
    b = float(b)
    if a == b:
        return QuadratureResult(0.0, 1, achieved_tol=0.0)
    sign = 1.0
    if a > b:
        a, b = b, a
        sign = -1.0
    n_evals = 0

    def eval_f(t):
        nonlocal n_evals
        n_evals += 1
        return float(f(t))

    fa = eval_f(a)
    m0 = 0.5 * (a + b)
    fm = eval_f(m0)
    fb = eval_f(b)
    s0 = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    achieved = 0.0
    floor_hit = False
    stack = [(a, m0, b, fa, fm, fb, s0, tol)]
    while stack:
        lo, mid, hi, flo, fmid, fhi, s, budget = stack.pop()
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = eval_f(lm)
        frm = eval_f(rm)
        s_left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        s_right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        s2 = s_left + s_right
        err = s2 - s
        if abs(err) <= 15.0 * budget:
            total += s2 + err / 15.0
            achieved += abs(err) / 15.0
            continue
        if (mid - lo) <= _WIDTH_FLOOR:
            total += s2 + err / 15.0
            achieved += abs(err)
            floor_hit = True
            continue
        stack.append((lo, lm, mid, flo, flm, fmid, s_left, 0.5 * budget))
        stack.append((mid, rm, hi, fmid, frm, fhi, s_right, 0.5 * budget))
    if floor_hit:
        raise ToleranceNotMetError(
            f"quadrature hit the {_WIDTH_FLOOR} width floor before reaching tol={tol}",
            estimate=sign * total,
            achieved=achieved,
        )
    return QuadratureResult(sign * total, n_evals, achieved_tol=achieved)


# -- Monte Carlo ---------------------------------------------------------------

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64_uniform(seed, count) -> np.ndarray:
    """``count`` doubles in [0, 1) from the splitmix64 stream seeded at ``seed``.

    The k-th draw mixes state seed + k * 2^64/phi (wrapping); the top 53 bits
    of the mixed word form the double.  Pure uint64 arithmetic, so the stream
    is identical on every platform.
    """
    k = np.arange(1, int(count) + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + k * _SM64_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SM64_M1
        z = (z ^ (z >> np.uint64(27))) * _SM64_M2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def mc_box_integrate(f, box, samples, seed=0) -> QuadratureResult:
    """Plain Monte Carlo estimate of the box integral of ``f``.

    ``f`` must accept an (n_samples, dim) array and return (n_samples,)
    values.  ``box`` is anything with per-dimension (lo, hi) bounds, e.g.
    ``closed_form.Box`` or a sequence of pairs.  Deterministic per seed.
    """
    samples = int(samples)
    if samples < 2:
        raise ShapeError(f"need at least 2 samples, got {samples}")
    bounds = np.asarray(getattr(box, "bounds", box), dtype=np.float64)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ShapeError(f"box bounds must be (dim, 2)-shaped, got {bounds.shape}")
    dim = bounds.shape[0]
    lo = bounds[:, 0]
    width = bounds[:, 1] - lo
    u = splitmix64_uniform(seed, samples * dim).reshape(samples, dim)
    points = lo + width * u
    values = np.asarray(f(points), dtype=np.float64)
    if values.shape != (samples,):
        raise ShapeError(
            f"integrand must map ({samples}, {dim}) points to ({samples},) values, "
            f"got {values.shape}"
        )
    volume = float(np.prod(width))
    estimate = volume * float(np.mean(values))
    stderr = abs(volume) * float(np.std(values, ddof=1)) / math.sqrt(samples)
    return QuadratureResult(estimate, samples, stderr=stderr)
