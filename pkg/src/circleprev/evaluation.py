"""The n-evaluation map: the parameter at which a point becomes n-periodic.

For a probe ``alpha_lam`` and a point ``x`` we solve
``g(lam) = alpha_lam^n(x) - x - m = 0`` on a fixed integer branch ``m``.  Along a
probe with ``G - F`` of one sign, ``g`` is strictly monotone, so there is at most
one root per branch.  Critical points of the solved ``lam(x)`` are exactly the
degenerate periodic points, where ``(alpha_lam^n)'(x) = 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import WindowOutsideDomain, ZeroLambdaDerivative
from .lifting import Lifting, unit_grid
from .probe import Probe

BISECTION_STEPS = 40
NEWTON_STEPS = 5
CRITICAL_TOL = 1e-10
DEGENERATE_DX_TOL = 1e-6


class DegenerateProbeWarning(UserWarning):
    """Every scanned point is critical (e.g. a rigid-rotation type I probe)."""


@dataclass(frozen=True)
class EvaluationPoint:
    x: float
    n: int
    lam: float
    d_x: float
    d_lambda: float
    delta_prime: float
    branch: int


def orbit_derivative_x(A: Lifting, x, n: int):
    """``(A^n)'(x) = prod_j A'(A^j(x))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    y = np.asarray(x, dtype=float)
    d = np.ones_like(y)
    p = A.periodic
    for _ in range(n):
        d = d * (1.0 + p.value(y, 1))
        y = y + p.value(y)
    return float(d) if np.ndim(x) == 0 else d


def _orbit(p: Probe, x, lam, n: int):
    """End point, x-derivative and lambda-derivative of ``alpha_lam^n`` at ``x``.

    Forward recursion: ``dlam_{k+1} = alpha'(y_k) dlam_k + (G - F)(y_k)``.
    """
    y = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    dx = np.ones(np.broadcast(y, lam).shape)
    dl = np.zeros_like(dx)
    Fp, D = p.F.periodic, p.diff
    for _ in range(n):
        d = D.value(y)
        s = 1.0 + Fp.value(y, 1) + lam * D.value(y, 1)
        dl = s * dl + d
        dx = s * dx
        y = y + Fp.value(y) + lam * d
    return y, dx, dl


def orbit_derivative_lambda(p: Probe, lam: float, x, n: int):
    """``d/dlam alpha_lam^n(x)`` at fixed ``x``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _, _, dl = _orbit(p, x, lam, n)
    return float(dl) if np.ndim(x) == 0 else dl


def _check_window(p: Probe, window):
    if window is None:
        return p.scan_window()
    lo, hi = float(window[0]), float(window[1])
    a, b = p.domain
    if not lo < hi or lo < a - 1e-12 or hi > b + 1e-12:
        raise WindowOutsideDomain(f"window {window} not inside domain {p.domain}")
    return lo, hi


def solve_lambda(p: Probe, xs, n: int, branch: int, window=None):
    """Vectorised root of ``alpha_lam^n(x) - x - branch`` in ``lam`` over ``window``.

    Returns ``(lam, d_x, d_lambda)`` arrays with NaN where the window holds no root.
    """
    lo_w, hi_w = _check_window(p, window)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    # orient g so that it increases with lam
    sgn = 1.0 if p.diff.value(0.0) >= 0 else -1.0

    def g(lam):
        return sgn * (_orbit(p, xs, lam, n)[0] - xs - branch)

    lo = np.full(xs.shape, lo_w)
    hi = np.full(xs.shape, hi_w)
    g_lo, g_hi = g(lo), g(hi)
    ok = (g_lo <= 0.0) & (g_hi >= 0.0)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = g(mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    lam = 0.5 * (lo + hi)
    for _ in range(NEWTON_STEPS):
        y, dx, dl = _orbit(p, xs, lam, n)
        resid = y - xs - branch
        safe = np.where(dl != 0.0, dl, 1.0)
        lam = np.clip(lam - resid / safe, lo_w, hi_w)
    _, dx, dl = _orbit(p, xs, lam, n)
    nan = np.full(xs.shape, np.nan)
    return np.where(ok, lam, nan), np.where(ok, dx, nan), np.where(ok, dl, nan)


def _point(x, n, lam, dx, dl, branch) -> EvaluationPoint:
    dprime = (1.0 - dx) / dl if dl != 0.0 else math.nan
    xr = float(x) - math.floor(x)
    return EvaluationPoint(xr if xr < 1.0 else 0.0, n, lam, dx, dl, dprime, branch)


def eval_map_solve(p: Probe, x: float, n: int, branch: int = 0, window=None):
    """``Delta_n(x)`` on ``branch`` as an :class:`EvaluationPoint`, or None when empty."""
    lam, dx, dl = solve_lambda(p, [x], n, branch, window)
    if math.isnan(lam[0]):
        return None
    return _point(x, n, float(lam[0]), float(dx[0]), float(dl[0]), branch)


def eval_map_derivative(p: Probe, pt: EvaluationPoint) -> float:
    """``Delta_n'(x) = (1 - P_n) / (P_n sum_k (G-F)(alpha^k x) / P_{k+1})``.

    ``P_j`` is the derivative of the j-th iterate at ``x``.
    """
    y = pt.x
    prefix = 1.0
    acc = 0.0
    Fp, D = p.F.periodic, p.diff
    for _ in range(pt.n):
        d = float(D.value(y))
        prefix *= 1.0 + float(Fp.value(y, 1)) + pt.lam * float(D.value(y, 1))
        acc += d / prefix
        y = y + float(Fp.value(y)) + pt.lam * d
    denom = prefix * acc
    if denom == 0.0:
        raise ZeroLambdaDerivative("lambda-derivative of the orbit vanishes")
    return (1.0 - prefix) / denom


def branches_for(p: Probe, n: int, window=None, grid_points: int = 1024) -> list[int]:
    """Integer branches ``m`` hit by ``alpha_lam^n(x) - x`` for ``lam`` in the window."""
    lo, hi = _check_window(p, window)
    xs = unit_grid(grid_points)
    g_lo = _orbit(p, xs, lo, n)[0] - xs
    g_hi = _orbit(p, xs, hi, n)[0] - xs
    low = min(g_lo.min(), g_hi.min())
    high = max(g_lo.max(), g_hi.max())
    return list(range(math.ceil(low), math.floor(high) + 1))


def scan(p: Probe, n: int, branch: int, grid_points: int, window=None):
    """Solve on the periodic x-grid; returns ``(xs, lam, d_x, d_lambda, delta_prime)``."""
    xs = unit_grid(grid_points)
    lam, dx, dl = solve_lambda(p, xs, n, branch, window)
    with np.errstate(invalid="ignore", divide="ignore"):
        dprime = (1.0 - dx) / dl
    return xs, lam, dx, dl, dprime


def critical_points(p: Probe, n: int, branch: int = 0, grid_points: int = 1024,
                    window=None) -> list[EvaluationPoint]:
    """Degenerate periodic points: zeros of ``Delta_n'`` located by sign changes on the grid."""
    xs, lam, dx, dl, dprime = scan(p, n, branch, grid_points, window)
    solved = ~np.isnan(lam)
    if not solved.any():
        return []
    scale = np.nanmax(np.abs(dprime[solved]))
    if scale <= CRITICAL_TOL:
        warnings.warn("every point of the probe is degenerate; no isolated critical points",
                      DegenerateProbeWarning, stacklevel=2)
        return []

    def dprime_at(x):
        pt = eval_map_solve(p, x, n, branch, window)
        if pt is None:
            raise ValueError("lost the branch while refining")
        return pt.delta_prime

    found = []
    N = xs.size
    for i in range(N):
        j = (i + 1) % N
        if not (solved[i] and solved[j]):
            continue
        left, right = dprime[i], dprime[j]
        if left == 0.0:
            x_star = xs[i]
        elif left * right < 0.0:
            x_hi = xs[j] if j else 1.0
            try:
                x_star = brentq(dprime_at, xs[i], x_hi, xtol=1e-15, rtol=1e-15, maxiter=200)
            except ValueError:
                continue
        else:
            continue
        pt = eval_map_solve(p, x_star, n, branch, window)
        if pt is None:
            continue
        if abs(pt.delta_prime) <= CRITICAL_TOL and abs(pt.d_x - 1.0) <= DEGENERATE_DX_TOL:
            found.append(pt)
    found.sort(key=lambda q: q.x)
    # a root landing exactly on a grid point can be reported from both neighbouring cells
    unique = []
    for q in found:
        if not unique or abs(q.x - unique[-1].x) > 1e-12:
            unique.append(q)
    return unique
