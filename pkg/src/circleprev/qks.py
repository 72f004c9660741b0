"""Quantitative Kupka-Smale estimates along a type II probe.

``E_gamma^n`` collects n-periodic points whose multiplier is within ``gamma`` of 1;
``Z_gamma^n`` is the set of probe parameters producing them.  Its Lebesgue measure
is bounded by ``c_n * gamma / sigma`` with ``c_n = 1 / b_n`` and
``b_n = sum_{i=0}^{n-1} u^(n-i+1)``, ``u`` the smallest slope met along the orbits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SigmaZero
from .evaluation import EvaluationPoint, branches_for, solve_lambda
from .lifting import unit_grid
from .probe import Probe

DEFAULT_SLACK = 0.05
MERGE_FACTOR = 4.0


@dataclass(frozen=True)
class _GridSolution:
    """All solvable grid points of one ``(probe, n)``; reused across gammas."""

    n: int
    x_grid: int
    index: np.ndarray
    branch: np.ndarray
    lam: np.ndarray
    d_x: np.ndarray
    d_lambda: np.ndarray
    min_slope: np.ndarray


@dataclass(frozen=True)
class HyperbolicityScan:
    probe: Probe
    n: int
    gamma: float
    x_grid: int
    index: np.ndarray  # grid index of each entry
    branch: np.ndarray
    lam: np.ndarray
    d_x: np.ndarray
    d_lambda: np.ndarray
    min_slope: np.ndarray

    @property
    def entries(self) -> list[EvaluationPoint]:
        xs = self.index / self.x_grid
        return [
            EvaluationPoint(float(x), self.n, float(l), float(dx), float(dl),
                            float((1.0 - dx) / dl), int(m))
            for x, l, dx, dl, m in zip(xs, self.lam, self.d_x, self.d_lambda, self.branch)
        ]

    def __len__(self) -> int:
        return int(self.lam.size)


@dataclass(frozen=True)
class MeasureEstimate:
    measured: float
    intervals: list
    u: float
    b_n: float
    c_n: float
    bound: float
    merge_gap: float


def _orbit_min_slope(p: Probe, xs, lam, n):
    y = np.asarray(xs, dtype=float)
    low = np.full(np.broadcast(y, lam).shape, np.inf)
    for _ in range(n):
        low = np.minimum(low, p.slope(y, lam))
        y = p.value(y, lam)
    return low


def _solve_grid(p: Probe, n: int, x_grid: int, branches=None, window=None) -> _GridSolution:
    if p.sigma <= 0.0:
        raise SigmaZero("probe needs a positive certified sigma")
    if branches is None:
        branches = branches_for(p, n, window)
    xs = unit_grid(x_grid)
    a, b = p.domain
    parts = []
    for m in branches:
        lam, dx, dl = solve_lambda(p, xs, n, m, window)
        keep = ~np.isnan(lam) & (lam > a) & (lam < b)
        idx = np.flatnonzero(keep)
        parts.append((idx, np.full(idx.size, m), lam[idx], dx[idx], dl[idx]))
    if parts:
        idx, br, lam, dx, dl = (np.concatenate(c) for c in zip(*parts))
    else:
        idx = br = np.zeros(0, dtype=int)
        lam = dx = dl = np.zeros(0)
    slope = _orbit_min_slope(p, xs[idx], lam, n) if idx.size else np.zeros(0)
    return _GridSolution(n, x_grid, idx, br.astype(int), lam, dx, dl, slope)


def _filter(p: Probe, sol: _GridSolution, gamma: float) -> HyperbolicityScan:
    keep = np.abs(sol.d_x - 1.0) <= gamma
    return HyperbolicityScan(p, sol.n, gamma, sol.x_grid, sol.index[keep], sol.branch[keep],
                             sol.lam[keep], sol.d_x[keep], sol.d_lambda[keep],
                             sol.min_slope[keep])


def scan_E_gamma(p: Probe, n: int, gamma: float, x_grid: int = 16384,
                 branches: Sequence[int] | None = None, window=None) -> HyperbolicityScan:
    """Grid points ``x`` whose solved ``lam = Delta_n(x)`` gives ``|(alpha_lam^n)'(x) - 1| <= gamma``."""
    if not gamma >= 0.0:
        raise ValueError("gamma must be non-negative")
    return _filter(p, _solve_grid(p, n, x_grid, branches, window), gamma)


def default_merge_gap(scan: HyperbolicityScan) -> float:
    """``MERGE_FACTOR`` times the largest lambda step between grid-adjacent entries."""
    if len(scan) < 2:
        return 0.0
    order = np.lexsort((scan.index, scan.branch))
    idx, br, lam = scan.index[order], scan.branch[order], scan.lam[order]
    nxt = (idx[:-1] + 1) == idx[1:]
    same = br[:-1] == br[1:]
    steps = np.abs(np.diff(lam))[nxt & same]
    # periodic wrap: last grid cell back to index 0 on the same branch
    wrap = []
    for m in np.unique(br):
        sel = br == m
        ids = idx[sel]
        if ids[0] == 0 and ids[-1] == scan.x_grid - 1:
            wrap.append(abs(lam[sel][0] - lam[sel][-1]))
    steps = np.concatenate([steps, wrap]) if wrap else steps
    return MERGE_FACTOR * float(steps.max()) if steps.size else 0.0


def merge_points(values, merge_gap: float) -> list[tuple[float, float]]:
    """Sorted values grouped into closed intervals where consecutive gaps are <= merge_gap."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(v) > merge_gap)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [v.size - 1]])
    return [(float(v[s]), float(v[e])) for s, e in zip(starts, ends)]


def qks_constants(u: float, n: int, gamma: float, sigma: float) -> tuple[float, float, float]:
    """``(b_n, c_n, bound)`` with ``b_n = sum_{i<n} u^(n-i+1)``.

    An empty set of points has ``u = inf`` (minimum over nothing), so ``c_n = 0``.
    """
    if math.isinf(u):
        return math.inf, 0.0, 0.0
    b_n = math.fsum(u ** (n - i + 1) for i in range(n))
    c_n = 1.0 / b_n
    return b_n, c_n, c_n * gamma / sigma


def measure_Z(scan: HyperbolicityScan, merge_gap: float | None = None) -> MeasureEstimate:
    """Interval-union estimate of ``m(Z_gamma^n)`` and the theoretical bound."""
    if merge_gap is None:
        merge_gap = default_merge_gap(scan)
    elif merge_gap < 0:
        raise ValueError("merge_gap must be non-negative")
    intervals = merge_points(scan.lam, merge_gap)
    measured = math.fsum(hi - lo for lo, hi in intervals)
    u = float(scan.min_slope.min()) if len(scan) else math.inf
    b_n, c_n, bound = qks_constants(u, scan.n, scan.gamma, scan.probe.sigma)
    return MeasureEstimate(measured, intervals, u, b_n, c_n, bound, merge_gap)


@dataclass
class QKSRow:
    n: int
    gamma: float
    measured: float
    u: float
    b_n: float
    c_n: float
    bound: float
    ratio: float
    holds: bool
    entries: int
    intervals: list = field(repr=False)


@dataclass
class QKSReport:
    sigma: float
    domain: tuple
    x_grid: int
    slack: float
    rows: list
    inverse_b_partial_sums: dict  # gamma -> [sum_{n'<=n} 1/b_n']
    u_above_one: dict  # gamma -> [u > 1 for each n]

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.rows)


def qks_report(p: Probe, n_max: int, gammas: Sequence[float], x_grid: int = 16384,
               branches: Sequence[int] | None = None, slack: float = DEFAULT_SLACK,
               window=None) -> QKSReport:
    """Scan, measure and compare against ``c_n gamma / sigma`` for every ``n <= n_max`` and gamma."""
    rows = []
    partial = {g: [] for g in gammas}
    above = {g: [] for g in gammas}
    for n in range(1, n_max + 1):
        sol = _solve_grid(p, n, x_grid, branches, window)
        for g in gammas:
            est = measure_Z(_filter(p, sol, g))
            if est.bound > 0:
                ratio = est.measured / est.bound
            else:
                ratio = 0.0 if est.measured == 0 else math.inf
            rows.append(QKSRow(n, g, est.measured, est.u, est.b_n, est.c_n, est.bound, ratio,
                               est.measured <= est.bound * (1.0 + slack),
                               int(np.sum(np.abs(sol.d_x - 1.0) <= g)), est.intervals))
            prev = partial[g][-1] if partial[g] else 0.0
            partial[g].append(prev + (1.0 / est.b_n if est.b_n > 0 else math.inf))
            above[g].append(est.u > 1.0)
    return QKSReport(p.sigma, p.domain, x_grid, slack, rows, partial, above)
