"""One-parameter probes ``alpha_lam = (1 - lam) F + lam G`` through the space of lifts.

Type I probes shift ``F`` by a constant (``G = F + k``) and stay diffeomorphisms
for every ``lam``.  Type II probes need ``min |G - F| = sigma > 0`` and are
diffeomorphisms only on a maximal interval ``(a, b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NotADiffeoPath, ProbeError, RegularityMismatch, SchemaError
from .lifting import (
    DEFAULT_GRID,
    Lifting,
    TrigPoly,
    certified_minimum,
    combine,
    has_fixed_point,
    lifting_from_dict,
    lifting_to_dict,
    unit_grid,
    validate_diffeo,
)

UNBOUNDED = (-math.inf, math.inf)
DEFAULT_LAMBDA_WINDOW = (-10.0, 10.0)


@dataclass(frozen=True)
class Probe:
    F: Lifting
    G: Lifting
    kind: str  # "I" or "II"
    k: float | None
    sigma: float
    domain: tuple
    diff: TrigPoly  # G - F

    @classmethod
    def type_one(cls, F: Lifting, k: float, grid_points: int = DEFAULT_GRID) -> "Probe":
        if not 0.0 < k <= 1.0:
            raise ProbeError(f"type I shift must lie in (0, 1], got {k}")
        diff = TrigPoly(k, [], [], [])
        domain = _path_domain(F, diff, "I", grid_points)
        return cls(F, F.shifted(k), "I", float(k), float(k), domain, diff)

    @classmethod
    def type_two(cls, F: Lifting, G: Lifting, grid_points: int = DEFAULT_GRID) -> "Probe":
        if F.r != G.r:
            raise RegularityMismatch("F and G have different regularity r")
        sigma = sigma_of(F, G, grid_points)
        if sigma <= 0.0:
            raise ProbeError("type II probe needs min |G - F| > 0")
        diff = G.periodic - F.periodic
        return cls(F, G, "II", None, sigma, _path_domain(F, diff, "II", grid_points), diff)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.domain[0]) or math.isfinite(self.domain[1])

    def scan_window(self, window=DEFAULT_LAMBDA_WINDOW) -> tuple:
        """The domain clamped to ``window`` (used for unbounded type I domains)."""
        return (max(self.domain[0], window[0]), min(self.domain[1], window[1]))

    # Vectorised path evaluation; ``lam`` broadcasts against ``x``.
    def value(self, x, lam):
        x = np.asarray(x, dtype=float)
        return x + self.F.periodic.value(x) + lam * self.diff.value(x)

    def slope(self, x, lam):
        x = np.asarray(x, dtype=float)
        return 1.0 + self.F.periodic.value(x, 1) + lam * self.diff.value(x, 1)


@dataclass(frozen=True)
class FoliationSample:
    lam: float
    x: np.ndarray
    y: np.ndarray
    in_h0: bool


def alpha_at(p: Probe, lam: float) -> Lifting:
    """The lifting ``(1 - lam) F + lam G``."""
    if p.kind == "I":
        return p.F.shifted(lam * p.k)
    return combine([1.0 - lam, lam], [p.F, p.G])


def sigma_of(F: Lifting, G: Lifting, grid_points: int = DEFAULT_GRID) -> float:
    """Certified lower bound for ``min_x |G(x) - F(x)|``; 0 when no bound is positive."""
    d = G.periodic - F.periodic
    vals = d.value(unit_grid(grid_points))
    curv = d.derivative_bound(2)
    if np.all(vals > 0):
        lower = certified_minimum(vals, curv)
    elif np.all(vals < 0):
        lower = certified_minimum(-vals, curv)
    else:
        return 0.0
    return max(lower, 0.0)


def domain_interval(p: Probe, grid_points: int = DEFAULT_GRID) -> tuple:
    """Maximal ``(a, b)`` around 0 on which ``alpha_lam' > 0``.

    ``alpha_lam'(x) = F'(x) + lam D'(x)`` is affine in ``lam``, so each grid point
    gives a half-line of admissible ``lam``; the binding point is then polished
    by a bounded 1-D optimisation over its neighbouring cells.
    """
    return _path_domain(p.F, p.diff, p.kind, grid_points)


def _path_domain(F: Lifting, diff: TrigPoly, kind: str, grid_points: int) -> tuple:
    if not validate_diffeo(F, grid_points).is_diffeo:
        raise NotADiffeoPath("F is not a certified diffeomorphism lift")
    if kind == "I":
        return UNBOUNDED
    # a near-flat difference sends the ratio to +-inf, which is the right limit
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        xs = unit_grid(grid_points)
        h = 1.0 / grid_points
        fp = 1.0 + F.periodic.value(xs, 1)
        dp = diff.value(xs, 1)

        def ratio(x):
            return -(1.0 + F.periodic.value(x, 1)) / diff.value(x, 1)

        a, b = -math.inf, math.inf
        pos, neg = dp > 0, dp < 0
        if pos.any():
            r = np.where(pos, -fp / np.where(pos, dp, 1.0), -np.inf)
            i = int(np.argmax(r))
            res = minimize_scalar(lambda x: -ratio(x), bounds=(xs[i] - h, xs[i] + h),
                                  method="bounded", options={"xatol": 1e-13})
            a = max(float(r[i]), -float(res.fun)) if diff.value(res.x, 1) > 0 else float(r[i])
        if neg.any():
            r = np.where(neg, -fp / np.where(neg, dp, -1.0), np.inf)
            i = int(np.argmin(r))
            res = minimize_scalar(ratio, bounds=(xs[i] - h, xs[i] + h),
                                  method="bounded", options={"xatol": 1e-13})
            b = min(float(r[i]), float(res.fun)) if diff.value(res.x, 1) < 0 else float(r[i])
    return (a, b)


def foliation_samples(p: Probe, lambdas: Sequence[float],
                      grid_points: int = 256) -> list[FoliationSample]:
    """Graphs of ``alpha_lam`` on ``[0, 1]`` with a per-lambda diffeomorphism flag."""
    xs = np.linspace(0.0, 1.0, grid_points)
    out = []
    for lam in lambdas:
        A = alpha_at(p, lam)
        ys = (1.0 - lam) * p.F(xs) + lam * p.G(xs)
        out.append(FoliationSample(float(lam), xs, ys, validate_diffeo(A).is_diffeo))
    return out


# -- JSON ------------------------------------------------------------------

def probe_from_dict(doc, grid_points: int = DEFAULT_GRID) -> Probe:
    if not isinstance(doc, dict) or "F" not in doc or "kind" not in doc:
        raise SchemaError("probe needs 'F' and 'kind'")
    F = lifting_from_dict(doc["F"])
    kind = doc["kind"]
    if kind == "I":
        k = doc.get("k")
        if isinstance(k, bool) or not isinstance(k, (int, float)) or not math.isfinite(k):
            raise SchemaError("type I probe needs a finite 'k'")
        return Probe.type_one(F, float(k), grid_points)
    if kind == "II":
        if "G" not in doc:
            raise SchemaError("type II probe needs 'G'")
        return Probe.type_two(F, lifting_from_dict(doc["G"]), grid_points)
    raise SchemaError(f"unknown probe kind {kind!r}")


def probe_to_dict(p: Probe) -> dict:
    doc = {"F": lifting_to_dict(p.F), "kind": p.kind}
    if p.kind == "I":
        doc["k"] = p.k
    else:
        doc["G"] = lifting_to_dict(p.G)
    return doc


def domain_to_dict(p: Probe, grid_points: int = DEFAULT_GRID) -> dict:
    a, b = domain_interval(p, grid_points)
    return {
        "a": a if math.isfinite(a) else None,
        "b": b if math.isfinite(b) else None,
        "unbounded": not (math.isfinite(a) and math.isfinite(b)),
        "sigma": p.sigma,
        "has_fixed_point": has_fixed_point(p.F, grid_points),
    }
