"""Degree-one lifts of circle maps as finite trigonometric perturbations of the identity.

A :class:`Lifting` stores ``F(x) = x + c0 + sum_k s_k sin(2 pi k x) + c_k cos(2 pi k x)``.
The perturbation is 1-periodic, so ``F(x + 1) = F(x) + 1`` holds by construction and
every derivative is available in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OrderOutOfRange, RegularityMismatch, SchemaError

TWO_PI = 2.0 * math.pi
DEFAULT_GRID = 4096
DEFAULT_R = 2


def _as_output(x_in, value):
    if np.ndim(x_in) == 0:
        return float(value)
    return value


class TrigPoly:
    """A real 1-periodic trigonometric polynomial ``c0 + sum s_k sin + c_k cos``.

    Used for the periodic part of a lifting and for differences ``G - F`` of two
    liftings, which are periodic functions rather than liftings.
    """

    __slots__ = ("c0", "ks", "s", "c")

    def __init__(self, c0, ks, s, c):
        self.c0 = float(c0)
        self.ks = np.asarray(ks, dtype=float)
        self.s = np.asarray(s, dtype=float)
        self.c = np.asarray(c, dtype=float)

    @property
    def omegas(self):
        return TWO_PI * self.ks

    def value(self, x, order=0):
        """Evaluate the ``order``-th derivative at ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.c0 if order == 0 else 0.0)
        if self.ks.size == 0:
            return out
        # reduce to [0,1) before scaling so phases are small
        xr = x - np.floor(x)
        w = self.omegas
        phase = np.multiply.outer(xr, w)
        sn, cs = np.sin(phase), np.cos(phase)
        scale = w**order
        m = order % 4
        if m == 0:
            terms = self.s * sn + self.c * cs
        elif m == 1:
            terms = self.s * cs - self.c * sn
        elif m == 2:
            terms = -(self.s * sn + self.c * cs)
        else:
            terms = -(self.s * cs - self.c * sn)
        return out + terms @ scale

    def derivative_bound(self, order):
        """Upper bound on ``sup |p^(order)|`` from the coefficients (order >= 1)."""
        if self.ks.size == 0:
            return 0.0 if order > 0 else abs(self.c0)
        amp = np.abs(self.s) + np.abs(self.c)
        bound = float(np.sum(self.omegas**order * amp))
        return bound if order > 0 else bound + abs(self.c0)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        ks = np.union1d(self.ks, other.ks)
        s = np.zeros_like(ks)
        c = np.zeros_like(ks)
        for sign, p in ((1.0, self), (-1.0, other)):
            idx = np.searchsorted(ks, p.ks)
            s[idx] += sign * p.s
            c[idx] += sign * p.c
        return TrigPoly(self.c0 - other.c0, ks, s, c)


@dataclass(frozen=True)
class Lifting:
    """Lift ``F(x) = x + c0 + sum_k (s_k sin(2 pi k x) + c_k cos(2 pi k x))``.

    ``harmonics`` is a sequence of ``(k, s_k, c_k)`` triples with distinct positive
    integer frequencies; it is stored sorted by ``k``.  ``r`` is the derivative
    order used by :func:`cr_metric`.
    """

    c0: float = 0.0
    harmonics: tuple = ()
    r: int = DEFAULT_R
    _arrays: TrigPoly = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c0 = float(self.c0)
        if not math.isfinite(c0):
            raise ValueError("c0 must be finite")
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise ValueError(f"regularity r must be an integer >= 1, got {self.r!r}")
        triples = []
        for h in self.harmonics:
            k, s, c = h
            if isinstance(k, bool) or int(k) != k or k < 1:
                raise ValueError(f"frequency must be a positive integer, got {k!r}")
            s, c = float(s), float(c)
            if not (math.isfinite(s) and math.isfinite(c)):
                raise ValueError("harmonic coefficients must be finite")
            triples.append((int(k), s, c))
        ks = [t[0] for t in triples]
        if len(set(ks)) != len(ks):
            raise ValueError("duplicate harmonic frequency")
        triples.sort()
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "harmonics", tuple(triples))
        object.__setattr__(
            self,
            "_arrays",
            TrigPoly(
                c0,
                [t[0] for t in triples],
                [t[1] for t in triples],
                [t[2] for t in triples],
            ),
        )

    @classmethod
    def identity(cls, r: int = DEFAULT_R) -> "Lifting":
        return cls(0.0, (), r)

    @classmethod
    def rotation(cls, c0: float, r: int = DEFAULT_R) -> "Lifting":
        return cls(c0, (), r)

    @property
    def periodic(self) -> TrigPoly:
        """The 1-periodic part ``F(x) - x``."""
        return self._arrays

    @property
    def is_rigid(self) -> bool:
        return not any(s != 0.0 or c != 0.0 for _, s, c in self.harmonics)

    def __call__(self, x):
        return evaluate(self, x)

    def shifted(self, t: float) -> "Lifting":
        """``F + t``."""
        return Lifting(self.c0 + t, self.harmonics, self.r)

    def isclose(self, other: "Lifting", tol: float = 1e-12) -> bool:
        d = other.periodic - self.periodic
        return (
            abs(d.c0) <= tol
            and bool(np.all(np.abs(d.s) <= tol))
            and bool(np.all(np.abs(d.c) <= tol))
        )


@dataclass(frozen=True)
class DiffeoCertificate:
    is_diffeo: bool
    min_derivative: float
    method: str


def combine(weights: Sequence[float], liftings: Sequence[Lifting]) -> Lifting:
    """Coefficient-wise affine combination ``sum w_i F_i`` with ``sum w_i = 1``.

    The identity part carries total weight one by construction, so only the
    periodic coefficients are combined.  Missing harmonics count as zero.
    """
    if len(weights) != len(liftings) or not liftings:
        raise ValueError("need one weight per lifting and at least one lifting")
    r = liftings[0].r
    if any(F.r != r for F in liftings):
        raise RegularityMismatch("liftings have different regularity r")
    c0 = 0.0
    acc: dict[int, list[float]] = {}
    for w, F in zip(weights, liftings):
        c0 += w * F.c0
        for k, s, c in F.harmonics:
            slot = acc.setdefault(k, [0.0, 0.0])
            slot[0] += w * s
            slot[1] += w * c
    return Lifting(c0, tuple((k, s, c) for k, (s, c) in acc.items()), r)


def evaluate(F: Lifting, x):
    """``F(x)``; accepts scalars or numpy arrays."""
    xa = np.asarray(x, dtype=float)
    return _as_output(x, xa + F.periodic.value(xa))


def eval_derivative(F: Lifting, x, order: int):
    """Exact ``order``-th derivative of ``F`` at ``x``; order 0 is :func:`evaluate`."""
    if order < 0 or order > F.r:
        raise OrderOutOfRange(f"order {order} outside [0, {F.r}]")
    if order == 0:
        return evaluate(F, x)
    xa = np.asarray(x, dtype=float)
    val = F.periodic.value(xa, order)
    if order == 1:
        val = val + 1.0
    return _as_output(x, val)


def iterate(F: Lifting, x, n: int):
    """Apply ``F`` to ``x`` ``n`` times."""
    if n < 0:
        raise ValueError("n must be non-negative")
    y = np.asarray(x, dtype=float)
    p = F.periodic
    for _ in range(n):
        y = y + p.value(y)
    return _as_output(x, y)


def project_circle(F: Lifting, x):
    """``F(x) mod 1`` in ``[0, 1)``."""
    y = np.mod(np.asarray(evaluate(F, x), dtype=float), 1.0)
    y = np.where(y >= 1.0, 0.0, y)
    return _as_output(x, y)


def unit_grid(grid_points: int) -> np.ndarray:
    """Periodic grid ``i / N`` on ``[0, 1)``; every point of the circle is within ``h/2``."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    return np.arange(grid_points) / grid_points


def certified_minimum(values: np.ndarray, curvature_bound: float) -> float:
    """Lower bound for the minimum of a smooth periodic function sampled on :func:`unit_grid`.

    Between neighbouring samples the function lies above the chord minus
    ``h**2 / 8 * sup|f''|``.
    """
    values = np.asarray(values, dtype=float)
    h = 1.0 / values.size
    return float(values.min() - h * h / 8.0 * curvature_bound)


def validate_diffeo(F: Lifting, grid_points: int = DEFAULT_GRID) -> DiffeoCertificate:
    """Certify ``F' > 0`` on the circle.

    Uses ``1 - sum 2 pi k (|s_k| + |c_k|)`` when that is positive, otherwise the
    grid minimum of ``F'`` minus a curvature slack.
    """
    p = F.periodic
    first = p.derivative_bound(1)
    if first < 1.0:
        return DiffeoCertificate(True, 1.0 - first, "coefficient-bound")
    xs = unit_grid(grid_points)
    lower = certified_minimum(1.0 + p.value(xs, 1), p.derivative_bound(3))
    return DiffeoCertificate(lower > 0.0, lower, "grid-plus-Lipschitz")


def cr_metric(F: Lifting, G: Lifting, grid_points: int = DEFAULT_GRID) -> float:
    """Grid estimate of ``sum_{i<=r} sup |F^(i) - G^(i)|`` (a lower bound converging to it)."""
    if F.r != G.r:
        raise RegularityMismatch(f"r={F.r} vs r={G.r}")
    d = G.periodic - F.periodic
    xs = unit_grid(grid_points)
    return float(sum(np.max(np.abs(d.value(xs, i))) for i in range(F.r + 1)))


def has_fixed_point(F: Lifting, grid_points: int = DEFAULT_GRID) -> bool:
    """Whether ``F(x) - x`` changes sign (or vanishes) on the grid."""
    d = F.periodic.value(unit_grid(grid_points))
    return bool(d.min() <= 0.0 <= d.max())


# -- JSON ------------------------------------------------------------------

def _finite(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{what} must be a number")
    if not math.isfinite(value):
        raise SchemaError(f"{what} must be finite")
    return float(value)


def lifting_from_dict(doc) -> Lifting:
    if not isinstance(doc, dict):
        raise SchemaError("lifting must be a JSON object")
    extra = set(doc) - {"c0", "r", "harmonics"}
    if extra:
        raise SchemaError(f"unknown lifting keys: {sorted(extra)}")
    if "c0" not in doc:
        raise SchemaError("lifting needs 'c0'")
    c0 = _finite(doc["c0"], "c0")
    r = doc.get("r", DEFAULT_R)
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise SchemaError("r must be an integer >= 1")
    harmonics = doc.get("harmonics", [])
    if not isinstance(harmonics, list):
        raise SchemaError("harmonics must be a list")
    triples, seen = [], set()
    for h in harmonics:
        if not isinstance(h, dict) or "k" not in h:
            raise SchemaError("each harmonic needs a 'k'")
        k = h["k"]
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise SchemaError("k must be a positive integer")
        if k in seen:
            raise SchemaError(f"duplicate harmonic k={k}")
        seen.add(k)
        triples.append((k, _finite(h.get("sin", 0.0), "sin"), _finite(h.get("cos", 0.0), "cos")))
    return Lifting(c0, tuple(triples), r)


def lifting_to_dict(F: Lifting) -> dict:
    return {
        "c0": F.c0,
        "r": F.r,
        "harmonics": [{"k": k, "sin": s, "cos": c} for k, s, c in F.harmonics],
    }

