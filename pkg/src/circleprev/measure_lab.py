"""Finite shadows of the constructive measures.

* Countable convex convolution: the infinite composition of reflections with
  ``lam_i = 1 / (pi^2 i^2)``.  Its weights telescope, and by Euler's sine
  product the leading weight tends to ``sin(1)``.
* The grid push-forward functional on box unions in ``R^(n+1)``: the product of
  the lengths of the coordinate projections, and how a reflection rescales it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, SchemaError
from .group import Reflection
from .lifting import Lifting, combine

SIN1 = math.sin(1.0)


@dataclass(frozen=True)
class CCCCoefficients:
    """Weights of ``... o psi_{lam_2, w_3} o psi_{lam_1, w_2} (w_1)``.

    ``lambdas[i-1] = lam_i`` and ``partial_products[i-1] = p_i = prod_{j<=i} (1 - lam_j)``
    for ``i = 1..n_terms``.  ``coefficients[0] = sin(1)`` weighs ``w_1`` and
    ``coefficients[j] = sin(1) lam_j / p_j`` weighs ``w_{j+1}``.
    """

    n_terms: int
    lambdas: np.ndarray
    partial_products: np.ndarray
    coefficients: np.ndarray

    @property
    def limit(self) -> float:
        return SIN1

    @property
    def product_gap(self) -> float:
        """``|p_N - sin(1)|``."""
        return abs(float(self.partial_products[-1]) - SIN1)

    @property
    def coefficient_sum(self) -> float:
        return math.fsum(self.coefficients)

    @property
    def normalized(self) -> np.ndarray:
        """Truncated weights rescaled to an exact convex combination."""
        w = self.coefficients / self.coefficient_sum
        w[0] = 1.0 - math.fsum(w[1:])
        return w

    def reflections(self, ws: Sequence[Lifting]) -> list[Reflection]:
        """``[psi_{lam_{N-1}, w_N}, ..., psi_{lam_1, w_2}]``, outermost first."""
        return [Reflection(float(self.lambdas[i - 1]), ws[i]) for i in range(len(ws) - 1, 0, -1)]


def ccc_coefficients(n_terms: int) -> CCCCoefficients:
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    i = np.arange(1, n_terms + 1, dtype=float)
    lambdas = 1.0 / (math.pi**2 * i**2)
    products = np.cumprod(1.0 - lambdas)
    coeffs = np.empty(n_terms)
    coeffs[0] = SIN1
    coeffs[1:] = SIN1 * lambdas[:-1] / products[:-1]
    return CCCCoefficients(n_terms, lambdas, products, coeffs)


def ccc_apply(coeffs: CCCCoefficients, ws: Sequence[Lifting]) -> Lifting:
    """Renormalised truncated convolution ``sum_j w_{j+1} coeff_j / sum coeff``."""
    if len(ws) != coeffs.n_terms:
        raise LengthMismatch(f"expected {coeffs.n_terms} liftings, got {len(ws)}")
    return combine(list(coeffs.normalized), list(ws))


def ccc_partial(coeffs: CCCCoefficients, ws: Sequence[Lifting]) -> Lifting:
    """The finite composition in closed form, ``p_{N-1} (w_1 + sum_i lam_i / p_i w_{i+1})``."""
    if len(ws) != coeffs.n_terms:
        raise LengthMismatch(f"expected {coeffs.n_terms} liftings, got {len(ws)}")
    N = coeffs.n_terms
    if N == 1:
        return ws[0]
    lead = float(coeffs.partial_products[N - 2])
    tail = lead * coeffs.lambdas[: N - 1] / coeffs.partial_products[: N - 1]
    return combine([lead] + list(tail), list(ws))


# -- box unions ------------------------------------------------------------

def _overlap(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(np.minimum(a[:, 1], b[:, 1]) > np.maximum(a[:, 0], b[:, 0])))


def _split_disjoint(boxes: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Refine overlapping boxes into the cells of their common breakpoint grid."""
    cuts = [np.unique(np.concatenate([[b[k, 0], b[k, 1]] for b in boxes])) for k in range(dim)]
    cells = set()
    for b in boxes:
        ranges = []
        for k in range(dim):
            lo = int(np.searchsorted(cuts[k], b[k, 0]))
            hi = int(np.searchsorted(cuts[k], b[k, 1]))
            ranges.append(range(lo, hi) if hi > lo else range(lo, lo + 1))
        cells.update(itertools.product(*ranges))
    out = []
    for cell in sorted(cells):
        box = np.empty((dim, 2))
        for k, j in enumerate(cell):
            box[k, 0] = cuts[k][j]
            box[k, 1] = cuts[k][j + 1] if j + 1 < cuts[k].size else cuts[k][j]
        out.append(box)
    return out


class BoxUnion:
    """Finite union of closed axis-aligned boxes in ``R^dim`` with disjoint interiors."""

    def __init__(self, dim: int, boxes: Sequence = ()):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        arrs = []
        for b in boxes:
            a = np.array(b, dtype=float).reshape(dim, 2)
            if np.any(a[:, 0] > a[:, 1]) or not np.all(np.isfinite(a)):
                raise ValueError("box needs finite lo <= hi in every coordinate")
            arrs.append(a)
        if any(_overlap(arrs[i], arrs[j])
               for i in range(len(arrs)) for j in range(i + 1, len(arrs))):
            arrs = _split_disjoint(arrs, dim)
        self.dim = dim
        self.boxes = arrs

    def __len__(self):
        return len(self.boxes)

    def __repr__(self):
        return f"BoxUnion(dim={self.dim}, boxes={len(self.boxes)})"


def reflect_box_union(bu: BoxUnion, lam: float, h: Sequence[float]) -> BoxUnion:
    """Image under ``v -> (1 - lam) v + lam h``, coordinate-wise."""
    if lam == 1.0:
        raise ValueError("lam must differ from 1")
    h = np.asarray(h, dtype=float)
    if h.shape != (bu.dim,):
        raise LengthMismatch(f"h needs {bu.dim} entries")
    out = []
    for b in bu.boxes:
        img = (1.0 - lam) * b + lam * h[:, None]
        out.append(np.sort(img, axis=1))
    return BoxUnion(bu.dim, out)


def _union_length(intervals: np.ndarray) -> float:
    if intervals.size == 0:
        return 0.0
    order = np.argsort(intervals[:, 0])
    total, cur_lo, cur_hi = 0.0, *intervals[order[0]]
    for lo, hi in intervals[order[1:]]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    return total + (cur_hi - cur_lo)


def product_projection_measure(bu: BoxUnion) -> float:
    """``prod_k Leb(projection of the union onto coordinate k)``."""
    if not bu.boxes:
        return 0.0
    stack = np.stack(bu.boxes)  # (boxes, dim, 2)
    return math.prod(_union_length(stack[:, k, :]) for k in range(bu.dim))


def invariance_check(bu: BoxUnion, lam: float, h: Sequence[float]) -> tuple[float, float, float]:
    """``(before, after, after / before)``; the ratio is NaN for a null union."""
    before = product_projection_measure(bu)
    after = product_projection_measure(reflect_box_union(bu, lam, h))
    ratio = after / before if before > 0 else math.nan
    return before, after, ratio


def grid_functionals(F: Lifting, n: int) -> np.ndarray:
    """``(F(0/n), F(1/n), ..., F(n/n))``, the coordinates the box functional lives on."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.asarray(F(np.arange(n + 1) / n))


# -- JSON ------------------------------------------------------------------

def box_union_from_dict(doc) -> BoxUnion:
    if not isinstance(doc, dict) or "dim" not in doc or "boxes" not in doc:
        raise SchemaError("box union needs 'dim' and 'boxes'")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaError("dim must be a positive integer")
    boxes = []
    for b in doc["boxes"]:
        if not isinstance(b, list) or len(b) != dim:
            raise SchemaError(f"each box needs {dim} coordinate ranges")
        rows = []
        for r in b:
            if not isinstance(r, dict) or "lo" not in r or "hi" not in r:
                raise SchemaError("coordinate range needs 'lo' and 'hi'")
            lo, hi = r["lo"], r["hi"]
            for v in (lo, hi):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise SchemaError("box bounds must be finite numbers")
            if lo > hi:
                raise SchemaError("box needs lo <= hi")
            rows.append((float(lo), float(hi)))
        boxes.append(rows)
    return BoxUnion(dim, boxes)


def box_union_to_dict(bu: BoxUnion) -> dict:
    return {
        "dim": bu.dim,
        "boxes": [[{"lo": float(lo), "hi": float(hi)} for lo, hi in b] for b in bu.boxes],
    }
