import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circleprev.errors import LengthMismatch, SchemaError
from circleprev.group import compose_many
from circleprev.lifting import Lifting, cr_metric, evaluate
from circleprev.measure_lab import (
    BoxUnion,
    box_union_from_dict,
    box_union_to_dict,
    ccc_apply,
    ccc_coefficients,
    ccc_partial,
    grid_functionals,
    invariance_check,
    product_projection_measure,
    reflect_box_union,
)
from circleprev.group import Reflection

from conftest import random_lifting

SIN1 = math.sin(1.0)


# -- CCC ------------------------------------------------------------------

def test_second_coefficient():
    c = ccc_coefficients(5)
    assert c.coefficients[1] == pytest.approx(SIN1 / (math.pi**2 - 1), rel=1e-15)
    assert c.coefficients[1] == pytest.approx(0.0948714, abs=1e-7)


def test_third_coefficient():
    c = ccc_coefficients(5)
    expected = SIN1 / (4 * math.pi**2 * (1 - 1 / math.pi**2) * (1 - 1 / (4 * math.pi**2)))
    assert c.coefficients[2] == pytest.approx(expected, rel=1e-14)


def test_first_partial_product():
    # 1 - 1/pi^2 = 0.8986788...; the quoted 0.8986829 is off in the sixth place
    assert ccc_coefficients(3).partial_products[0] == pytest.approx(1 - 1 / math.pi**2, abs=1e-16)


def test_ten_thousand_terms():
    c = ccc_coefficients(10**4)
    assert c.product_gap <= 1e-4
    # tail of the Euler product: log(p_N / sin 1) = -sum_{i>N} log(1 - lam_i) ~ 1/(pi^2 N)
    assert c.product_gap == pytest.approx(SIN1 / (math.pi**2 * 10**4), rel=1e-3)
    assert abs(c.coefficient_sum - 1) <= 1e-4


def test_product_decreasing_positive():
    p = ccc_coefficients(2000).partial_products
    assert np.all(np.diff(p) < 0) and p[-1] > SIN1


def test_coefficient_consistency():
    c = ccc_coefficients(10**4)
    j = np.arange(1, c.n_terms)
    lhs = c.coefficients[j] * c.partial_products[j - 1]
    assert np.max(np.abs(lhs / (SIN1 * c.lambdas[j - 1]) - 1)) <= 1e-12


def test_partial_sums_below_one_and_telescoping():
    c = ccc_coefficients(500)
    sums = np.cumsum(c.coefficients)
    assert np.all(sums <= 1.0)
    # sum_{j<N} coeff_j = sin(1) / p_{N-1}
    assert sums[-1] == pytest.approx(SIN1 / c.partial_products[-2], rel=1e-13)


def test_normalised_weights_convex():
    w = ccc_coefficients(300).normalized
    assert np.all(w > 0) and math.fsum(w) == 1.0


def test_equal_witnesses_fixed():
    w = Lifting(0.4, ((1, 0.02, 0.01),))
    assert cr_metric(ccc_apply(ccc_coefficients(20), [w] * 20), w, 256) <= 1e-14


def test_two_terms_is_one_reflection():
    c = ccc_coefficients(2)
    w1, w2 = Lifting(0.1, ((1, 0.01, 0.0),)), Lifting(0.8, ((2, 0.0, 0.02),))
    direct = compose_many([Reflection(c.lambdas[0], w2)])(w1)
    assert cr_metric(ccc_partial(c, [w1, w2]), direct, 256) <= 1e-15


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_matches_literal_composition(n):
    rng = np.random.default_rng(n)
    ws = [random_lifting(rng) for _ in range(n)]
    c = ccc_coefficients(n)
    literal = compose_many(c.reflections(ws))(ws[0]) if n > 1 else ws[0]
    assert cr_metric(ccc_partial(c, ws), literal, 512) <= 1e-10
    assert cr_metric(ccc_apply(c, ws), literal, 512) <= 1e-10


def test_alternating_shift():
    n = 9
    ID = Lifting.identity()
    ws = [ID if j % 2 == 0 else ID.shifted(1.0) for j in range(n)]
    c = ccc_coefficients(n)
    out = ccc_apply(c, ws)
    assert out.c0 == pytest.approx(c.normalized[1::2].sum(), abs=1e-15)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        ccc_apply(ccc_coefficients(3), [Lifting.identity()] * 2)


# -- boxes ----------------------------------------------------------------

def test_reflection_identity():
    bu = BoxUnion(2, [[(0, 1), (2, 3)]])
    out = reflect_box_union(bu, 0.0, [5, 5])
    assert np.array_equal(out.boxes[0], bu.boxes[0])


def test_reflection_scales_unit_box():
    out = reflect_box_union(BoxUnion(3, [[(0, 1)] * 3]), 0.5, [0, 0, 0])
    assert np.array_equal(out.boxes[0], np.array([[0, 0.5]] * 3))


def test_reflection_swaps_endpoints():
    out = reflect_box_union(BoxUnion(1, [[(0, 1)]]), 2.0, [3.0])
    assert out.boxes[0].tolist() == [[5.0, 6.0]]


def test_measure_examples():
    assert product_projection_measure(BoxUnion(3, [[(0, 1)] * 3])) == 1.0
    stacked = BoxUnion(3, [[(0, 1), (0, 1), (0, 1)], [(1, 2), (0, 1), (0, 1)]])
    assert product_projection_measure(stacked) == 2.0
    assert product_projection_measure(BoxUnion(2, [])) == 0.0


def test_invariance_examples():
    bu = BoxUnion(2, [[(0, 1), (0, 1)]])
    assert invariance_check(bu, 0.0, [1, 1])[2] == 1.0
    assert invariance_check(bu, 0.5, [1, 1])[2] == 0.25
    flat = BoxUnion(2, [[(0, 1), (0.5, 0.5)]])
    before, after, ratio = invariance_check(flat, 0.3, [2, 2])
    assert before == after == 0.0 and math.isnan(ratio)


def test_overlapping_boxes_normalised():
    bu = BoxUnion(2, [[(0, 2), (0, 2)], [(1, 3), (1, 3)]])
    vol = sum(np.prod(b[:, 1] - b[:, 0]) for b in bu.boxes)
    assert vol == pytest.approx(7.0)
    for i, a in enumerate(bu.boxes):
        for b in bu.boxes[i + 1:]:
            assert not np.all(np.minimum(a[:, 1], b[:, 1]) > np.maximum(a[:, 0], b[:, 0]))
    assert product_projection_measure(bu) == 9.0


boxes = st.integers(1, 4).flatmap(lambda d: st.tuples(
    st.just(d),
    st.lists(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 3)), min_size=d, max_size=d),
             min_size=1, max_size=4)))


@given(boxes, st.floats(-3, 3).filter(lambda l: abs(l - 1) > 1e-3), st.floats(-5, 5))
def test_scaling_law(drawn, lam, hval):
    d, raw = drawn
    bu = BoxUnion(d, [[(lo, lo + w) for lo, w in b] for b in raw])
    before, after, _ = invariance_check(bu, lam, [hval] * d)
    assert after == pytest.approx(abs(1 - lam) ** d * before, rel=1e-10)


def test_grid_functionals_commute_with_reflection():
    F = Lifting(0.2, ((1, 0.05, 0.0),))
    H = Lifting(0.7, ((2, 0.0, 0.03),))
    lam, n = -1.5, 8
    lhs = grid_functionals(Reflection(lam, H)(F), n)
    rhs = (1 - lam) * grid_functionals(F, n) + lam * grid_functionals(H, n)
    assert np.allclose(lhs, rhs, atol=1e-14, rtol=0)
    assert np.array_equal(grid_functionals(F, 4), evaluate(F, np.arange(5) / 4))


# -- JSON -----------------------------------------------------------------

def test_box_json_round_trip():
    bu = BoxUnion(2, [[(0, 1), (2, 3)], [(4, 5), (6, 7)]])
    back = box_union_from_dict(json.loads(json.dumps(box_union_to_dict(bu))))
    assert back.dim == 2 and all(np.array_equal(a, b) for a, b in zip(back.boxes, bu.boxes))


@pytest.mark.parametrize("doc", [
    {"dim": 0, "boxes": []},
    {"dim": 2, "boxes": [[{"lo": 0, "hi": 1}]]},
    {"dim": 1, "boxes": [[{"lo": 1, "hi": 0}]]},
    {"dim": 1, "boxes": [[{"lo": 0}]]},
    {"boxes": []},
])
def test_box_json_rejects(doc):
    with pytest.raises(SchemaError):
        box_union_from_dict(doc)
