import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circleprev.errors import NotADiffeoPath, ProbeError, SchemaError
from circleprev.lifting import Lifting, eval_derivative, evaluate, validate_diffeo
from circleprev.probe import (
    UNBOUNDED,
    Probe,
    alpha_at,
    domain_interval,
    domain_to_dict,
    foliation_samples,
    probe_from_dict,
    probe_to_dict,
    sigma_of,
)

from conftest import AMP, fixed_point_map, rigid, small_liftings

# the pair drawn as a lambda-foliation
FOL_F = rigid(0.2 * math.pi)
FOL_G = Lifting(0.2, ((1, AMP, 0.0),))


def test_alpha_endpoints(probe_II):
    assert alpha_at(probe_II, 0.0) == probe_II.F
    assert alpha_at(probe_II, 1.0).isclose(probe_II.G, 1e-15)


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0, -0.3, 1.7])
def test_foliation_formula(lam):
    p = Probe.type_two(FOL_F, FOL_G)
    xs = np.arange(256) / 256
    expected = xs + 0.2 * (math.pi + lam * (1 - math.pi)) + lam / (2.1 * math.pi) * np.sin(2 * math.pi * xs)
    assert np.max(np.abs(evaluate(alpha_at(p, lam), xs) - expected)) <= 1e-12


def test_type_one_alpha_shifts_c0(probe_I):
    a = alpha_at(probe_I, 0.05157)
    assert a.harmonics == probe_I.F.harmonics
    assert a.c0 == pytest.approx(0.15157, abs=1e-15)


@given(st.floats(-3, 3), st.floats(-2, 2))
def test_affinity(lam, x):
    p = Probe.type_two(fixed_point_map(), rigid(0.2 * math.pi), 256)
    lhs = evaluate(alpha_at(p, lam), x)
    rhs = (1 - lam) * evaluate(p.F, x) + lam * evaluate(p.G, x)
    assert lhs == pytest.approx(rhs, abs=8 * np.spacing(abs(rhs) + 4))


@given(st.floats(-10, 10), st.floats(0, 1))
def test_type_one_derivative_independent_of_lambda(lam, x):
    p = Probe.type_one(fixed_point_map(), 0.5, 256)
    assert eval_derivative(alpha_at(p, lam), x, 1) == eval_derivative(p.F, x, 1)


# -- domain ---------------------------------------------------------------

def test_reference_domain():
    p = Probe.type_two(fixed_point_map(), rigid(0.2 * math.pi), 2**14)
    a, b = domain_interval(p, 2**14)
    # |1 - lam| * 2/2.1 < 1  <=>  lam in (-0.05, 2.05)
    assert a == pytest.approx(-0.05, abs=1e-6)
    assert b == pytest.approx(2.05, abs=1e-6)


def test_type_one_domain_unbounded(probe_I):
    assert domain_interval(probe_I) == UNBOUNDED
    assert not probe_I.bounded
    assert probe_I.scan_window() == (-10.0, 10.0)


def test_degenerate_type_two_rejected():
    with pytest.raises(ProbeError):
        Probe.type_two(fixed_point_map(), fixed_point_map())


def test_non_diffeo_start_rejected():
    with pytest.raises(NotADiffeoPath):
        Probe.type_two(Lifting(0.0, ((1, 1.0, 0.0),)), rigid(3.0))


@pytest.mark.parametrize("k", [0.0, -0.5, 1.5])
def test_type_one_k_range(k):
    with pytest.raises(ProbeError):
        Probe.type_one(fixed_point_map(), k)


def test_domain_correctness(probe_II):
    a, b = probe_II.domain
    for lam in np.linspace(a, b, 22)[1:-1]:
        assert validate_diffeo(alpha_at(probe_II, lam), 2**14).is_diffeo
    assert not validate_diffeo(alpha_at(probe_II, a - 0.01)).is_diffeo
    assert not validate_diffeo(alpha_at(probe_II, b + 0.01)).is_diffeo


@given(small_liftings(), small_liftings())
def test_domain_contains_unit_interval(F, H):
    G = H.shifted(F.c0 - H.c0 + 0.5)
    try:
        p = Probe.type_two(F, G, 512)
    except ProbeError:
        return
    a, b = p.domain
    assert a < 0.0 and b > 1.0


# -- sigma ----------------------------------------------------------------

def test_sigma_constant_gap(F_fix):
    assert sigma_of(F_fix, F_fix.shifted(0.5)) == 0.5


def test_sigma_reference_pair():
    exact = 0.2 * math.pi - 0.1 - 1 / (2.1 * math.pi)
    s = sigma_of(fixed_point_map(), rigid(0.2 * math.pi), 2**14)
    assert s <= exact
    assert s == pytest.approx(exact, abs=1e-6)


def test_sigma_of_equal_maps(F_fix):
    assert sigma_of(F_fix, F_fix) == 0.0


@given(small_liftings(), small_liftings())
def test_sigma_is_a_lower_bound(F, G):
    s = sigma_of(F, G, 512)
    xs = np.arange(8192) / 8192
    assert s <= np.min(np.abs(evaluate(G, xs) - evaluate(F, xs))) + 1e-15


# -- foliation ------------------------------------------------------------

def test_foliation_lambda_zero_is_F(probe_II):
    (s,) = foliation_samples(probe_II, [0.0], 64)
    assert np.array_equal(s.y, evaluate(probe_II.F, s.x)) and s.in_h0


def test_foliation_endpoint_is_G():
    p = Probe.type_two(FOL_F, FOL_G)
    (s,) = foliation_samples(p, [1.0], 64)
    assert np.allclose(s.y, evaluate(FOL_G, s.x), atol=1e-15, rtol=0)


def test_foliation_flags_lambda_three():
    p = Probe.type_two(FOL_F, FOL_G)
    flags = {s.lam: s.in_h0 for s in foliation_samples(p, [0.0, 1.0, 3.0])}
    # min slope 1 - 2*3/2.1 < 0 at lambda = 3
    assert flags == {0.0: True, 1.0: True, 3.0: False}


# -- JSON -----------------------------------------------------------------

def test_probe_json_round_trip(probe_I, probe_II):
    for p in (probe_I, probe_II):
        back = probe_from_dict(json.loads(json.dumps(probe_to_dict(p))))
        assert back.kind == p.kind and back.F == p.F and back.G == p.G


def test_domain_dict(probe_I):
    d = domain_to_dict(probe_I)
    assert d["a"] is None and d["b"] is None and d["unbounded"] and d["sigma"] == 1.0


@pytest.mark.parametrize("doc", [
    {"kind": "I", "k": 1},
    {"F": {"c0": 0.1}, "kind": "III"},
    {"F": {"c0": 0.1}, "kind": "I"},
    {"F": {"c0": 0.1}, "kind": "II"},
])
def test_probe_json_rejects(doc):
    with pytest.raises(SchemaError):
        probe_from_dict(doc)
