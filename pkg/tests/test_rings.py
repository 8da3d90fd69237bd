import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jclean.catalog import CATALOG_SPECS, DEFAULT_CATALOG, catalog_ring
from jclean.errors import CapExceeded, HypothesisError, RingConstructionError
from jclean.rings import (
    RingSpec,
    analyze,
    build_ring,
    commutativity_witness,
    is_weakly_bleached,
    j_s_set,
    load_ring_spec,
    truncated_power_series,
    verify_ring_axioms,
)


def names(R, idxs):
    return {R.name(i) for i in idxs}


# --- construction ----------------------------------------------------------


def test_modular_integers_arithmetic():
    R = build_ring(RingSpec(kind="modular-integers", n=4))
    assert R.size == 4
    assert R.a(2, 3) == 1
    assert R.m(2, 2) == 0


def test_quotient_polynomial_t_squared():
    R = build_ring(RingSpec(kind="quotient-polynomial", p=2, modulus=(0, 0, 1)))
    assert [R.name(i) for i in range(4)] == ["0", "1", "t", "1+t"]
    t = R.element("t")
    assert R.m(t, t) == R.zero


def test_f4_is_a_field():
    R = catalog_ring("f4")
    an = analyze(R)
    assert len(an.units) == 3 and an.jacobson == {0}


def test_twist_ring_tables_are_a_noncommutative_local_ring():
    R = catalog_ring("twist")
    assert R.size == 16
    assert verify_ring_axioms(R).passed
    an = analyze(R)
    assert an.is_local and not an.is_commutative
    assert names(R, an.jacobson) == {"0", "x", "wx", "w^2x"}
    assert names(R, an.center) == {"0", "1"}
    # x a = a^2 x
    x, w = R.element("x"), R.element("w")
    assert R.m(x, w) == R.m(R.m(w, w), x)
    assert R.m(x, x) == R.zero


@pytest.mark.parametrize("spec, message", [
    (RingSpec(kind="modular-integers", n=1), "n"),
    (RingSpec(kind="quotient-polynomial", p=4, modulus=(0, 1)), "prime"),
    (RingSpec(kind="quotient-polynomial", p=2, modulus=(1, 1, 0)), "monic"),
    (RingSpec(kind="explicit-tables", add=((0, 1), (1,)), mul=((0, 0), (0, 1)), zero=0, one=1), "ragged"),
    (RingSpec(kind="explicit-tables", add=((0, 1), (1, 2)), mul=((0, 0), (0, 1)), zero=0, one=1), "outside"),
])
def test_malformed_specs_name_the_constraint(spec, message):
    with pytest.raises(RingConstructionError, match=message):
        build_ring(spec)


def test_spec_json_round_trip(tmp_path):
    spec = CATALOG_SPECS["f2t2"]
    path = tmp_path / "ring.json"
    path.write_text(json.dumps(spec.to_json()))
    again = load_ring_spec(str(path))
    R1, R2 = build_ring(spec), build_ring(again)
    assert np.array_equal(R1.mul, R2.mul) and np.array_equal(R1.add, R2.add)


def test_spec_file_syntax_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"kind": "modular-integers",\n "n": }')
    with pytest.raises(RingConstructionError, match="line 2"):
        load_ring_spec(str(path))


def test_unknown_spec_field_is_rejected():
    with pytest.raises(RingConstructionError):
        RingSpec.from_json({"kind": "modular-integers", "n": 4, "bogus": 1})


# --- axioms ----------------------------------------------------------------


@pytest.mark.parametrize("name", list(CATALOG_SPECS))
def test_catalog_rings_satisfy_axioms(name):
    assert verify_ring_axioms(catalog_ring(name)).passed


def test_zero_multiplication_fails_identity_law():
    add = tuple(tuple((i + j) % 2 for j in range(2)) for i in range(2))
    mul = ((0, 0), (0, 0))
    R = build_ring(RingSpec(kind="explicit-tables", add=add, mul=mul, zero=0, one=1))
    report = verify_ring_axioms(R)
    assert not report.passed
    law, witness = report.first()
    assert "identity" in law and witness == (1, 1)


def test_axiom_cap_refuses_large_rings():
    with pytest.raises(CapExceeded, match="cap 8"):
        verify_ring_axioms(catalog_ring("z9"), cap=8)


def test_commutativity_probe_on_twist():
    R = catalog_ring("twist")
    a, b = commutativity_witness(R)
    assert R.m(a, b) != R.m(b, a)
    assert commutativity_witness(catalog_ring("z4")) is None


# --- analysis --------------------------------------------------------------


def test_analyze_z4():
    R = catalog_ring("z4")
    an = analyze(R)
    assert an.units == {1, 3}
    assert an.jacobson == {0, 2}
    assert an.idempotents == {0, 1}
    assert an.is_local and an.is_commutative
    assert an.residue_size == 2


def test_z2_is_a_local_field():
    an = analyze(catalog_ring("z2"))
    assert an.jacobson == {0} and an.is_local


def test_z6_is_not_local():
    an = analyze(catalog_ring("z6"))
    assert not an.is_local
    assert set(an.locality_witness) == {2, 3}


@pytest.mark.parametrize("name", list(CATALOG_SPECS))
def test_analysis_invariants(name):
    R = catalog_ring(name)
    an = analyze(R)
    assert not (an.units & an.jacobson)
    for j in an.jacobson:
        assert R.a(R.one, j) in an.units
        for r in range(R.size):
            assert R.a(j, r) in an.jacobson or r not in an.jacobson
            assert R.m(r, j) in an.jacobson and R.m(j, r) in an.jacobson
    if an.is_local:
        assert an.units == set(range(R.size)) - an.jacobson
        assert an.nilpotents <= an.jacobson
    assert {R.zero, R.one} <= an.idempotents
    for u, inv in an.inverse.items():
        assert R.m(u, inv) == R.one == R.m(inv, u)


@pytest.mark.parametrize("s, expected", [(1, {0, 2}), (2, {0, 1, 2, 3}), (0, {0, 1, 2, 3})])
def test_j_s_over_z4(s, expected):
    R = catalog_ring("z4")
    assert j_s_set(R, analyze(R), s) == expected


@pytest.mark.parametrize("name", list(CATALOG_SPECS))
def test_j_s_equals_j_s_squared(name):
    R = catalog_ring(name)
    an = analyze(R)
    for s in an.center:
        assert j_s_set(R, an, s) == j_s_set(R, an, R.m(s, s))


def test_j_s_refuses_non_central_s():
    R = catalog_ring("twist")
    with pytest.raises(HypothesisError):
        j_s_set(R, analyze(R), R.element("w"))


@pytest.mark.parametrize("name", ["z2", "z3", "z4", "z8", "z9", "f2t2", "f3t2", "f4"])
def test_commutative_local_rings_are_weakly_bleached(name):
    R = catalog_ring(name)
    assert is_weakly_bleached(R, analyze(R)) == (True, None)


def test_twist_ring_bleaching_is_recorded():
    R = catalog_ring("twist")
    flag, witness = is_weakly_bleached(R, analyze(R))
    assert flag is True and witness is None


def test_bleaching_needs_a_local_ring():
    R = catalog_ring("z6")
    with pytest.raises(HypothesisError):
        is_weakly_bleached(R, analyze(R))


# --- truncated power series ------------------------------------------------


def test_series_z2_precision_two():
    ext = truncated_power_series(catalog_ring("z2"), 2)
    an = analyze(ext.ring)
    assert ext.ring.size == 4
    assert names(ext.ring, an.jacobson) == {"0", "x"}


def test_series_z2_precision_three_inverse():
    ext = truncated_power_series(catalog_ring("z2"), 3)
    R = ext.ring
    x = R.element("x")
    assert R.m(x, R.m(x, x)) == R.zero
    an = analyze(R)
    assert R.name(an.inverse[R.element("1+x")]) == "1+x+x^2"


@pytest.mark.parametrize("name", ["z2", "z4", "f2t2", "twist"])
def test_precision_one_is_the_base_ring(name):
    R = catalog_ring(name)
    ext = truncated_power_series(R, 1)
    emb = np.array([ext.embed(r) for r in range(R.size)])
    assert np.array_equal(ext.ring.add[emb][:, emb], emb[R.add])
    assert np.array_equal(ext.ring.mul[emb][:, emb], emb[R.mul])
    assert all(ext.eval_at_zero(ext.embed(r)) == r for r in range(R.size))


@pytest.mark.parametrize("name, N", [("z2", 3), ("z3", 2), ("z4", 2), ("f2t2", 2)])
def test_series_radical_is_constant_term_in_j(name, N):
    R = catalog_ring(name)
    ext = truncated_power_series(R, N)
    J0 = analyze(R).jacobson
    an = analyze(ext.ring)
    assert an.is_local
    assert an.jacobson == {i for i in range(ext.ring.size) if ext.eval_at_zero(i) in J0}


def test_series_precision_must_be_positive():
    with pytest.raises(RingConstructionError):
        truncated_power_series(catalog_ring("z2"), 0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(DEFAULT_CATALOG), st.data())
def test_eval_at_zero_is_a_ring_map(name, data):
    R = catalog_ring(name)
    if R.size > 4:
        return
    ext = truncated_power_series(R, 2)
    S = ext.ring
    x = data.draw(st.integers(0, S.size - 1))
    y = data.draw(st.integers(0, S.size - 1))
    ev = ext.eval_at_zero
    assert ev(S.a(x, y)) == R.a(ev(x), ev(y))
    assert ev(S.m(x, y)) == R.m(ev(x), ev(y))
