import csv
import io
import json

import pytest

from jclean.catalog import catalog_ring
from jclean.clean import oracle_decide
from jclean.config import Caps
from jclean.formal import FMatrix, fm_in_jacobson
from jclean.suite import (
    CENSUS_HEADER,
    CHECK_IDS,
    STATUSES,
    CheckReport,
    census,
    census_csv,
    format_table,
    lift_series_check,
    run_all,
    run_check,
    series_precision_for,
    summarize,
)


def test_check_ids_cover_every_numbered_result():
    assert len(CHECK_IDS) == 25 == len(set(CHECK_IDS))
    assert CHECK_IDS[0] == "T2.1" and CHECK_IDS[-1] == "T3.6"


def test_unknown_check(cache):
    with pytest.raises(KeyError):
        run_check("T9.9", catalog_ring("z2"), 1, cache=cache)


# --- examples --------------------------------------------------------------


def test_c2_10_records_the_witness(cache):
    rep = run_check("C2.10", catalog_ring("z2"), 1, cache=cache)
    assert rep.status == "pass"
    assert rep.witness["matrix"] == {"a": "1", "b": "1", "c": "1", "d": "0"}
    assert rep.witness["strongly_J_clean"] is False


def test_t3_6_on_z4(cache):
    rep = run_check("T3.6", catalog_ring("z4"), 1, cache=cache)
    assert rep.status == "pass" and not rep.sampled


def test_t2_16_is_gated_when_s_is_a_unit(cache):
    rep = run_check("T2.16", catalog_ring("z4"), 1, cache=cache)
    assert rep.status == "hypotheses-not-met"
    assert any("not in J" in n for n in rep.notes)


def test_p2_14_notes_the_finite_instance(cache):
    rep = run_check("P2.14", catalog_ring("z4"), 2, cache=cache)
    assert rep.status == "pass" and any("finite" in n for n in rep.notes)


@pytest.mark.parametrize("name", ["z2", "z4", "f2t2"])
def test_every_check_passes_or_is_gated(name, cache):
    R = catalog_ring(name)
    for s in range(R.size):
        for check in CHECK_IDS:
            rep = run_check(check, R, s, cache=cache)
            assert rep.status in ("pass", "hypotheses-not-met"), rep.to_json()
            if rep.status == "fail":
                assert rep.counterexample is not None


def test_run_all_on_a_non_local_ring():
    reports = run_all(["z6"])
    by_check = {}
    for r in reports:
        by_check.setdefault(r.check, set()).add(r.status)
    assert by_check["T2.16"] == {"hypotheses-not-met"}
    assert by_check["L2.8"] == {"hypotheses-not-met"}
    assert "fail" not in {r.status for r in reports}
    assert {r.s for r in reports} == {str(i) for i in range(6)}


def test_run_all_empty_catalog():
    assert run_all([]) == []


def test_run_all_is_deterministic_and_job_independent():
    a = run_all(["z2"], checks=["T2.1", "C2.10", "L2.5"])
    b = run_all(["z2"], checks=["T2.1", "C2.10", "L2.5"], jobs=2)
    strip = lambda reps: [{k: v for k, v in r.to_json().items() if k != "elapsed"} for r in reps]
    assert strip(a) == strip(b)


def test_hypothesis_gate_never_passes_a_non_local_ring(cache):
    R = catalog_ring("z6")
    for check in ("L2.2", "L2.8", "T2.13", "T3.6", "T2.18"):
        assert run_check(check, R, 1, cache=cache).status == "hypotheses-not-met"


# --- power series ----------------------------------------------------------


def test_series_z2_precision_two(cache):
    R = catalog_ring("z2")
    rep = lift_series_check(R, 2, ("1",), cache=cache)
    assert rep.status == "pass" and not rep.sampled
    assert rep.counts["matrices"] == 256 and rep.s == "x"
    ext = cache.series(R, 2)
    S = ext.ring
    ctx = cache.context(S, S.element("x"))
    one, x = S.element("1"), S.element("x")
    A = FMatrix(S.element("1+x"), one, one, x)
    assert oracle_decide(ctx, A, "sjc") is not None


def test_series_precision_one_is_a_tautology(cache):
    rep = lift_series_check(catalog_ring("z4"), 1, (), cache=cache)
    assert rep.status == "pass" and rep.s == "0"


def test_series_z4_sampled_with_recorded_seed(cache):
    rep = lift_series_check(catalog_ring("z4"), 2, (2,), cache=cache)
    assert rep.status == "pass" and rep.sampled and rep.seed == 0
    assert rep.counts["matrices"] == 2000 and rep.s == "2x"


def test_series_needs_a_local_base(cache):
    rep = lift_series_check(catalog_ring("z6"), 2, (1,), cache=cache)
    assert rep.status == "hypotheses-not-met"


def test_series_precision_shrinks_under_caps():
    assert series_precision_for(catalog_ring("z2"), Caps()) >= 2
    assert series_precision_for(catalog_ring("twist"), Caps()) == 1


# --- census and reports ----------------------------------------------------


@pytest.mark.parametrize("name, s, row", [
    ("z2", 1, (16, 6, 8, 1, 16, 8, 14)),
    ("z4", 2, (256, 64, 34, 64, 256, 256, 256)),
    ("z4", 1, (256, 96, 26, 16, 256, 128, 224)),
])
def test_census_rows(ctx, name, s, row):
    got = census(ctx(name, s))
    assert tuple(got[k] for k in CENSUS_HEADER[2:]) == row


def test_census_radical_count_matches_pattern(ctx):
    c = ctx("z4", 2)
    scan = sum(fm_in_jacobson(c, c.matrix(i)) for i in range(c.size))
    assert census(c)["jacobson"] == scan == 2 * 2 * 4 * 4


def test_census_csv(ctx):
    text = census_csv([census(ctx("z2", 1)), census(ctx("z2", 0))])
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CENSUS_HEADER
    assert rows[1] == ["Z2", "1", "16", "6", "8", "1", "16", "8", "14"]
    assert census_csv([census(ctx("z2", 1))]) == census_csv([census(ctx("z2", 1))])


def test_report_json_round_trip(cache):
    rep = run_check("T2.1", catalog_ring("f2t2"), "t", cache=cache)
    data = json.loads(json.dumps(rep.to_json()))
    assert data["schema"] == 1 and data["status"] in STATUSES
    assert data["check"] == "T2.1" and data["ring"] == rep.ring


def test_summary_and_table():
    reps = [CheckReport("T2.1", "Z2", "1", "pass"), CheckReport("T2.16", "Z2", "1", "hypotheses-not-met",
                                                                notes=["s=1 is not in J"])]
    assert summarize(reps) == {"pass": 1, "fail": 0, "hypotheses-not-met": 1}
    table = format_table(reps)
    assert "T2.16" in table and "not in J" in table


def test_fail_report_carries_a_counterexample():
    rep = CheckReport("T2.1", "Z2", "1", "fail", counterexample={"matrix": [[1, 0], [0, 1]], "explanation": "x"})
    assert rep.to_json()["counterexample"]["explanation"] == "x"
