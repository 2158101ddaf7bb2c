from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpcbench import suite
from cpcbench.expr import eval_machine
from cpcbench.verification import (
    ClassifyConfig,
    NoCoordinates,
    SolutionRecord,
    UnclassifiableWithoutReference,
    classify,
    classify_many,
    feasibility_report,
    format_report,
    perturb,
    reevaluate,
    sensitivity_probe,
)

from conftest import DF8_BB, DF8_OPT, REPORTED_DF8

ALLOWED = [{"I"}, {"II"}, {"III"}, {"IV"}, {"II", "IV"}]


def _record(alg, x, f):
    return SolutionRecord("CPC-DF8", alg, x, f)


@pytest.mark.parametrize("alg, x, f, expected", REPORTED_DF8, ids=[r[0] for r in REPORTED_DF8])
def test_reported_df8_rows(df8, alg, x, f, expected):
    assert set(classify(_record(alg, x, f), df8).types) == expected


def test_report_errors_are_small(df8):
    c = classify(_record("SA", REPORTED_DF8[3][1], REPORTED_DF8[3][2]), df8)
    assert 1e-9 < c.report_error < 1e-8


def test_optimum_itself_is_type_one(df8):
    (ref,) = df8.references()
    c = classify(_record("ref", ref.x, ref.f), df8)
    assert c.label == "I" and c.matched_optimum_index == 0


def test_perturbed_report_is_two_and_four(df8):
    c = classify(_record("GA", DF8_OPT, "0.95"), df8)
    assert c.label == "II+IV"


def test_missing_report_skips_consistency_check(df8):
    assert classify(_record("GA", DF8_OPT, None), df8).label == "I"


def test_infeasible_carries_diagnostics(df8):
    c = classify(_record("B&B", DF8_BB, "0.9861174570357264"), df8)
    assert c.label == "IV" and c.reevaluated is None
    assert [d.label for d in c.diagnostics if d.satisfied is False] == ["base_2"]


def test_no_coordinates(df8):
    with pytest.raises(NoCoordinates):
        reevaluate(_record("BFGS+MS", None, None), df8)
    assert classify(_record("BFGS+MS", None, None), df8).label == "III"


def test_unclassifiable_without_reference():
    reg = suite.Registry()
    reg.load_text('(function :id "NOREF" :dim 2 :bounds (-1 1) :expr (+ x1 x2))')
    rec = SolutionRecord("NOREF", "GA", ("0", "0"), "0")
    with pytest.raises(UnclassifiableWithoutReference):
        classify(rec, reg.get("NOREF"))


def test_symmetric_images_count_as_optimum(registry):
    spec = registry.get("F170")
    rec = SolutionRecord("F170", "SA", ("-0.0", "0.0"), "-1")
    assert classify(rec, spec).label == "I"


def test_plateau_counts_as_optimum(registry):
    rec = SolutionRecord("F37", "GA", ("0.04", "-0.04", "0.01", "0.03"), "0")
    assert classify(rec, registry.get("F37")).label == "I"


def test_classify_many(registry):
    recs = [_record(a, x, f) for a, x, f, _ in REPORTED_DF8]
    labels = [c.label for c in classify_many(recs, registry)]
    assert labels == ["I", "IV", "I", "II", "III", "II"]


def test_record_json_round_trip():
    rec = SolutionRecord("CPC-DF8", "GA", (1.5, "2.80435634606639"), 0.25, {"run": 3})
    back = SolutionRecord.from_json(rec.to_json())
    assert back == rec and back.meta == {"run": 3}
    assert rec.x == ("1.5", "2.80435634606639")
    none = SolutionRecord.from_json(_record("MSQN", None, None).to_json())
    assert none.x is None and not none.has_solution


def test_invalid_tolerances():
    with pytest.raises(ValueError):
        ClassifyConfig(value_rel_tol=0)


def test_precision_flip_probe(df8):
    rows = {r.label: r for r in sensitivity_probe(df8, ("2.004219271403496", "10.671363853407628"))}
    assert not rows["base"].machine.feasible
    down = rows["x2-"]
    assert down.x[1] == "10.671363853407627"
    assert down.machine.feasible
    assert down.machine.value == pytest.approx(0.9861174570357264, rel=1e-12)
    assert rows["x2+"].x[1] == "10.671363853407629"


def test_probe_at_seven_seven_sits_on_zero_lines(df8):
    # base_1 ~ (x1 - 7)(x2 - 7) near (7, 7): single-coordinate moves stay on
    # base_1 = 0, so only rounding decides their feasibility
    rows = sensitivity_probe(df8, ("7.000000000000000", "7.000000000000000"))
    assert rows[0].machine.feasible and rows[0].extended.feasible
    for r in rows[1:]:
        for out in (r.machine, r.extended):
            if not out.feasible:
                assert out.labels == ["base_1"]
                assert abs(out.violations[0].observed) < 1e-30


def test_probe_inside_feasible_region(df8):
    rows = sensitivity_probe(df8, ("7.500000000000000", "7.500000000000000"))
    base = rows[0].machine.value
    assert len(rows) == 5
    for r in rows[1:]:
        assert r.machine.feasible and r.extended.feasible
        assert abs(r.machine.value - base) < 1e-10
        assert abs(float(r.extended.value) - base) < 1e-10


def test_fixed_step_probe_is_local(df8):
    rows = sensitivity_probe(df8, DF8_OPT, mode=1e-9)
    for r in rows[1:]:
        k = r.coordinate
        assert abs(Decimal(r.x[k]) - Decimal(DF8_OPT[k])) == Decimal("1e-9")
        other = 1 - k
        assert r.x[other] == DF8_OPT[other]
    with pytest.raises(ValueError):
        sensitivity_probe(df8, DF8_OPT, mode=-1.0)


def test_perturb_keeps_digits():
    assert perturb("10.67136385340763", Decimal("-1e-14")) == "10.67136385340762"
    assert perturb("0.5", Decimal("0.1")) == "0.6"


def test_feasibility_report_csv(df8):
    rows = feasibility_report(df8, DF8_BB)
    text = format_report(rows)
    lines = text.splitlines()
    assert lines[0] == "term,relation,binding,value,satisfied"
    assert len(lines) == 1 + 3
    b2 = [ln for ln in lines if ln.startswith("base_2,")][0]
    assert b2.endswith(",false")
    ext = feasibility_report(df8, DF8_BB, backend="extended")
    assert [b.satisfied for b in ext] == [b.satisfied for b in rows]
    with pytest.raises(ValueError):
        feasibility_report(df8, DF8_BB, backend="gpu")


_coord = st.floats(0, 14, allow_nan=False).map(repr)
_point = st.one_of(st.none(), st.tuples(_coord, _coord))
_value = st.one_of(st.none(), st.floats(-10, 10, allow_nan=False).map(repr))


@settings(max_examples=150, deadline=None)
@given(_point, _value)
def test_classification_is_total_and_exclusive(x, f):
    df8 = suite.get("CPC-DF8")
    c = classify(SolutionRecord("CPC-DF8", "any", x, f), df8)
    assert set(c.types) in ALLOWED
    if x is not None and eval_machine(df8.build(), x).feasible and c.reevaluated is not None:
        assert "III" not in c.types
