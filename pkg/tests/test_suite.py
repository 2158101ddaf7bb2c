import math
import os

import numpy as np
import pytest

from cpcbench import suite
from cpcbench.expr import ParseError, eval_extended, eval_machine
from cpcbench.suite import (
    CORE_IDS,
    MissingDefinition,
    Registry,
    RegistryError,
    UnknownFunction,
    parse_registry,
    structurally_separable,
)

from conftest import oracle_df3, oracle_df12, oracle_df13

STAND_IN = """
; a made-up function used only to exercise the loader
(function :id "TEST-ONE" :dim 2 :bounds (-1 1) :sep true :fr 50
          :optima (single)
          :best (("0" "0.5") "0.5")
          :expr (+ (pow x1 2) (sqrt x2)))
"""


def test_catalog_has_25_rows(registry):
    ids = [s.id for s in registry.all() if s.id.startswith("CPC-DF")]
    assert ids == [f"CPC-DF{i}" for i in range(1, 26)]


def test_catalog_metadata_spot_checks(registry):
    df8 = registry.get("CPC-DF8")
    assert df8.bounds == (0.0, 14.0)
    assert str(df8.dimension) == "2"
    assert df8.fr.percent == 15.886572
    df12 = registry.get("CPC-DF12")
    assert df12.dimension.scalable and df12.n_default == 5
    assert str(df12.multiplicity) == "2^4=16"
    df18 = registry.get("CPC-DF18")
    assert df18.fr.upper_bound and str(df18.fr) == "<= 1e-06"
    df24 = registry.get("CPC-DF24")
    assert df24.bounds[1] == pytest.approx(2 * math.pi)


def test_core_set_is_defined(registry):
    defined = [s.id for s in registry.defined()]
    assert defined == list(CORE_IDS)


def test_unknown_id():
    with pytest.raises(UnknownFunction):
        suite.get("CPC-DF99")


def test_missing_definition(registry):
    with pytest.raises(MissingDefinition):
        registry.build("CPC-DF15")


def test_dimension_rules(registry):
    with pytest.raises(ValueError):
        registry.build("CPC-DF8", 3)
    with pytest.raises(ValueError):
        registry.build("CPC-DF12", 1)
    assert registry.build("CPC-DF12").dim == 5
    assert registry.build("CPC-DF12", 3).dim == 3
    assert registry.build("F138", 6).dim == 6


def test_df12_condition_count_scales(registry):
    from cpcbench.expr import collect_conditions

    assert len(collect_conditions(registry.build("CPC-DF12", 5))) == 16
    assert len(collect_conditions(registry.build("CPC-DF12", 2))) == 4


def test_load_stand_in_record():
    reg = Registry()
    loaded = reg.load_text(STAND_IN)
    assert [s.id for s in loaded] == ["TEST-ONE"]
    spec = reg.get("TEST-ONE")
    assert spec.separable and spec.source == "external"
    out = eval_machine(spec.build(), (0.0, 0.25))
    assert out.value == 0.5
    assert "TEST-ONE" in [s.id for s in reg.defined()]
    assert "TEST-ONE" not in suite.default_registry()


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.cpc"
    path.write_text("; nothing here\n")
    assert Registry().load_external(path) == []


def test_duplicate_id_rejected():
    with pytest.raises(RegistryError):
        Registry().load_text(STAND_IN + STAND_IN)
    reg = Registry()
    reg.load_text(STAND_IN)
    with pytest.raises(RegistryError):
        reg.load_text(STAND_IN)
    with pytest.raises(RegistryError):
        reg.load_text(STAND_IN.replace("TEST-ONE", "CPC-DF8").replace("(-1 1)", "(0 14)"))


def test_variable_out_of_range_is_a_parse_error():
    with pytest.raises(ParseError) as info:
        parse_registry(STAND_IN.replace("(sqrt x2)", "(sqrt x3)"))
    assert info.value.line == 6


@pytest.mark.parametrize(
    "text",
    [
        "(function :id \"A\" :dim 2 :bounds (-1 1) :expr (+ x1",
        "(function :id \"A\" :dim 2 :bounds (1 -1) :expr x1)",
        "(function :id \"A\" :dim 2 :expr x1)",
        "(function :id \"A\" :dim 2 :bounds (-1 1) :color 3 :expr x1)",
        "(function :id \"A\" :dim 2 :bounds (-1 1) :best ((\"0\") \"0\") :expr x1)",
        "(thing)",
    ],
)
def test_malformed_records(text):
    with pytest.raises(ParseError):
        parse_registry(text)


def test_catalog_metadata_mismatch_rejected():
    record = """(function :id "CPC-DF15" :dim 2 :bounds (-4 4) :expr (+ x1 x2))"""
    with pytest.raises(RegistryError, match="bounds"):
        Registry().load_text(record)


def test_catalog_metadata_filled_in():
    record = """(function :id "CPC-DF15" :dim 2 :bounds (-5 5) :expr (+ x1 x2))"""
    reg = Registry()
    (spec,) = reg.load_text(record)
    assert spec.fr.percent == 0.000228 and spec.range_label == "[-5,5]"


def test_constant_bounds_expression():
    record = """(function :id "CPC-DF24" :dim 2 :bounds ((* -2 pi) (* 2 pi)) :optima (asymmetric 2)
                :expr (+ x1 x2))"""
    (spec,) = Registry().load_text(record)
    assert spec.bounds[0] == pytest.approx(-2 * math.pi)


def test_symmetry_images(registry):
    df12 = registry.get("CPC-DF12")
    images = df12.symmetry_images(("1", "-2"))
    assert set(images) == {("1", "-2"), ("-1", "-2"), ("1", "2"), ("-1", "2")}
    assert registry.get("CPC-DF8").symmetry_images(("1", "2")) == [("1", "2")]


def test_separability_matches_metadata(registry):
    for spec in registry.defined():
        if spec.separable:
            assert structurally_separable(spec.build()), spec.id
    assert not structurally_separable(registry.build("CPC-DF8"))
    assert not structurally_separable(registry.build("CPC-DF12"))
    assert not structurally_separable(registry.build("F170"))


def test_best_known_points_are_feasible(registry):
    for spec in registry.defined():
        for ref in spec.references():
            out = eval_extended(spec.build(), ref.x)
            assert out.feasible, spec.id


@pytest.mark.parametrize("fid", ["F37", "F138", "F170"])
def test_comparator_best_known_values(registry, fid):
    spec = registry.get(fid)
    for ref in spec.references():
        out = eval_extended(spec.build(), ref.x)
        assert abs(out.value - float(ref.f)) <= 1e-12 * max(1.0, abs(float(ref.f)))


@pytest.mark.xfail(strict=True, reason="13 digits cancel in base_2; see ledger")
def test_df8_best_known_value_extended(df8):
    (ref,) = df8.references()
    out = eval_extended(df8.build(), ref.x)
    assert abs(out.value - float(ref.f)) <= 1e-12 * abs(float(ref.f))


def test_df8_best_known_value_machine(df8):
    (ref,) = df8.references()
    out = eval_machine(df8.build(), ref.x)
    assert out.value == pytest.approx(float(ref.f), rel=1e-12)


@pytest.mark.skipif("CPCBENCH_EXTERNAL" not in os.environ, reason="needs a registry file with CPC-DF15")
def test_df15_last_digit_probe():
    from cpcbench.verification import sensitivity_probe

    reg = Registry()
    reg.load_external(os.environ["CPCBENCH_EXTERNAL"])
    spec = reg.get("CPC-DF15")
    rows = {r.label: r for r in sensitivity_probe(spec, ("3.17233243403426", "4.15125018443042"))}
    assert not rows["x2+"].machine.feasible
    assert not rows["x1+"].machine.feasible
    assert rows["x2-"].machine.value == pytest.approx(9.99800567819563, rel=1e-12)


def _check_oracle(tree, oracle, points, unpack):
    mismatches = 0
    for x in points:
        out = eval_machine(tree, x)
        ref = oracle(*x) if unpack else oracle(list(x))
        if out.feasible != (ref is not None):
            mismatches += 1
        elif ref is not None:
            assert math.isclose(out.value, ref, rel_tol=1e-10, abs_tol=1e-12)
    return mismatches


def test_df13_oracle(registry):
    from cpcbench.feasibility import sample_feasible

    tree = registry.build("CPC-DF13")
    rng = np.random.default_rng(5)
    pts = list(200 * rng.random((1000, 2)) - 100)
    pts += sample_feasible(registry.get("CPC-DF13"), 200_000, 50, seed=1, bounds=([0, -1], [1.5, 1]))
    assert _check_oracle(tree, oracle_df13, pts, True) == 0


def test_df3_oracle(registry):
    from cpcbench.feasibility import sample_feasible

    spec = registry.get("CPC-DF3")
    pts = list(np.random.default_rng(6).uniform(-100, 100, (1000, 2)))
    pts += sample_feasible(spec, 400_000, 200, seed=2)
    assert _check_oracle(spec.build(), oracle_df3, pts, True) == 0


def test_df12_oracle(registry):
    from cpcbench.feasibility import sample_feasible

    for n in (2, 5):
        spec = registry.get("CPC-DF12")
        pts = list(np.random.default_rng(7).uniform(-100, 100, (500, n)))
        pts += sample_feasible(spec, 400_000, 100, seed=3, n=n)
        assert _check_oracle(spec.build(n), oracle_df12, pts, False) == 0
