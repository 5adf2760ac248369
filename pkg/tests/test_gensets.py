"""Tests for finite-set checks, gluing, counterexamples, and rigidity."""

import math

import numpy as np
import pytest

from matmono import (
    FiniteFunction,
    affine_rigidity_check,
    build_counterexample,
    catalog_model,
    extension_feasibility,
    genset_check,
    glue_check,
    make_projection_pair,
    read_points_file,
    write_points_file,
)
from matmono.gensets import re_evaluate_genset_witness


def test_finite_function_table_contract():
    f = FiniteFunction.from_pairs([(2.0, 4.0), (0.5, 0.25), (1.0, 1.0)])
    assert f.points == (0.5, 1.0, 2.0)
    assert f.values == (0.25, 1.0, 4.0)
    assert f.size == 3
    assert f.value_at(1.0) == 1.0
    with pytest.raises(KeyError):
        f.value_at(1.5)

    g = f.with_point(1.5, 2.25)
    assert g.points == (0.5, 1.0, 1.5, 2.0)
    assert f.size == 3  # original untouched
    with pytest.raises(ValueError):
        f.with_point(1.0, 99.0)

    h = f.restrict((0.5, 2.0))
    assert h.points == (0.5, 2.0)
    with pytest.raises(ValueError):
        f.restrict((0.5, 3.0))


def test_finite_function_union_requires_agreement_on_shared_points():
    f = FiniteFunction.from_pairs([(0.0, 1.0), (1.0, 2.0)])
    g = FiniteFunction.from_pairs([(1.0, 2.0), (2.0, 5.0)])
    u = f.union(g)
    assert u.points == (0.0, 1.0, 2.0)
    assert u.values == (1.0, 2.0, 5.0)

    bad = FiniteFunction.from_pairs([(1.0, 2.5), (2.0, 5.0)])
    with pytest.raises(ValueError, match="inconsistent values"):
        f.union(bad)


def test_finite_function_rejects_malformed_tables():
    with pytest.raises(ValueError):
        FiniteFunction((), ())
    with pytest.raises(ValueError):
        FiniteFunction((0.0, 1.0), (1.0,))
    with pytest.raises(ValueError):
        FiniteFunction((0.0, 0.0), (1.0, 2.0))


def test_points_file_round_trip(tmp_path):
    f = FiniteFunction.from_model(catalog_model("-1/x"), [0.5, 1.0, 2.0, 4.0])
    path = tmp_path / "recip.txt"
    write_points_file(path, f, header="reciprocal samples")
    back = read_points_file(path)
    assert back.points == f.points
    assert back.values == pytest.approx(f.values)

    # comments and blank lines are ignored
    loose = tmp_path / "loose.txt"
    loose.write_text("# comment\n\n 1.0   2.0 \n3 4\n")
    g = read_points_file(loose)
    assert g.points == (1.0, 3.0)
    assert g.values == (2.0, 4.0)


def test_points_file_errors_carry_location(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0 2.0\n3.0\n")
    with pytest.raises(ValueError, match=r"bad\.txt:2: expected two columns"):
        read_points_file(bad)

    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    with pytest.raises(ValueError, match="no data lines"):
        read_points_file(empty)


def test_genset_passes_on_matrix_monotone_data():
    model = catalog_model("-1/x")
    big = FiniteFunction.from_model(model, [0.5 + 0.35 * k for k in range(8)])
    rep = genset_check(big, 2, samples=600, seed=0)
    assert rep.passed
    assert rep.rule == "k=n"
    assert rep.auxiliary_levels == []  # 8 points > 2n+2, top level suffices

    small = FiniteFunction.from_model(model, [0.5, 0.8, 1.2, 1.7, 2.5, 3.5])
    rep6 = genset_check(small, 2, samples=600, seed=0)
    assert rep6.passed
    assert [rec.k for rec in rep6.auxiliary_levels] == [1]
    assert all(rec.passed for rec in rep6.auxiliary_levels)


def test_genset_fails_on_square_data_and_witness_replays():
    f = FiniteFunction.from_pairs([(0.1 * k, (0.1 * k) ** 2) for k in range(1, 7)])
    rep = genset_check(f, 2, samples=2000, seed=0)
    assert not rep.passed
    top = rep.level(2)
    assert not top.passed
    wit = top.witness
    assert wit["kind"] == "genset-dd"
    assert wit["value"] < -wit["threshold"]

    replay = re_evaluate_genset_witness(wit)
    assert replay["confirmed"]
    assert replay["value"] == pytest.approx(wit["value"], rel=1e-12)

    with pytest.raises(ValueError):
        re_evaluate_genset_witness({"kind": "psd-matrix"})


def test_pathological_set_fails_only_at_low_level():
    # 4-point set monotone on every 4-point window in the order-2 sense
    # but visibly decreasing between 1 and 2.
    f = FiniteFunction.from_pairs([(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 0.0)])
    rep = genset_check(f, 2, samples=4000, seed=0)
    assert rep.rule == "all-k"
    assert rep.verdict == "fail"

    low = rep.level(1)
    assert not low.passed
    assert low.configs == 4  # stops at the first failing window
    assert low.witness["subset"] == [1.0, 2.0]
    assert low.worst_value == pytest.approx(-1.0)

    top = rep.level(2)
    assert top.passed
    assert top.configs == 4000
    assert top.worst_value >= 0.0
    assert "all 1 subsets" in top.note


def test_glue_check_consistent_overlapping_grids():
    model = catalog_model("-1/x")
    a = FiniteFunction.from_model(model, [0.5 + 0.25 * k for k in range(7)])
    b = FiniteFunction.from_model(model, [1.25 + 0.25 * k for k in range(8)])
    rep = glue_check(a, b, 2, samples=500, seed=0)
    assert rep.overlap_count == 4
    assert rep.hypothesis_met  # 4 shared points >= 2n-1 = 3
    assert rep.consistent
    assert rep.verdict == "pass"
    assert rep.union.size == 11
    assert rep.first.passed and rep.second.passed


def test_glue_check_reports_thin_overlap():
    model = catalog_model("-1/x")
    a = FiniteFunction.from_model(model, [0.5 + 0.25 * k for k in range(7)])
    b = FiniteFunction.from_model(model, [2.0, 2.6, 3.2, 3.8, 4.4])
    rep = glue_check(a, b, 2, samples=400, seed=0)
    assert rep.overlap_count == 1
    assert not rep.hypothesis_met
    assert rep.consistent  # data is still jointly monotone, just no guarantee


def test_resolvent_difference_is_nonnegative_and_has_rank_one_tail():
    pair = make_projection_pair((1.0, 2.0, 3.0, 4.0))
    a, b, v = pair.matrix_a, pair.matrix_b, pair.vector
    eye = np.eye(len(v))
    rng = np.random.default_rng(9)
    for _ in range(5):
        w = rng.standard_normal(len(v))
        for z in (6.0, 10.0, 50.0):
            gap = np.linalg.inv(z * eye - b) - np.linalg.inv(z * eye - a)
            phi = w @ gap @ w
            assert phi >= -1e-12  # b >= a makes the resolvent gap PSD here
        z = 1000.0
        gap = np.linalg.inv(z * eye - b) - np.linalg.inv(z * eye - a)
        tail = z * z * (w @ gap @ w)
        assert tail == pytest.approx(float(v @ w) ** 2, rel=2e-2)


def test_counterexample_frozen_structure():
    bundle = build_counterexample(2, (1, 2, 3, 4, 5, 6), (0, 7), samples=800)
    sevenths = tuple(k / 7 for k in (-5, 1, 3, 4, 6, 12))
    assert bundle.finite_function.points == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert bundle.finite_function.values == pytest.approx(sevenths)

    assert bundle.r1.constant == 0.0
    assert bundle.r1.poles == (7.0,)
    assert bundle.r2.constant == 1.0
    assert bundle.r2.poles == (0.0,)
    assert bundle.r1.weights == pytest.approx((12 / 7,))
    assert bundle.r2.weights == pytest.approx((12 / 7,))
    assert bundle.first == "r2"
    assert bundle.gap_interval == (3.0, 4.0)
    assert bundle.aux_poles == (0.0, 7.0)

    payload = bundle.to_jsonable()
    assert sorted(payload) == [
        "aux_poles", "first", "gap_interval", "order", "points", "r1", "r2", "values",
    ]

    # both branches reproduce the shared middle values
    for x in (3.0, 4.0):
        assert bundle.r1(x) == pytest.approx(bundle.r2(x), abs=1e-12)


def test_counterexample_side_assignment_tracks_pole_layout():
    lo_hi = build_counterexample(2, (1, 2, 3, 4, 5, 6), (-1, 8), samples=800)
    assert lo_hi.first == "r2"
    assert lo_hi.r1.poles == (8.0,)
    assert lo_hi.r2.poles == (-1.0,)

    both_below = build_counterexample(2, (1, 2, 3, 4, 5, 6), (-2, -1), samples=800)
    assert both_below.first == "r1"
    assert both_below.r1.poles == (-1.0,)
    assert both_below.r2.poles == (-2.0,)

    cubic = build_counterexample(3, (1, 2, 3, 4, 5, 6, 7, 8), (-4, -3, -2, -1), samples=800)
    assert cubic.first == "r1"
    assert cubic.gap_interval == (4.0, 5.0)
    assert len(cubic.r1.poles) + len(cubic.r2.poles) == 4


def test_counterexample_input_validation():
    with pytest.raises(ValueError, match="order >= 2"):
        build_counterexample(1, (1, 2, 3, 4), (0, 5))
    with pytest.raises(ValueError, match="2n\\+2 = 6 distinct points"):
        build_counterexample(2, (1, 2, 3, 4, 5), (0, 7))
    with pytest.raises(ValueError, match="2n\\+2 = 6 distinct points"):
        build_counterexample(2, (1, 2, 2, 4, 5, 6), (0, 7))
    with pytest.raises(ValueError, match="2n-2 = 2 distinct auxiliary poles"):
        build_counterexample(2, (1, 2, 3, 4, 5, 6), (0,))
    with pytest.raises(ValueError, match="strictly outside the point hull"):
        build_counterexample(2, (1, 2, 3, 4, 5, 6), (3.5, 7))


def test_extension_feasibility_empty_in_the_gap():
    bundle = build_counterexample(2, (1, 2, 3, 4, 5, 6), (0, 7), samples=800)
    result = extension_feasibility(bundle, 3.5, samples=600, grid=4000)
    assert result.empty
    assert result.feasible_intervals == []
    # the two branch values at 3.5 disagree, so no y satisfies both
    assert result.binding["r1"] == pytest.approx(24 / 49, abs=1e-12)
    assert result.binding["r2"] == pytest.approx(25 / 49, abs=1e-12)
    assert result.constraint_count > 0

    with pytest.raises(ValueError, match="gap interval"):
        extension_feasibility(bundle, 2.0)


def test_extension_feasibility_plain_function():
    f = FiniteFunction.from_model(catalog_model("-1/x"), [0.5, 1.0, 2.0, 4.0])

    # order 1: classic interpolation window [f(1), f(2)]
    r1 = extension_feasibility(f, 1.5, n=1, samples=400, grid=4000)
    assert len(r1.feasible_intervals) == 1
    lo, hi = r1.feasible_intervals[0]
    assert lo == pytest.approx(-1.0, abs=2e-3)
    assert hi == pytest.approx(-0.5, abs=2e-3)
    assert r1.binding == {}

    # order 2 pins the value to a sliver around the true extension -1/1.5
    r2 = extension_feasibility(f, 1.5, n=2, samples=400, grid=200_000)
    assert len(r2.feasible_intervals) == 1
    lo, hi = r2.feasible_intervals[0]
    assert lo <= -2 / 3 <= hi
    assert hi - lo < 1e-3

    with pytest.raises(ValueError, match="order n is required"):
        extension_feasibility(f, 1.5)
    with pytest.raises(ValueError, match="strictly inside"):
        extension_feasibility(f, 9.0, n=1)
    with pytest.raises(ValueError, match="already a point"):
        extension_feasibility(f, 1.0, n=1)


def test_affine_rigidity_flags_cubic_growth():
    pts = (-100.0, -10.0, -2.0, -1.0, 0.0, 1.0, 2.0, 10.0, 100.0)
    f = FiniteFunction.from_pairs([(t, t**3) for t in pts])
    rep = affine_rigidity_check(f, (0.0, 1.0, 2.0), m_values=(10.0, -10.0, 100.0, -100.0))
    assert rep.second_dd == pytest.approx(3.0)
    assert rep.weighted_dd == pytest.approx(7.0)
    assert rep.verdict == "violated"
    assert not rep.passed

    by_m = {rec.m: rec for rec in rep.records}
    assert by_m[10.0].constraint_value == pytest.approx(-23.0)  # 7 - 10*3
    assert by_m[10.0].violated
    assert by_m[-10.0].constraint_value == pytest.approx(37.0)
    assert not by_m[-10.0].violated
    assert by_m[100.0].bound == pytest.approx(0.07)
    assert by_m[10.0].bound == pytest.approx(0.7)
    # the admissible window shrinks like 1/|M|
    assert rep.fit_exponent == pytest.approx(-1.0, abs=1e-9)


def test_affine_rigidity_accepts_affine_data():
    f = FiniteFunction.from_pairs([(t, 2 * t + 5) for t in (-3.0, -1.0, 0.5, 2.0, 4.0)])
    rep = affine_rigidity_check(f, (-1.0, 0.5, 2.0), m_values=(-3.0, 4.0))
    assert rep.verdict == "affine-consistent"
    assert rep.passed
    assert rep.second_dd == pytest.approx(0.0, abs=1e-12)
    assert all(not rec.violated for rec in rep.records)
    assert all(rec.constraint_value == pytest.approx(2.0) for rec in rep.records)


def test_affine_rigidity_input_validation():
    f = FiniteFunction.from_pairs([(t, t**3) for t in (-2.0, 0.0, 1.0, 2.0, 10.0)])
    with pytest.raises(ValueError, match="not in the finite set"):
        affine_rigidity_check(f, (0.0, 1.0, 3.0))
    with pytest.raises(ValueError, match="M value"):
        affine_rigidity_check(f, (0.0, 1.0, 2.0), m_values=(50.0,))

    one_sided = FiniteFunction.from_pairs([(t, t**3) for t in (0.0, 1.0, 2.0, 3.0, 4.0)])
    with pytest.raises(ValueError, match="insufficient spread"):
        affine_rigidity_check(one_sided, (0.0, 1.0, 2.0))
