#!/usr/bin/env python3
"""
Fibre sections, symbols, fibrewise invertibility, the four-condition check
and crossed-product representations.
"""

import json
import sys

import numpy as np
import pytest

from src.convolution_algebra import (
    convolve,
    element_from_labels,
    involution,
    lambda_matrix,
    left_regular_matrix,
    unit_element,
    unitize,
)
from src.errors import FormatError, GroupoidMismatch, NotInvariant, SingularFibre
from src.fibre_symbol import (
    BoundaryDecomposition,
    ExelReport,
    MainTheoremReport,
    act_on_function,
    canonical_lift,
    crossed_product_coefficients,
    crossed_product_rep,
    equivariance_defect,
    exel_invertibility,
    fibre_bijection_unitary,
    group_roe_matrix,
    identity_section,
    lambda_section,
    main_theorem_check,
    multiplication_operator,
    propagation,
    quotient_restrict,
    roe_to_element,
    section_inverse,
    symbol,
    translation_unitary,
    twisted_product,
    zero_section,
)
from src.formats import to_json
from src.groupoid_core import (
    ActionSpec,
    cyclic_group,
    disjoint_union,
    group_groupoid,
    pair_groupoid,
    regular_action,
    symmetric_group,
    transformation_groupoid,
)
from src.samplers import (
    main_theorem_instance,
    random_action,
    random_boundary,
    random_element,
    random_groupoid,
    singular_unitized_element,
)


def two_blocks():
    return disjoint_union(pair_groupoid(2), group_groupoid(cyclic_group(2)))


def swap_groupoid():
    return transformation_groupoid(ActionSpec(cyclic_group(2), (1, 2, 3), ((0, 1, 2), (1, 0, 2)), "swap"))


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

def test_lambda_sections_are_equivariant():
    rng = np.random.default_rng(41)
    for _ in range(30):
        g = random_groupoid(rng, 40)
        f = random_element(rng, g)
        assert equivariance_defect(lambda_section(f)) <= 1e-12


def test_perturbed_section_is_not_equivariant():
    g = pair_groupoid(3)
    s = identity_section(g)
    assert equivariance_defect(s) == 0.0
    bumped = s.with_fibre(2, 2 * np.eye(3))
    assert equivariance_defect(bumped) == pytest.approx(1.0)


def test_propagation_of_lambda_section_is_the_support():
    g = pair_groupoid(3)
    f = element_from_labels(g, {"(1,2)": 1.0, "(3,3)": 2.0})
    prop = propagation(lambda_section(f))
    assert prop.arrows == frozenset({"(1,2)", "(3,3)"})
    assert not prop.is_symmetric(g)
    assert propagation(lambda_section(f + involution(f))).is_symmetric(g)
    assert propagation(zero_section(g)).arrows == frozenset()
    assert propagation(identity_section(g)).arrows == frozenset({"(1,1)", "(2,2)", "(3,3)"})
    assert equivariance_defect(zero_section(g)) == 0.0


def test_section_inverse_is_equivariant():
    g = group_groupoid(symmetric_group(3))
    f = unitize(element_from_labels(g, {"102": 0.3, "120": 0.2j}))
    inverse = section_inverse(lambda_section(f))
    assert inverse is not None
    assert equivariance_defect(inverse) <= 1e-12
    singular = element_from_labels(pair_groupoid(2), {"(1,1)": 1.0})
    assert section_inverse(lambda_section(singular)) is None


# ---------------------------------------------------------------------------
# Boundary decompositions and the symbol
# ---------------------------------------------------------------------------

def test_boundary_must_be_invariant():
    with pytest.raises(NotInvariant):
        BoundaryDecomposition.from_boundary(swap_groupoid(), [1])
    d = BoundaryDecomposition.from_boundary(swap_groupoid(), [3])
    assert d.boundary_labels() == (3,)
    assert d.interior_groupoid.units == (1, 2)
    assert BoundaryDecomposition.from_interior(swap_groupoid(), [1, 2]) == d


def test_quotient_is_a_homomorphism_with_lift_as_section():
    rng = np.random.default_rng(43)
    for _ in range(20):
        g = disjoint_union(random_groupoid(rng, 20), random_groupoid(rng, 20))
        d = random_boundary(rng, g)
        f, h = random_element(rng, g), random_element(rng, g)
        np.testing.assert_allclose(quotient_restrict(convolve(f, h), d).coeffs,
                                   convolve(quotient_restrict(f, d), quotient_restrict(h, d)).coeffs, atol=1e-12)
        q = quotient_restrict(f, d)
        assert quotient_restrict(canonical_lift(q, d), d) == q


def test_interior_elements_vanish_in_the_quotient():
    g = two_blocks()
    d = BoundaryDecomposition.from_boundary(g, ["1:*"])
    interior = element_from_labels(g, {"0:(1,2)": 4.0, "0:(2,2)": -1.0})
    assert quotient_restrict(interior, d).is_zero()


def test_symbol_fibres_are_boundary_representations():
    g = two_blocks()
    d = BoundaryDecomposition.from_boundary(g, ["1:*"])
    f = element_from_labels(g, {"0:(1,2)": 3.0, "1:e": 2.0, "1:g": 1.0})
    sym = symbol(f, d)
    assert sym.groupoid.units == ("1:*",)
    np.testing.assert_array_equal(sym.fibre("1:*").matrix, [[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_array_equal(sym.fibres[0], lambda_matrix(quotient_restrict(f, d), 0))


def test_mismatched_groupoids_are_rejected():
    d = BoundaryDecomposition.from_boundary(two_blocks(), ["1:*"])
    with pytest.raises(GroupoidMismatch):
        quotient_restrict(unit_element(pair_groupoid(2)), d)


# ---------------------------------------------------------------------------
# Fibrewise invertibility
# ---------------------------------------------------------------------------

def test_unit_element_is_invertible():
    g = pair_groupoid(3)
    report = exel_invertibility(unit_element(g))
    assert report.verdict
    assert report.inverse == unit_element(g)
    assert report.inverse_residual == 0.0


def test_singular_z2_element():
    g = group_groupoid(cyclic_group(2))
    f = element_from_labels(g, {"e": 1.0, "g": 1.0})
    report = exel_invertibility(f)
    assert not report.verdict
    assert report.singular_units == ["*"]
    assert report.per_unit[0].sigma_min == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SingularFibre):
        exel_invertibility(f, want_inverse=True)


def test_unitized_nilpotent_has_polynomial_inverse():
    g = pair_groupoid(3)
    n = element_from_labels(g, {"(1,2)": 1.0, "(2,3)": 1.0})
    report = exel_invertibility(n, mode="unitized")
    assert report.verdict
    expected = unit_element(g) - n + convolve(n, n)
    np.testing.assert_allclose(report.inverse.coeffs, expected.coeffs, atol=1e-12)
    assert report.inverse_residual == 0.0
    assert not exel_invertibility(n).verdict


def test_fibre_verdict_matches_block_diagonal_oracle():
    rng = np.random.default_rng(47)
    cut = 1e-10
    disagreements, verdicts = 0, []
    for k in range(40):
        g = random_groupoid(rng, 30)
        if k % 2:
            a = singular_unitized_element(rng, g, integer=(k % 4 == 1))
        else:
            a = random_element(rng, g, integer=(k % 4 == 0), density=0.4)
        report = exel_invertibility(a, mode="unitized")
        sigma = np.linalg.svd(left_regular_matrix(unitize(a)), compute_uv=False)
        oracle = bool(sigma.size == 0 or sigma[-1] > cut)
        disagreements += int(report.verdict != oracle)
        verdicts.append(report.verdict)
        if report.verdict:
            assert report.inverse_residual <= 1e-8 * max(1.0, report.sup_inverse_norm) ** 2
    assert disagreements == 0
    assert verdicts.count(True) >= 10 and verdicts.count(False) >= 10


# ---------------------------------------------------------------------------
# Invertibility modulo the interior
# ---------------------------------------------------------------------------

def test_conditions_hold_together_on_an_invertible_boundary():
    g = two_blocks()
    d = BoundaryDecomposition.from_boundary(g, ["1:*"])
    f = element_from_labels(g, {"0:(1,2)": 3.0, "1:e": 2.0, "1:g": 1.0})
    report = main_theorem_check(f, d)
    assert report.conditions == {"c1": True, "c2": True, "c3": True, "c4": True}
    assert report.verdict
    assert report.certificate_residual <= 1e-12
    assert report.quotient_norm == pytest.approx(3.0)
    assert report.limit_norm == pytest.approx(report.quotient_norm)


def test_conditions_fail_together_on_a_singular_boundary():
    g = two_blocks()
    d = BoundaryDecomposition.from_boundary(g, ["1:*"])
    f = element_from_labels(g, {"0:(1,1)": 1.0, "0:(2,2)": 1.0, "1:e": 1.0, "1:g": 1.0})
    report = main_theorem_check(f, d)
    assert report.agree
    assert not any(report.conditions.values())
    assert report.certificate is None


def test_integral_certificate_is_exact():
    g = disjoint_union(pair_groupoid(2), pair_groupoid(3))
    d = BoundaryDecomposition.from_boundary(g, ["1:1", "1:2", "1:3"])
    f = unitize(element_from_labels(g, {"1:(1,2)": 1.0, "1:(2,3)": 1.0, "0:(1,2)": 5.0}))
    report = main_theorem_check(f, d)
    assert report.verdict
    assert report.certificate_residual == 0.0
    labels = {"1:(1,1)", "1:(2,2)", "1:(3,3)", "1:(1,2)", "1:(2,3)", "1:(1,3)"}
    assert set(quotient_restrict(report.certificate, d).support()) == labels


def test_reports_reparse_from_their_documents():
    g = pair_groupoid(3)
    n = element_from_labels(g, {"(1,2)": 1.0, "(2,3)": 1.0})
    for report in (exel_invertibility(n, mode="unitized"), exel_invertibility(n)):
        again = ExelReport.from_dict(json.loads(to_json(report.to_dict())), g)
        assert again.to_dict() == report.to_dict()
        assert again.inverse == report.inverse

    blocks = two_blocks()
    d = BoundaryDecomposition.from_boundary(blocks, ["1:*"])
    for coeffs in ({"0:(1,2)": 3.0, "1:e": 2.0, "1:g": 1.0}, {"1:e": 1.0, "1:g": 1.0}):
        report = main_theorem_check(element_from_labels(blocks, coeffs), d)
        doc = json.loads(to_json(report.to_dict()))
        again = MainTheoremReport.from_dict(doc, blocks)
        assert again.to_dict() == report.to_dict()
        assert again.certificate == report.certificate

    doc["verdict"] = not doc["verdict"]
    with pytest.raises(FormatError):
        MainTheoremReport.from_dict(doc, blocks)
    with pytest.raises(FormatError):
        ExelReport.from_dict({"mode": "plain"}, g)


def test_empty_boundary_is_degenerate():
    g = two_blocks()
    d = BoundaryDecomposition.from_boundary(g, [])
    report = main_theorem_check(element_from_labels(g, {"1:g": 1.0}), d)
    assert report.degenerate and report.verdict
    assert report.certificate.is_zero()


def test_random_instances_agree():
    rng = np.random.default_rng(53)
    for k in range(20):
        f, d = main_theorem_instance(rng, singular=(k % 3 == 0))
        report = main_theorem_check(f, d)
        assert report.agree, report.conditions
        if k % 3 == 0:
            assert not report.verdict
        if report.certificate is not None:
            h = report.certificate
            scale = max(1.0, np.abs(f.coeffs).sum() * np.abs(h.coeffs).sum())
            assert report.certificate_residual <= 1e-9 * scale


# ---------------------------------------------------------------------------
# Crossed products
# ---------------------------------------------------------------------------

def test_crossed_product_rep_is_conjugated_lambda():
    rng = np.random.default_rng(59)
    for _ in range(20):
        action = random_action(rng, 6, 6)
        g = transformation_groupoid(action)
        F = random_element(rng, g)
        for i, omega in enumerate(action.points):
            V = fibre_bijection_unitary(action, omega)
            expected = V @ lambda_matrix(F, i) @ V.conj().T
            np.testing.assert_allclose(crossed_product_rep(action, F, omega), expected, atol=1e-12)


def test_covariance_of_multiplication_operators():
    rng = np.random.default_rng(61)
    action = random_action(rng, 6, 6)
    G = action.group
    f = rng.standard_normal(len(action.points)) + 1j * rng.standard_normal(len(action.points))
    omega = action.points[0]
    for gamma in range(G.order):
        rho = translation_unitary(G, gamma)
        left = rho.conj().T @ multiplication_operator(action, f, omega) @ rho
        right = multiplication_operator(action, act_on_function(action, G.inv(gamma), f), omega)
        np.testing.assert_allclose(left, right, atol=1e-14)


def test_crossed_product_coefficients_are_multiplicative():
    rng = np.random.default_rng(67)
    for _ in range(10):
        action = random_action(rng, 6, 6)
        g = transformation_groupoid(action)
        F, H = random_element(rng, g), random_element(rng, g)
        product = crossed_product_coefficients(action, convolve(F, H))
        twisted = twisted_product(action, crossed_product_coefficients(action, F),
                                  crossed_product_coefficients(action, H))
        for name in action.group.elements:
            np.testing.assert_allclose(product[name], twisted[name], atol=1e-12)


def test_group_roe_matrix_round_trip():
    G = symmetric_group(3)
    rng = np.random.default_rng(71)
    g = transformation_groupoid(regular_action(G))
    F, H = random_element(rng, g), random_element(rng, g)
    T = group_roe_matrix(G, F)
    assert roe_to_element(G, T) == F
    np.testing.assert_allclose(group_roe_matrix(G, convolve(F, H)), T @ group_roe_matrix(G, H), atol=1e-12)


def run_all() -> int:
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]
    failed = 0
    print("=" * 60)
    print("FIBRE SYMBOL TESTS")
    print("=" * 60)
    for name, fn in tests:
        try:
            fn()
            print(f"  ✓ {name}")
        except Exception as exc:
            failed += 1
            print(f"  ✗ {name}: {type(exc).__name__}: {exc}")
    print(f"\n{len(tests) - failed} passed, {failed} failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run_all())
