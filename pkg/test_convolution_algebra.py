#!/usr/bin/env python3
"""
Convolution algebra tests: products, involution, regular representations
and norms.
"""

import json
import sys

import numpy as np
import pytest

from src.config import DEFAULT_SETTINGS
from src.convolution_algebra import (
    AlgebraElement,
    convolve,
    delta,
    element_from_labels,
    i_norm,
    involution,
    lambda_matrix,
    left_regular_matrix,
    map_units,
    reduced_norm,
    regular_representation,
    spectral_norm,
    unit_element,
    unitize,
    zero_element,
)
from src.errors import GroupoidMismatch, NonSquare, UnknownUnit
from src.formats import element_from_doc, element_to_doc, to_json
from src.groupoid_core import cyclic_group, group_groupoid, pair_groupoid, symmetric_group
from src.samplers import random_element, random_groupoid


def z2():
    return group_groupoid(cyclic_group(2))


def pair_element(f_matrix: np.ndarray):
    """The element f((i,j)) = F[i-1, j-1] on the pair groupoid"""
    n = f_matrix.shape[0]
    g = pair_groupoid(n)
    return element_from_labels(g, {f"({i},{j})": f_matrix[i - 1, j - 1]
                                   for i in range(1, n + 1) for j in range(1, n + 1)})


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

def test_z2_regular_representation_is_circulant():
    f = element_from_labels(z2(), {"e": 2.0, "g": 3.0 - 1j})
    fm = regular_representation(f, "*")
    assert fm.arrows == ("e", "g")
    np.testing.assert_array_equal(fm.matrix, [[2.0, 3.0 - 1j], [3.0 - 1j, 2.0]])


def test_unit_element_is_the_identity():
    g = pair_groupoid(3)
    one = unit_element(g)
    f = random_element(np.random.default_rng(1), g)
    assert convolve(one, f) == f
    assert convolve(f, one) == f
    for x in g.units:
        np.testing.assert_array_equal(regular_representation(one, x).matrix, np.eye(3))


def test_matrix_units_multiply_like_matrices():
    g = pair_groupoid(3)
    assert convolve(delta(g, "(1,2)"), delta(g, "(2,3)")) == delta(g, "(1,3)")
    assert convolve(delta(g, "(1,2)"), delta(g, "(1,2)")).is_zero()
    assert (delta(g, "(1,2)") @ delta(g, "(2,1)")) == delta(g, "(1,1)")


def test_pair_groupoid_convolution_is_matrix_product():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    product = convolve(pair_element(a), pair_element(b))
    expected = pair_element(a @ b)
    np.testing.assert_allclose(product.coeffs, expected.coeffs, atol=1e-12)


def test_convolution_is_associative_and_bilinear():
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = random_groupoid(rng, 30)
        f, h, k = (random_element(rng, g) for _ in range(3))
        left = convolve(convolve(f, h), k)
        right = convolve(f, convolve(h, k))
        np.testing.assert_allclose(left.coeffs, right.coeffs, atol=1e-10)
        np.testing.assert_allclose(convolve(f, h + k).coeffs, (convolve(f, h) + convolve(f, k)).coeffs, atol=1e-12)


def test_integer_products_are_exact():
    g = group_groupoid(symmetric_group(3))
    rng = np.random.default_rng(5)
    f = random_element(rng, g, integer=True)
    h = random_element(rng, g, integer=True)
    product = convolve(f, h)
    assert np.array_equal(product.coeffs, np.round(product.coeffs.real) + 1j * np.round(product.coeffs.imag))


def test_element_documents_reparse_to_equal_elements():
    rng = np.random.default_rng(53)
    for k in range(8):
        g = random_groupoid(rng, 30)
        f = random_element(rng, g, integer=(k % 2 == 0))
        doc = json.loads(to_json(element_to_doc(f, include_groupoid=True)))
        assert element_from_doc(doc) == f
        assert element_from_doc(json.loads(to_json(element_to_doc(f))), g) == f


def test_mixing_groupoids_is_rejected():
    with pytest.raises(GroupoidMismatch):
        convolve(unit_element(pair_groupoid(2)), unit_element(z2()))


# ---------------------------------------------------------------------------
# Involution and representations
# ---------------------------------------------------------------------------

def test_involution_is_an_antimultiplicative_involution():
    rng = np.random.default_rng(3)
    g = random_groupoid(rng, 30)
    f, h = random_element(rng, g), random_element(rng, g)
    assert involution(involution(f)) == f
    np.testing.assert_allclose(involution(convolve(f, h)).coeffs,
                               convolve(involution(h), involution(f)).coeffs, atol=1e-12)


def test_lambda_is_a_star_homomorphism():
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = random_groupoid(rng, 30)
        f, h = random_element(rng, g), random_element(rng, g)
        fh = convolve(f, h)
        for x in range(g.n_units):
            np.testing.assert_allclose(lambda_matrix(fh, x), lambda_matrix(f, x) @ lambda_matrix(h, x), atol=1e-10)
            np.testing.assert_array_equal(lambda_matrix(involution(f), x), lambda_matrix(f, x).conj().T)


def test_left_regular_matrix_is_block_diagonal():
    g = pair_groupoid(2)
    f = element_from_labels(g, {"(1,2)": 1.0})
    big = left_regular_matrix(f)
    assert big.shape == (4, 4)
    np.testing.assert_array_equal(big[:2, :2], lambda_matrix(f, 0))
    np.testing.assert_array_equal(big[2:, 2:], lambda_matrix(f, 1))
    assert not np.any(big[:2, 2:])


def test_unknown_unit_is_rejected():
    with pytest.raises(UnknownUnit):
        regular_representation(unit_element(z2()), "nowhere")


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def test_reduced_norm_matches_pair_groupoid_matrix_norm():
    rng = np.random.default_rng(23)
    for n in range(2, 7):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        expected = np.linalg.svd(a, compute_uv=False)[0]
        assert abs(reduced_norm(pair_element(a)) - expected) <= 1e-10 * max(1.0, expected)


def test_c_star_identity_and_norm_ordering():
    rng = np.random.default_rng(29)
    for _ in range(10):
        g = random_groupoid(rng, 40)
        f = random_element(rng, g)
        norm = reduced_norm(f)
        assert abs(reduced_norm(convolve(involution(f), f)) - norm ** 2) <= 1e-8 * max(1.0, norm ** 2)
        assert norm <= i_norm(f) + 1e-12


def test_unitize_adds_the_identity():
    g = pair_groupoid(2)
    f = element_from_labels(g, {"(1,2)": 5.0})
    np.testing.assert_array_equal(lambda_matrix(unitize(f), 1), np.eye(2) + lambda_matrix(f, 1))
    assert reduced_norm(zero_element(g)) == 0.0


def test_spectral_norm_power_iteration_branch():
    values = np.linspace(1.0, 2.0, 80)
    values[0] = 5.0
    assert spectral_norm(np.diag(values)) == pytest.approx(5.0, rel=1e-9)
    rng = np.random.default_rng(31)
    m = rng.standard_normal((70, 70)) + 1j * rng.standard_normal((70, 70))
    assert spectral_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-6)


def test_spectral_norm_needs_a_square_matrix():
    with pytest.raises(NonSquare):
        spectral_norm(np.zeros((2, 3)))


def test_map_units_keeps_order_with_threads():
    squares = map_units(lambda x: x * x, list(range(8)), n_jobs=2)
    assert squares == [x * x for x in range(8)]
    g = pair_groupoid(4)
    f = random_element(np.random.default_rng(2), g)
    parallel = DEFAULT_SETTINGS.with_overrides(n_jobs=2)
    assert reduced_norm(f, parallel) == reduced_norm(f)


def run_all() -> int:
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]
    failed = 0
    print("=" * 60)
    print("CONVOLUTION ALGEBRA TESTS")
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
