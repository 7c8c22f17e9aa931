#!/usr/bin/env python3
"""
Fredholm analysis tests: symbol certificates, winding numbers, indices of
band operators against the truncation oracle, and settings.
"""

import sys

import numpy as np
import pytest

from src.band_z import (
    BandOperatorZ,
    LaurentOperator,
    LaurentSymbol,
    Periodic,
    bilateral_shift,
    laurent_operator_band,
    two_sided_operator,
)
from src.config import DEFAULT_SETTINGS, Settings, load_settings
from src.errors import LimitLabError, NearZeroSymbol, NotConvergent, StepTooCoarse
from src.fredholm_analysis import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    FredholmReport,
    Orientation,
    calibrated_orientation,
    fredholm_report,
    symbol_min_modulus,
    symbol_status,
    symbol_trace_frame,
    toeplitz_index,
    truncation_kernel_oracle,
    winding_number,
)
from src.samplers import random_nonvanishing_symbol, random_two_sided_operator

FAST = DEFAULT_SETTINGS.with_overrides(samples=4096, section_sizes=(20, 40))


def half_shift() -> BandOperatorZ:
    """Identity on n < 0, forward shift on n >= 0"""
    return two_sided_operator({0: 1.0}, {1: 1.0}, name="half")


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------

def test_monomial_windings_and_toeplitz_indices():
    for k in range(-3, 4):
        s = LaurentSymbol.monomial(k)
        assert winding_number(s, settings=FAST) == k
        assert toeplitz_index(s, settings=FAST) == -k
        assert truncation_kernel_oracle(s, 60).index == -k


def test_random_symbols_wind_as_constructed():
    rng = np.random.default_rng(5)
    for _ in range(15):
        s, expected = random_nonvanishing_symbol(rng)
        assert winding_number(s, settings=FAST) == expected
        assert truncation_kernel_oracle(s, 120).index == -expected


def test_winding_is_additive_over_products():
    rng = np.random.default_rng(11)
    for _ in range(10):
        s1, w1 = random_nonvanishing_symbol(rng)
        s2, w2 = random_nonvanishing_symbol(rng)
        assert winding_number(s1 * s2, settings=FAST) == w1 + w2


def test_conjugate_reflection_reverses_winding():
    rng = np.random.default_rng(13)
    for _ in range(10):
        s, w = random_nonvanishing_symbol(rng)
        assert winding_number(s.conjugate_reflection(), settings=FAST) == -w


def test_toeplitz_index_equals_kernel_minus_cokernel():
    rng = np.random.default_rng(23)
    for _ in range(20):
        s, _ = random_nonvanishing_symbol(rng, max_degree=3)
        estimate = truncation_kernel_oracle(s, 120)
        assert toeplitz_index(s, settings=FAST) == estimate.kernel - estimate.cokernel


def test_vanishing_symbol_is_refuted():
    s = LaurentSymbol.from_coeffs({0: 1.0, 1: 1.0})
    modulus = symbol_min_modulus(s, settings=FAST)
    assert modulus.value <= 1e-12
    assert modulus.theta == pytest.approx(np.pi, abs=1e-6)
    assert symbol_status(modulus, FAST) == REFUTED
    with pytest.raises(NearZeroSymbol):
        winding_number(s, settings=FAST)


def test_modulus_certificate_is_a_lower_bound():
    s = LaurentSymbol.from_coeffs({0: 2.0, 3: 1.0})
    modulus = symbol_min_modulus(s, settings=FAST)
    assert modulus.value == pytest.approx(1.0, abs=1e-9)
    assert modulus.lipschitz == pytest.approx(3.0)
    assert 0 < modulus.lower_bound <= modulus.value
    assert symbol_status(modulus, FAST) == CERTIFIED


def test_small_gap_with_few_samples_is_inconclusive():
    s = LaurentSymbol.from_coeffs({0: 1.0 + 1e-3, 1: 1.0})
    coarse = symbol_min_modulus(s, 16)
    assert coarse.value > DEFAULT_SETTINGS.symbol_tolerance
    assert coarse.lower_bound <= 0
    assert symbol_status(coarse) == INCONCLUSIVE
    with pytest.raises(LimitLabError):
        symbol_min_modulus(s, 8)


def test_coarse_grids_are_rejected_for_winding():
    with pytest.raises(StepTooCoarse):
        winding_number(LaurentSymbol.monomial(5), 16)


def test_symbol_trace_frame():
    frame = symbol_trace_frame(LaurentSymbol.monomial(1), 32)
    assert list(frame.columns) == ["theta", "re", "im", "modulus"]
    assert len(frame) == 32
    np.testing.assert_allclose(frame["modulus"], 1.0)


# ---------------------------------------------------------------------------
# Fredholm reports
# ---------------------------------------------------------------------------

def test_orientation_is_pinned_by_the_bilateral_shift():
    assert calibrated_orientation() == Orientation(1, -1)
    assert calibrated_orientation().index(2, 5) == -3


def test_bilateral_shift_has_index_zero():
    report = fredholm_report(bilateral_shift(), FAST)
    assert report.fredholm
    assert report.status == {"plus": CERTIFIED, "minus": CERTIFIED}
    assert report.windings == {"plus": 1, "minus": 1}
    assert report.index == 0


def test_two_sided_sign_change_keeps_index_zero():
    T = two_sided_operator({0: 3.0, 1: 1.0}, {0: -3.0, 1: 1.0}, window=1)
    report = fredholm_report(T, FAST)
    assert report.fredholm
    assert report.windings == {"plus": 0, "minus": 0}
    assert report.index == 0
    assert truncation_kernel_oracle(T, 100).index == 0


def test_half_shift_has_index_minus_one():
    T = half_shift()
    report = fredholm_report(T, FAST)
    assert report.index == -1
    estimate = truncation_kernel_oracle(T, 100)
    assert (estimate.kernel, estimate.cokernel) == (0, 1)


def test_random_two_sided_operators_match_the_oracle():
    rng = np.random.default_rng(29)
    for _ in range(6):
        T, _, _ = random_two_sided_operator(rng, noise=0.05)
        report = fredholm_report(T, FAST)
        assert report.fredholm
        assert report.index == truncation_kernel_oracle(T, 250).index


def test_vanishing_symbol_is_not_fredholm():
    T = laurent_operator_band(LaurentOperator.from_coeffs({0: 1.0, 1: 1.0}))
    report = fredholm_report(T, FAST.with_overrides(section_sizes=(200,)))
    assert not report.fredholm
    assert report.index is None
    assert report.status["plus"] == REFUTED
    assert report.evidence[200] < 0.05


def test_oscillating_diagonal_has_no_report():
    T = BandOperatorZ(0, ((0, Periodic((1.0, -1.0))),))
    with pytest.raises(NotConvergent):
        fredholm_report(T, FAST)


def test_compact_perturbations_leave_the_report_unchanged():
    T = two_sided_operator({0: 3.0, 1: 1.0}, {0: -3.0, 1: 1.0}, window=1)
    base = fredholm_report(T, FAST)
    for m, table in ((0, {0: 5.0}), (1, {-2: 1j, 3: -4.0})):
        assert fredholm_report(T.perturb(m, table), FAST) == base


def test_report_serialises_and_reloads():
    report = fredholm_report(half_shift(), FAST)
    again = FredholmReport.from_dict(report.to_dict())
    assert again == report
    assert again.evidence == report.evidence
    assert list(report.section_frame().columns) == ["n", "sigma_min"]


def test_index_requires_fredholm():
    with pytest.raises(LimitLabError):
        FredholmReport(False, {}, {}, {}, {}, 3, "")


def test_oracle_size_is_bounded():
    with pytest.raises(LimitLabError):
        truncation_kernel_oracle(bilateral_shift(), 0)
    with pytest.raises(LimitLabError):
        truncation_kernel_oracle(bilateral_shift(), 5000)


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

def test_settings_from_environment():
    settings = load_settings({
        "LIMITLAB_SAMPLES": "4096",
        "LIMITLAB_SECTIONS": "10,20",
        "LIMITLAB_SYMBOL_TOLERANCE": "not-a-number",
        "LIMITLAB_N_JOBS": "",
    })
    assert settings.samples == 4096
    assert settings.section_sizes == (10, 20)
    assert settings.symbol_tolerance == Settings().symbol_tolerance
    assert settings.n_jobs == 1
    assert settings.with_overrides(samples=None).samples == 4096


def run_all() -> int:
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]
    failed = 0
    print("=" * 60)
    print("FREDHOLM ANALYSIS TESTS")
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
