#!/usr/bin/env python3
"""
Acceptance Evaluation - LimitLab
Runs the nine acceptance properties on seeded random instances, prints a
summary and writes data/evaluation_report.json
"""

import json
import logging
import os
import sys
import time
from datetime import datetime

import numpy as np

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, ROOT)

from src.band_z import (  # noqa: E402
    MINUS_INFINITY,
    PLUS_INFINITY,
    BandOperatorZ,
    LaurentOperator,
    LaurentSymbol,
    Periodic,
    bilateral_shift,
    laurent_operator_band,
    laurent_symbol,
    limit_operator,
    parse_direction,
    two_sided_operator,
)
from src.config import DEFAULT_SETTINGS  # noqa: E402
from src.convolution_algebra import (  # noqa: E402
    convolve,
    element_from_labels,
    involution,
    lambda_matrix,
    left_regular_matrix,
    reduced_norm,
    unitize,
)
from src.errors import NotConvergent  # noqa: E402
from src.fibre_symbol import (  # noqa: E402
    crossed_product_rep,
    equivariance_defect,
    exel_invertibility,
    fibre_bijection_unitary,
    lambda_section,
    main_theorem_check,
)
from src.fredholm_analysis import (  # noqa: E402
    REFUTED,
    fredholm_report,
    toeplitz_index,
    truncation_kernel_oracle,
)
from src.groupoid_core import pair_groupoid, transformation_groupoid  # noqa: E402
from src.samplers import (  # noqa: E402
    main_theorem_instance,
    random_action,
    random_element,
    random_groupoid,
    random_two_sided_operator,
    singular_unitized_element,
)

logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

REPORT_PATH = os.path.join(ROOT, 'data', 'evaluation_report.json')


class AcceptanceEvaluator:
    """
    Seeded acceptance suite. Every criterion records pass/fail, wall time
    and the worst observed quantity so regressions show up in the report.
    """

    def __init__(self, seed: int = 20240601):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.results = {}

    def _record(self, key: str, title: str, passed: bool, started: float, budget=None, **details):
        seconds = time.perf_counter() - started
        if budget is not None and seconds > budget:
            logger.warning(f"{key}: {seconds:.2f}s exceeds the {budget}s budget")
            passed = False
        self.results[key] = {"title": title, "passed": bool(passed), "seconds": round(seconds, 3), **details}
        mark = "✅" if passed else "❌"
        print(f"   {mark} {title} ({seconds:.2f}s)")
        for name, value in details.items():
            print(f"      • {name}: {value}")

    def c_star_identity(self):
        started = time.perf_counter()
        worst = 0.0
        for _ in range(10):
            g = random_groupoid(self.rng, 40)
            for _ in range(5):
                f = random_element(self.rng, g)
                norm = reduced_norm(f)
                gap = abs(reduced_norm(convolve(involution(f), f)) - norm ** 2) / max(1.0, norm ** 2)
                worst = max(worst, gap)
        self._record("c_star_identity", "C*-identity on random groupoids", worst <= 1e-8, started, budget=5.0,
                     worst_relative_gap=worst)

    def pair_groupoid_oracle(self):
        started = time.perf_counter()
        worst = 0.0
        for n in range(2, 9):
            g = pair_groupoid(n)
            for _ in range(20):
                a = self.rng.standard_normal((n, n)) + 1j * self.rng.standard_normal((n, n))
                f = element_from_labels(g, {f"({i},{j})": a[i - 1, j - 1]
                                            for i in range(1, n + 1) for j in range(1, n + 1)})
                expected = np.linalg.svd(a, compute_uv=False)[0]
                worst = max(worst, abs(reduced_norm(f) - expected))
        self._record("pair_groupoid_oracle", "Reduced norm on pair groupoids equals the matrix norm",
                     worst <= 1e-10, started, worst_abs_gap=worst)

    def equivariance(self):
        started = time.perf_counter()
        worst = 0.0
        for _ in range(100):
            g = random_groupoid(self.rng, 40)
            worst = max(worst, equivariance_defect(lambda_section(random_element(self.rng, g))))
        self._record("equivariance", "Regular-representation sections are equivariant", worst <= 1e-12, started,
                     worst_defect=worst)

    def fibrewise_invertibility(self):
        started = time.perf_counter()
        cut = DEFAULT_SETTINGS.invertibility_cut
        disagreements, invertible = 0, 0
        for k in range(100):
            g = random_groupoid(self.rng, 40)
            if k % 2:
                a = singular_unitized_element(self.rng, g, integer=(k % 4 == 1))
            else:
                a = random_element(self.rng, g, integer=(k % 4 == 0), density=0.4)
            report = exel_invertibility(a, mode="unitized")
            sigma = np.linalg.svd(left_regular_matrix(unitize(a)), compute_uv=False)
            oracle = bool(sigma.size == 0 or sigma[-1] > cut)
            disagreements += int(report.verdict != oracle)
            invertible += int(report.verdict)
        singular = 100 - invertible
        self._record("fibrewise_invertibility", "Per-fibre verdict matches the block-diagonal oracle",
                     disagreements == 0 and invertible >= 10 and singular >= 10, started,
                     disagreements=disagreements, invertible=invertible, singular=singular, total=100)

    def invertibility_modulo_interior(self):
        started = time.perf_counter()
        disagreements, singular, worst = 0, 0, 0.0
        for k in range(50):
            make_singular = k % 3 == 0
            f, d = main_theorem_instance(self.rng, singular=make_singular)
            report = main_theorem_check(f, d)
            disagreements += int(not report.agree)
            singular += int(make_singular)
            if make_singular and report.verdict:
                disagreements += 1
            if report.certificate_residual is not None:
                worst = max(worst, report.certificate_residual)
        passed = disagreements == 0 and singular >= 10 and worst <= 1e-9
        self._record("invertibility_modulo_interior", "Four invertibility conditions agree", passed, started,
                     disagreements=disagreements, singular_instances=singular, worst_certificate_residual=worst)

    def index_formula(self):
        started = time.perf_counter()
        settings = DEFAULT_SETTINGS.with_overrides(section_sizes=(50,))
        anchors = {
            "bilateral_shift": fredholm_report(bilateral_shift(), settings).index,
            "plus_minus_three": fredholm_report(
                two_sided_operator({0: 3.0, 1: 1.0}, {0: -3.0, 1: 1.0}, window=1), settings).index,
        }
        mismatches = []
        for k in range(20):
            T, _, _ = random_two_sided_operator(self.rng, max_width=3)
            report = fredholm_report(T, settings)
            oracle = truncation_kernel_oracle(T, 400).index
            if not report.fredholm or report.index != oracle:
                mismatches.append({"case": k, "index": report.index, "oracle": oracle})
        passed = anchors == {"bilateral_shift": 0, "plus_minus_three": 0} and not mismatches
        self._record("index_formula", "Index from limit symbols matches the truncation oracle", passed, started,
                     budget=30.0, anchors=anchors, mismatches=mismatches)

    def toeplitz_criterion(self):
        started = time.perf_counter()
        rows = {}
        for k in range(-3, 4):
            rows[k] = (toeplitz_index(LaurentSymbol.monomial(k)), truncation_kernel_oracle(LaurentSymbol.monomial(k), 100).index)
        exact = all(index == -k and oracle == -k for k, (index, oracle) in rows.items())
        vanishing = laurent_operator_band(LaurentOperator.from_coeffs({0: 1.0, 1: 1.0}))
        report = fredholm_report(vanishing, DEFAULT_SETTINGS.with_overrides(section_sizes=(200,)))
        refused = (not report.fredholm) and REFUTED in report.status.values()
        sigma = report.evidence[200]
        self._record("toeplitz_criterion", "Toeplitz index of monomials and the vanishing symbol",
                     exact and refused and sigma < 0.05, started,
                     monomials={str(k): list(v) for k, v in rows.items()}, vanishing_sigma_min_n200=sigma)

    def limit_operator_laws(self):
        started = time.perf_counter()
        failures = []
        for k in range(10):
            T, _, _ = random_two_sided_operator(self.rng)
            for direction in (PLUS_INFINITY, MINUS_INFINITY):
                L = limit_operator(T, direction)
                if any(limit_operator(T.shift_conjugate(g), direction) != L for g in (-5, 3, 11)):
                    failures.append(f"shift invariance, case {k}, {direction}")
                if limit_operator(T.adjoint(), direction) != L.adjoint():
                    failures.append(f"adjoint, case {k}, {direction}")
                if laurent_symbol(L.adjoint()) != laurent_symbol(L).conjugate_reflection():
                    failures.append(f"adjoint symbol, case {k}, {direction}")

        oscillating = BandOperatorZ(0, ((0, Periodic((1.0, -1.0))),), "oscillating")
        try:
            limit_operator(oscillating, PLUS_INFINITY)
            failures.append("oscillating diagonal converged along +inf")
        except NotConvergent:
            pass
        if limit_operator(oscillating, parse_direction("step:2,0")) != LaurentOperator.from_coeffs({0: 1.0}):
            failures.append("oscillating diagonal along even sites")
        self._record("limit_operator_laws", "Shift invariance, adjoints and refusal", not failures, started,
                     failures=failures)

    def crossed_product(self):
        started = time.perf_counter()
        worst = 0.0
        for _ in range(20):
            action = random_action(self.rng, 6, 6)
            F = random_element(self.rng, transformation_groupoid(action))
            for i, omega in enumerate(action.points):
                V = fibre_bijection_unitary(action, omega)
                gap = np.abs(crossed_product_rep(action, F, omega) - V @ lambda_matrix(F, i) @ V.conj().T).max()
                worst = max(worst, float(gap))
        self._record("crossed_product", "Crossed-product representation is the conjugated regular one",
                     worst <= 1e-12, started, worst_entry_gap=worst)

    def save_results(self):
        report = {
            "generated": datetime.now().isoformat(timespec="seconds"),
            "seed": self.seed,
            "passed": sum(r["passed"] for r in self.results.values()),
            "total": len(self.results),
            "criteria": self.results,
        }
        os.makedirs(os.path.dirname(REPORT_PATH), exist_ok=True)
        with open(REPORT_PATH, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, default=str)
        print(f"\n💾 Report saved to: {REPORT_PATH}")
        return report

    def generate_summary(self, report):
        print(f"\n{'=' * 70}")
        print("📋 ACCEPTANCE SUMMARY")
        print(f"{'=' * 70}")
        for key, row in self.results.items():
            print(f"   {'✅' if row['passed'] else '❌'} {key:<32} {row['seconds']:>8.2f}s")
        print(f"\n   {report['passed']}/{report['total']} criteria passed")
        print(f"{'=' * 70}\n")


def main():
    print("\n" + "=" * 70)
    print("🔬 LIMITLAB ACCEPTANCE EVALUATION")
    print("=" * 70)

    evaluator = AcceptanceEvaluator()
    for step in (
        evaluator.c_star_identity,
        evaluator.pair_groupoid_oracle,
        evaluator.equivariance,
        evaluator.fibrewise_invertibility,
        evaluator.invertibility_modulo_interior,
        evaluator.index_formula,
        evaluator.toeplitz_criterion,
        evaluator.limit_operator_laws,
        evaluator.crossed_product,
    ):
        step()

    report = evaluator.save_results()
    evaluator.generate_summary(report)
    return 0 if report["passed"] == report["total"] else 1


if __name__ == '__main__':
    sys.exit(main())
