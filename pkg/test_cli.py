#!/usr/bin/env python3
"""
End-to-end tests of the limitlab command line on the bundled example
documents: exit codes, JSON payloads and CSV side tables.
"""

import json
import os
import sys
import tempfile

import pandas as pd

from main import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, main
from src.convolution_algebra import convolve
from src.fibre_symbol import ExelReport, MainTheoremReport
from src.formats import element_from_doc, load_element, load_groupoid, to_json

EXAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "examples")
FAST = ["--samples", "4096", "--sections", "20,40"]


def ex(name: str) -> str:
    return os.path.join(EXAMPLES, name)


def run_json(*argv):
    """Run one command with --format json and return (exit code, payload)"""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "result.json")
        code = main([*argv, "--format", "json", "--out", out])
        payload = None
        if os.path.exists(out):
            with open(out, "r", encoding="utf-8") as f:
                payload = json.load(f)
    return code, payload


# ---------------------------------------------------------------------------
# Groupoids and elements
# ---------------------------------------------------------------------------

def test_validate_exit_codes():
    code, payload = run_json("validate", ex("pair3.json"))
    assert code == EXIT_OK
    assert payload["valid"] and payload["summary"]["arrows"] == 9

    code, payload = run_json("validate", ex("broken.json"))
    assert code == EXIT_NEGATIVE
    assert "ambiguous_unit_arrow" in {v["kind"] for v in payload["violations"]}

    assert run_json("validate", ex("malformed.json"))[0] == EXIT_INPUT
    assert run_json("validate", ex("does_not_exist.json"))[0] == EXIT_INPUT


def test_unhashable_ids_are_input_errors():
    docs = [
        {"units": [1], "arrows": [{"id": [1], "s": 1, "r": 1}], "compose": [], "invert": []},
        {"units": [[1]], "arrows": [{"id": 1, "s": 1, "r": 1}], "compose": [], "invert": []},
        {"units": [1], "arrows": [{"id": 1, "s": 1, "r": 1}], "compose": [[1, 1, {"a": 1}]], "invert": []},
    ]
    with tempfile.TemporaryDirectory() as tmp:
        for i, doc in enumerate(docs):
            path = os.path.join(tmp, f"ids_{i}.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump(doc, f)
            assert run_json("validate", path)[0] == EXIT_INPUT


def test_rep_prints_the_circulant():
    code, payload = run_json("rep", ex("z2.json"), ex("z2_element.json"), "*")
    assert code == EXIT_OK
    assert payload["arrows"] == ["e", "g"]
    assert payload["real"] == [[2.0, 1.0], [1.0, 2.0]]


def test_norm_and_convolve():
    code, payload = run_json("norm", ex("z2.json"), ex("z2_element.json"))
    assert code == EXIT_OK
    assert abs(payload["reduced_norm"] - 3.0) < 1e-12
    code, payload = run_json("convolve", ex("z2.json"), ex("z2_element.json"), ex("z2_element.json"))
    assert code == EXIT_OK
    assert payload["coeffs"] == [["e", 5.0, 0.0], ["g", 4.0, 0.0]]
    g = load_groupoid(ex("z2.json"))
    f = load_element(ex("z2_element.json"), g)
    assert element_from_doc(payload, g) == convolve(f, f)


def test_element_on_the_wrong_groupoid_is_rejected():
    assert run_json("rep", ex("pair3.json"), ex("z2_element.json"), "1")[0] == EXIT_NEGATIVE


def test_exel_verdicts():
    code, payload = run_json("exel", ex("z2.json"), ex("z2_unit.json"))
    assert code == EXIT_OK and payload["verdict"]
    code, payload = run_json("exel", ex("z2.json"), ex("z2_singular.json"))
    assert code == EXIT_NEGATIVE and not payload["verdict"]
    assert run_json("exel", ex("pair3.json"), ex("pair3_nilpotent.json"), "--unitized")[0] == EXIT_OK
    assert run_json("exel", ex("pair3.json"), ex("pair3_nilpotent.json"))[0] == EXIT_NEGATIVE


def test_report_payloads_reparse():
    g = load_groupoid(ex("pair3.json"))
    for flags in ([], ["--unitized"]):
        _, payload = run_json("exel", ex("pair3.json"), ex("pair3_nilpotent.json"), *flags)
        assert json.loads(to_json(ExelReport.from_dict(payload, g).to_dict())) == payload
    g = load_groupoid(ex("two_blocks.json"))
    for element in ("two_blocks_element.json", "two_blocks_singular.json"):
        _, payload = run_json("maintheorem", ex("two_blocks.json"), ex(element), "--boundary", "1:*")
        report = MainTheoremReport.from_dict(payload, g)
        assert json.loads(to_json(report.to_dict())) == payload


def test_main_theorem_verdicts():
    code, payload = run_json("maintheorem", ex("two_blocks.json"), ex("two_blocks_element.json"),
                             "--boundary", "1:*")
    assert code == EXIT_OK
    assert payload["conditions"] == {"c1": True, "c2": True, "c3": True, "c4": True}
    assert abs(payload["quotient_norm"] - 3.0) < 1e-9

    code, payload = run_json("maintheorem", ex("two_blocks.json"), ex("two_blocks_singular.json"),
                             "--boundary", ex("boundary.json"))
    assert code == EXIT_NEGATIVE
    assert payload["agree"] and not payload["verdict"]

    code, _ = run_json("maintheorem", ex("two_blocks.json"), ex("two_blocks_element.json"), "--boundary", "0:1")
    assert code == EXIT_NEGATIVE


def test_mean_defect_from_a_document():
    code, payload = run_json("mean-defect", ex("z4.json"), "--means", ex("means_z4.json"))
    assert code == EXIT_OK
    assert [row["d2"] for row in payload["rows"]] == [2.0, 2.0, 0.0]
    assert [row["d1"] for row in payload["rows"]] == [0.0, 0.0, 0.0]
    code, payload = run_json("mean-defect", ex("pair3.json"), "--family", "uniform")
    assert code == EXIT_OK and abs(payload["rows"][0]["d2"]) < 1e-12


# ---------------------------------------------------------------------------
# Band operators and symbols
# ---------------------------------------------------------------------------

def test_fredholm_reports():
    code, payload = run_json("fredholm", ex("shift.json"), *FAST)
    assert code == EXIT_OK
    assert payload["fredholm"] and payload["index"] == 0
    code, payload = run_json("fredholm", ex("two_sided.json"), *FAST)
    assert code == EXIT_OK and payload["index"] == 0
    code, payload = run_json("fredholm", ex("vanishing.json"), *FAST)
    assert code == EXIT_NEGATIVE
    assert payload["status"]["plus"] == "refuted" and payload["index"] is None


def test_oscillating_band_is_refused():
    code, payload = run_json("fredholm", ex("oscillating.json"), *FAST)
    assert code == EXIT_NEGATIVE
    assert payload["refused"] and payload["reason"] == "not_convergent"
    code, _ = run_json("limit-op", ex("oscillating.json"))
    assert code == EXIT_NEGATIVE
    code, payload = run_json("limit-op", ex("oscillating.json"), "--direction", "step:2,0")
    assert code == EXIT_OK
    assert payload["coeffs"] == [[0, 1.0, 0.0]]
    for direction in ("step:1,0", "step:3,0", "step:-1,0"):
        assert run_json("limit-op", ex("oscillating.json"), "--direction", direction)[0] == EXIT_NEGATIVE
    assert run_json("limit-op", ex("oscillating.json"), "--direction", "sideways")[0] == EXIT_INPUT


def test_index_of_symbols_and_bands():
    code, payload = run_json("index", ex("symbol_z3.json"), "--oracle", "40", *FAST)
    assert code == EXIT_OK
    assert payload["winding"] == 3 and payload["toeplitz_index"] == -3
    assert payload["oracle"]["index"] == -3
    code, payload = run_json("index", ex("symbol_vanishing.json"), *FAST)
    assert code == EXIT_NEGATIVE and payload["refused"]
    code, payload = run_json("index", ex("half_shift.json"), *FAST)
    assert code == EXIT_OK
    assert payload["kind"] == "band" and payload["index"] == -1


def test_csv_output_writes_the_sections_table():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "shift.csv")
        code = main(["fredholm", ex("shift.json"), *FAST, "--format", "csv", "--out", out])
        assert code == EXIT_OK
        traces = pd.read_csv(out)
        assert set(traces["side"]) == {"plus", "minus"}
        assert len(traces) == 2 * 4096
        sections = pd.read_csv(os.path.join(tmp, "shift_sections.csv"))
        assert list(sections["n"]) == [20, 40]


def run_all() -> int:
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_") and callable(fn)]
    failed = 0
    print("=" * 60)
    print("COMMAND LINE TESTS")
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
