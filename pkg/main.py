# main.py
"""
LimitLab - Command-Line Interface
Finite groupoid algebras, fibrewise invertibility and Fredholm indices of
band operators on Z.

Exit codes: 0 success / positive verdict, 1 negative verdict or refusal,
2 malformed input.
"""

import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src.band_z import BandOperatorZ, format_limit_operator, laurent_symbol, limit_operator, parse_direction
from src.config import Settings, load_settings
from src.convolution_algebra import (
    convolve,
    format_fibre_matrix,
    i_norm,
    lambda_matrix,
    reduced_norm,
    regular_representation,
    spectral_norm,
)
from src.errors import FormatError, GroupoidAxiomError, LimitLabError, NearZeroSymbol, NotConvergent
from src.fibre_symbol import (
    BoundaryDecomposition,
    exel_invertibility,
    format_exel_report,
    format_main_theorem_report,
    main_theorem_check,
)
from src.formats import (
    boundary_from_arg,
    element_to_doc,
    is_symbol_doc,
    load_band,
    load_element,
    load_groupoid,
    load_json,
    means_from_doc,
    symbol_from_doc,
    to_json,
)
from src.fredholm_analysis import (
    format_fredholm_report,
    fredholm_report,
    symbol_min_modulus,
    symbol_trace_frame,
    truncation_kernel_oracle,
    winding_number,
)
from src.groupoid_core import (
    format_groupoid_summary,
    format_mean_defect,
    format_violations,
    mean_defect,
    uniform_means,
    unit_point_means,
)

logger = logging.getLogger("limitlab")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


# ---------------------------------------------------------------------------
# Plumbing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def configure_logging(verbosity: int, settings: Settings) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(settings.log_level).upper(), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Defaults, then LIMITLAB_* environment, then command-line flags"""
    return load_settings().with_overrides(
        limit_tolerance=args.tolerance,
        symbol_tolerance=args.symbol_tolerance,
        samples=args.samples,
        section_sizes=tuple(args.sections) if args.sections else None,
        probe_depths=tuple(args.probe_depths) if args.probe_depths else None,
        invertibility_cut=args.cut,
        n_jobs=args.jobs,
    )


def emit(args: argparse.Namespace, payload: Dict, pretty: str,
         frame: Optional[pd.DataFrame] = None, extra: Optional[Dict[str, pd.DataFrame]] = None) -> None:
    """Write one result in the requested format to --out or stdout"""
    extra = extra or {}
    if args.format == "json":
        text = to_json(payload)
    elif args.format == "csv":
        table = frame if frame is not None else pd.json_normalize(payload)
        text = table.to_csv(index=False)
    else:
        text = pretty

    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info(f"Wrote {args.format} output to {args.out}")
        if args.format == "csv":
            stem, _ = os.path.splitext(args.out)
            for suffix, table in extra.items():
                path = f"{stem}_{suffix}.csv"
                table.to_csv(path, index=False)
                logger.info(f"Wrote {suffix} table to {path}")
        return

    print(text.rstrip("\n"))
    if args.format == "csv":
        for table in extra.values():
            print()
            print(table.to_csv(index=False).rstrip("\n"))


def refuse(args: argparse.Namespace, exc: NotConvergent) -> int:
    payload = {"refused": True, "reason": "not_convergent", "message": str(exc), **exc.to_dict()}
    lines = ["\n" + "=" * 60, "⛔ REFUSED: limit does not exist", "=" * 60, f"   {exc}", "   Probes:"]
    for depth, value in zip(exc.probes.depths, exc.probes.values):
        lines.append(f"      n={depth:<7} d={value:.6g}")
    frame = pd.DataFrame({
        "site": exc.probes.depths,
        "re": [v.real for v in exc.probes.values],
        "im": [v.imag for v in exc.probes.values],
    })
    emit(args, payload, "\n".join(lines), frame)
    return EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    try:
        g = load_groupoid(args.groupoid)
    except GroupoidAxiomError as exc:
        payload = {"valid": False, "violations": [v.to_dict() for v in exc.violations]}
        pretty = "\n".join([
            "\n" + "=" * 60, f"❌ INVALID GROUPOID: {args.groupoid}", "=" * 60,
            format_violations(exc.violations),
        ])
        frame = pd.DataFrame([
            {"kind": v.kind, "arrows": " ".join(str(a) for a in v.arrows), "detail": v.detail}
            for v in exc.violations
        ])
        emit(args, payload, pretty, frame)
        return EXIT_NEGATIVE
    payload = {"valid": True, "violations": [], "summary": g.summary()}
    emit(args, payload, format_groupoid_summary(g), pd.DataFrame([g.summary()]))
    return EXIT_OK


def cmd_rep(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    f = load_element(args.element, g)
    fm = regular_representation(f, args.unit)
    labels = [str(a) for a in fm.arrows]
    frame = pd.DataFrame(fm.matrix, columns=labels)
    frame.insert(0, "arrow", labels)
    emit(args, fm.to_dict(), format_fibre_matrix(fm), frame)
    return EXIT_OK


def cmd_norm(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    f = load_element(args.element, g)
    per_unit = [
        {"unit": g.units[x], "norm": spectral_norm(lambda_matrix(f, x), settings)} for x in range(g.n_units)
    ]
    reduced = reduced_norm(f, settings)
    payload = {"reduced_norm": reduced, "i_norm": i_norm(f), "per_unit": per_unit}
    lines = ["\n" + "=" * 60, "📏 NORMS", "=" * 60,
             f"   ||f||_r = {reduced:.12g}", f"   ||f||_I = {payload['i_norm']:.12g}", ""]
    lines += [f"   • ||lambda_{row['unit']}(f)|| = {row['norm']:.12g}" for row in per_unit]
    emit(args, payload, "\n".join(lines), pd.DataFrame(per_unit))
    return EXIT_OK


def cmd_convolve(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    f = load_element(args.left, g)
    h = load_element(args.right, g)
    product = convolve(f, h)
    doc = element_to_doc(product)
    lines = ["\n" + "=" * 60, "✖️  CONVOLUTION f * h", "=" * 60]
    if product.is_zero():
        lines.append("   (zero element)")
    for label, re, im in doc["coeffs"]:
        lines.append(f"   {label}: {complex(re, im):.10g}")
    frame = pd.DataFrame(doc["coeffs"], columns=["arrow", "re", "im"])
    emit(args, doc, "\n".join(lines), frame)
    return EXIT_OK


def _symbol_traces(symbols: Dict, settings: Settings) -> pd.DataFrame:
    frames = []
    for side, s in symbols.items():
        frame = symbol_trace_frame(s, settings.samples, settings)
        frame.insert(0, "side", side)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def cmd_fredholm(args: argparse.Namespace, settings: Settings) -> int:
    T = load_band(args.band)
    try:
        report = fredholm_report(T, settings)
    except NotConvergent as exc:
        return refuse(args, exc)
    emit(args, report.to_dict(), format_fredholm_report(report),
         _symbol_traces(report.symbols, settings), {"sections": report.section_frame()})
    return EXIT_OK if report.fredholm else EXIT_NEGATIVE


def cmd_index(args: argparse.Namespace, settings: Settings) -> int:
    doc = load_json(args.target)
    if not is_symbol_doc(doc):
        T = BandOperatorZ.from_dict(doc, name=os.path.splitext(os.path.basename(args.target))[0])
        try:
            report = fredholm_report(T, settings)
        except NotConvergent as exc:
            return refuse(args, exc)
        payload = {"kind": "band", "fredholm": report.fredholm, "index": report.index,
                   "windings": report.windings, "orientation": report.orientation}
        if report.fredholm:
            pretty = f"\n🔢 Index({T.name}) = {report.index}\n   ℹ️  {report.orientation}"
        else:
            pretty = f"\n⛔ {T.name} is not certified Fredholm (status {report.status}); no index"
        emit(args, payload, pretty, pd.DataFrame([{"index": report.index, "fredholm": report.fredholm}]))
        return EXIT_OK if report.fredholm else EXIT_NEGATIVE

    s = symbol_from_doc(doc)
    modulus = symbol_min_modulus(s, settings.samples, settings)
    try:
        wind = winding_number(s, settings.samples, settings)
    except NearZeroSymbol as exc:
        payload = {"kind": "symbol", "refused": True, "message": str(exc), "min_modulus": modulus.to_dict()}
        pretty = f"\n⛔ {exc}\n   min |s| = {modulus.value:.6g} at θ = {modulus.theta:.6f}"
        emit(args, payload, pretty, symbol_trace_frame(s, settings.samples, settings))
        return EXIT_NEGATIVE
    payload = {"kind": "symbol", "symbol": s.to_dict()["symbol"], "winding": wind, "toeplitz_index": -wind,
               "min_modulus": modulus.to_dict()}
    if args.oracle:
        estimate = truncation_kernel_oracle(s, args.oracle, settings=settings)
        payload["oracle"] = {"n": args.oracle, "kernel": estimate.kernel, "cokernel": estimate.cokernel,
                             "index": estimate.index}
    lines = [f"\n🔄 s = {s}", f"   winding = {wind}", f"   Toeplitz index = {-wind}"]
    if "oracle" in payload:
        o = payload["oracle"]
        lines.append(f"   truncation oracle (n={o['n']}): ker={o['kernel']} coker={o['cokernel']} index={o['index']}")
    emit(args, payload, "\n".join(lines), symbol_trace_frame(s, settings.samples, settings))
    return EXIT_OK


def cmd_exel(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    f = load_element(args.element, g)
    report = exel_invertibility(f, "unitized" if args.unitized else "plain", settings)
    frame = pd.DataFrame([v.to_dict() for v in report.per_unit])
    emit(args, report.to_dict(), format_exel_report(report), frame)
    return EXIT_OK if report.verdict else EXIT_NEGATIVE


def cmd_maintheorem(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    f = load_element(args.element, g)
    d = BoundaryDecomposition.from_boundary(g, boundary_from_arg(args.boundary))
    report = main_theorem_check(f, d, settings)
    frame = pd.DataFrame([v.to_dict() for v in report.per_unit], columns=["unit", "sigma_min", "invertible",
                                                                           "near_threshold"])
    emit(args, report.to_dict(), format_main_theorem_report(report), frame)
    return EXIT_OK if report.verdict else EXIT_NEGATIVE


def cmd_mean_defect(args: argparse.Namespace, settings: Settings) -> int:
    g = load_groupoid(args.groupoid)
    if args.means:
        means = means_from_doc(load_json(args.means), g)
    elif args.family == "unit":
        means = [unit_point_means(g)]
    else:
        means = [uniform_means(g)]
    report = mean_defect(g, means)
    emit(args, report.to_dict(), format_mean_defect(report), report.to_frame())
    return EXIT_OK


def cmd_limit_op(args: argparse.Namespace, settings: Settings) -> int:
    T = load_band(args.band)
    direction = parse_direction(args.direction)
    try:
        L = limit_operator(T, direction, settings)
    except NotConvergent as exc:
        return refuse(args, exc)
    payload = {"direction": str(direction), **L.to_dict(), "symbol": laurent_symbol(L).to_dict()["symbol"]}
    frame = pd.DataFrame(L.to_dict()["coeffs"], columns=["m", "re", "im"])
    emit(args, payload, format_limit_operator(L, direction), frame)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "validate": cmd_validate,
    "rep": cmd_rep,
    "norm": cmd_norm,
    "convolve": cmd_convolve,
    "fredholm": cmd_fredholm,
    "index": cmd_index,
    "exel": cmd_exel,
    "maintheorem": cmd_maintheorem,
    "mean-defect": cmd_mean_defect,
    "limit-op": cmd_limit_op,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, help="limit tolerance for sampled diagonals")
    common.add_argument("--symbol-tolerance", type=float, help="threshold below which a symbol counts as vanishing")
    common.add_argument("--samples", type=int, help="circle samples N for symbol checks")
    common.add_argument("--sections", type=_int_list, help="finite-section sizes, e.g. 50,100,200")
    common.add_argument("--probe-depths", type=_int_list, help="probe depths for limit checks")
    common.add_argument("--cut", type=float, help="singular-value cut for invertibility")
    common.add_argument("--jobs", type=int, help="parallel workers for per-unit work")
    common.add_argument("--format", choices=["pretty", "json", "csv"], default="pretty")
    common.add_argument("--out", help="write the result to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = argparse.ArgumentParser(
        prog="limitlab",
        description="Finite groupoid algebras, symbols and Fredholm indices of band operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the groupoid axioms of a document")
    p.add_argument("groupoid")

    p = sub.add_parser("rep", parents=[common], help="matrix of the regular representation at a unit")
    p.add_argument("groupoid")
    p.add_argument("element")
    p.add_argument("unit")

    p = sub.add_parser("norm", parents=[common], help="reduced and I-norms of an element")
    p.add_argument("groupoid")
    p.add_argument("element")

    p = sub.add_parser("convolve", parents=[common], help="convolution product of two elements")
    p.add_argument("groupoid")
    p.add_argument("left")
    p.add_argument("right")

    p = sub.add_parser("fredholm", parents=[common], help="Fredholm report of a band operator")
    p.add_argument("band")

    p = sub.add_parser("index", parents=[common], help="Toeplitz index of a symbol or index of a band operator")
    p.add_argument("target")
    p.add_argument("--oracle", type=int, help="also run the truncation oracle at this size (symbols only)")

    p = sub.add_parser("exel", parents=[common], help="fibrewise invertibility test")
    p.add_argument("groupoid")
    p.add_argument("element")
    p.add_argument("--unitized", action="store_true", help="test 1 + f instead of f")

    p = sub.add_parser("maintheorem", parents=[common], help="invertibility modulo the interior ideal")
    p.add_argument("groupoid")
    p.add_argument("element")
    p.add_argument("--boundary", required=True, help="comma-separated boundary units or a boundary file")

    p = sub.add_parser("mean-defect", parents=[common], help="defects of approximate invariant means")
    p.add_argument("groupoid")
    p.add_argument("--family", choices=["uniform", "unit"], default="uniform")
    p.add_argument("--means", help="means document overriding --family")

    p = sub.add_parser("limit-op", parents=[common], help="limit operator of a band operator along a direction")
    p.add_argument("band")
    p.add_argument("--direction", default="plus", help="plus, minus or step:a,b")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = settings_from_args(args)
    configure_logging(args.verbose, settings)
    np.set_printoptions(precision=6, suppress=True)

    handler = COMMANDS[args.command]
    try:
        return handler(args, settings)
    except FormatError as exc:
        print(f"❌ Input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LimitLabError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except OSError as exc:
        print(f"❌ Input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
