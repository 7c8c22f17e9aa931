"""
Fredholm Analysis for Band Operators on Z

- symbol minimum modulus with a Lipschitz lower-bound certificate
- winding numbers of nonvanishing symbols by argument accumulation
- Fredholm report: limit symbols at +inf / -inf, tri-state certification,
  index from the two windings, finite-section evidence
- Toeplitz index and a rectangular-truncation kernel/cokernel oracle

The sign convention for the -inf symbol is not assumed: it is calibrated
once against the bilateral shift, whose index is 0.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.optimize

from .band_z import (
    MINUS_INFINITY,
    PLUS_INFINITY,
    BandOperatorZ,
    LaurentSymbol,
    bilateral_shift,
    laurent_symbol,
    limit_operator,
)
from .config import DEFAULT_SETTINGS, Settings
from .errors import LimitLabError, NearZeroSymbol, StepTooCoarse

logger = logging.getLogger(__name__)

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

MAX_ORACLE_SIZE = 2000


# ---------------------------------------------------------------------------
# Symbol sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolModulus:
    """min |s| over the sample grid (refined), plus a certified lower bound"""
    value: float
    theta: float
    lipschitz: float
    lower_bound: float
    samples: int

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> Dict:
        return {"value": self.value, "theta": self.theta, "lipschitz": self.lipschitz,
                "lower_bound": self.lower_bound, "samples": self.samples}


def symbol_min_modulus(s: LaurentSymbol, n: Optional[int] = None,
                       settings: Settings = DEFAULT_SETTINGS) -> SymbolModulus:
    """
    Minimum of |s| over theta_j = 2 pi j / n, refined on the bracket around
    the best sample. The bound min_j |s(theta_j)| - L pi / n with
    L = sum |m c_m| holds on the whole circle.
    """
    n = settings.samples if n is None else n
    if n < 16:
        raise LimitLabError(f"need at least 16 samples, got {n}")
    modulus = np.abs(s.samples(n))
    j = int(np.argmin(modulus))
    sample_min = float(modulus[j])
    step = 2 * np.pi / n
    theta_j = j * step

    refined = scipy.optimize.minimize_scalar(
        lambda t: float(np.abs(s.evaluate(t))),
        bounds=(theta_j - step, theta_j + step),
        method="bounded",
        options={"xatol": 1e-13},
    )
    if refined.success and refined.fun < sample_min:
        value, theta = float(refined.fun), float(refined.x % (2 * np.pi))
    else:
        value, theta = sample_min, theta_j

    lipschitz = float(sum(abs(m) * abs(c) for m, c in s.coeffs))
    lower = sample_min - lipschitz * np.pi / n
    return SymbolModulus(value, theta, lipschitz, float(lower), n)


def symbol_status(modulus: SymbolModulus, settings: Settings = DEFAULT_SETTINGS) -> str:
    if modulus.value <= settings.symbol_tolerance:
        return REFUTED
    if modulus.lower_bound > 0:
        return CERTIFIED
    return INCONCLUSIVE


def winding_number(s: LaurentSymbol, n: Optional[int] = None, settings: Settings = DEFAULT_SETTINGS) -> int:
    """Net counterclockwise turns of theta -> s(theta) around 0"""
    n = settings.samples if n is None else n
    modulus = symbol_min_modulus(s, n, settings)
    if modulus.value <= settings.symbol_tolerance:
        raise NearZeroSymbol(modulus.value, settings.symbol_tolerance)
    values = s.samples(n)
    closed = np.append(values, values[0])
    jumps = np.angle(closed[1:] / closed[:-1])
    max_jump = float(np.max(np.abs(jumps)))
    if max_jump >= np.pi / 2:
        raise StepTooCoarse(max_jump, n)
    turns = float(jumps.sum()) / (2 * np.pi)
    return int(round(turns))


def toeplitz_index(s: LaurentSymbol, n: Optional[int] = None, settings: Settings = DEFAULT_SETTINGS) -> int:
    """Index of the Toeplitz operator with symbol s on l2(N)"""
    return -winding_number(s, n, settings)


def symbol_trace_frame(s: LaurentSymbol, n: Optional[int] = None,
                       settings: Settings = DEFAULT_SETTINGS) -> pd.DataFrame:
    n = settings.samples if n is None else n
    values = s.samples(n)
    return pd.DataFrame({
        "theta": 2 * np.pi * np.arange(n) / n,
        "re": values.real,
        "im": values.imag,
        "modulus": np.abs(values),
    })


# ---------------------------------------------------------------------------
# Truncation oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelEstimate:
    kernel: int
    cokernel: int

    @property
    def index(self) -> int:
        return self.kernel - self.cokernel


def _kernel_dimension(matrix: np.ndarray, rank_tol: float) -> int:
    cols = matrix.shape[1]
    if cols == 0:
        return 0
    sigma = scipy.linalg.svdvals(matrix)
    if sigma.size == 0 or sigma[0] == 0:
        return cols
    return cols - int(np.sum(sigma > rank_tol * sigma[0]))


def toeplitz_section(s: LaurentSymbol, n: int) -> np.ndarray:
    """Columns 0..n-1 and rows 0..n+w-1 of the Toeplitz matrix [c_(i-j)]"""
    w = s.degree
    first_col = np.array([s.coefficient(k) for k in range(n + w)], dtype=np.complex128)
    first_row = np.array([s.coefficient(-k) for k in range(n)], dtype=np.complex128)
    return scipy.linalg.toeplitz(first_col, first_row)


def truncation_kernel_oracle(target: Union[BandOperatorZ, LaurentSymbol], n: int,
                             rank_tol: Optional[float] = None,
                             settings: Settings = DEFAULT_SETTINGS) -> KernelEstimate:
    """
    Kernel / cokernel estimate from one-sided (tall) truncations of T and T*.

    A BandOperatorZ is cut to columns [-n, n] and rows [-n-w, n+w]; a symbol
    is read as the Toeplitz operator on l2(N) cut to n columns. Each column
    keeps all of its band, so the truncation is T restricted to a subspace.
    """
    if n < 1 or n > MAX_ORACLE_SIZE:
        raise LimitLabError(f"oracle size must lie in [1, {MAX_ORACLE_SIZE}], got {n}")
    tol = settings.rank_tol if rank_tol is None else rank_tol
    if isinstance(target, LaurentSymbol):
        forward = toeplitz_section(target, n)
        backward = toeplitz_section(target.conjugate_reflection(), n)
    else:
        w = target.width
        forward = target.rectangular_section((-n - w, n + w), (-n, n))
        backward = target.adjoint().rectangular_section((-n - w, n + w), (-n, n))
    estimate = KernelEstimate(_kernel_dimension(forward, tol), _kernel_dimension(backward, tol))
    logger.debug(f"truncation oracle n={n}: ker={estimate.kernel} coker={estimate.cokernel}")
    return estimate


# ---------------------------------------------------------------------------
# Orientation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Orientation:
    """Index = minus_sign * wind(f_-inf) + plus_sign * wind(f_+inf)"""
    minus_sign: int
    plus_sign: int

    def index(self, wind_minus: int, wind_plus: int) -> int:
        return self.minus_sign * wind_minus + self.plus_sign * wind_plus

    def describe(self) -> str:
        traversal = "clockwise" if self.minus_sign == 1 else "counterclockwise"
        return (f"Index = -wind(f_-inf) - wind(f_+inf) with f_-inf traversed {traversal} "
                f"(= {self.minus_sign:+d}·wind(f_-inf) {self.plus_sign:+d}·wind(f_+inf), counterclockwise windings)")


@lru_cache(maxsize=1)
def calibrated_orientation() -> Orientation:
    """Pin the traversal of the -inf symbol with the bilateral shift (index 0)"""
    anchor = bilateral_shift()
    oracle = truncation_kernel_oracle(anchor, 50).index
    symbol_plus = laurent_symbol(limit_operator(anchor, PLUS_INFINITY))
    symbol_minus = laurent_symbol(limit_operator(anchor, MINUS_INFINITY))
    w_plus, w_minus = winding_number(symbol_plus), winding_number(symbol_minus)
    plus_sign = -1
    minus_sign = (oracle - plus_sign * w_plus) // w_minus
    orientation = Orientation(int(minus_sign), plus_sign)
    logger.info(f"orientation calibrated on the bilateral shift: {orientation.describe()}")
    return orientation


# ---------------------------------------------------------------------------
# Fredholm report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FredholmReport:
    fredholm: bool
    status: Dict[str, str]
    symbols: Dict[str, LaurentSymbol]
    min_modulus: Dict[str, SymbolModulus]
    windings: Dict[str, Optional[int]]
    index: Optional[int]
    orientation: str
    evidence: Dict[int, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.index is not None and not self.fredholm:
            raise LimitLabError("index is only defined for certified Fredholm operators")

    def to_dict(self) -> Dict:
        return {
            "fredholm": self.fredholm,
            "status": dict(self.status),
            "symbols": {side: s.to_dict()["symbol"] for side, s in self.symbols.items()},
            "min_modulus": {side: m.to_dict() for side, m in self.min_modulus.items()},
            "windings": dict(self.windings),
            "index": self.index,
            "orientation": self.orientation,
            "evidence": [{"n": n, "sigma_min": v} for n, v in sorted(self.evidence.items())],
        }

    @classmethod
    def from_dict(cls, doc: Dict) -> "FredholmReport":
        return cls(
            fredholm=bool(doc["fredholm"]),
            status=dict(doc["status"]),
            symbols={side: LaurentSymbol.from_coeffs((int(m), complex(re, im)) for m, re, im in coeffs)
                     for side, coeffs in doc["symbols"].items()},
            min_modulus={side: SymbolModulus(**m) for side, m in doc["min_modulus"].items()},
            windings={side: (None if w is None else int(w)) for side, w in doc["windings"].items()},
            index=None if doc.get("index") is None else int(doc["index"]),
            orientation=doc["orientation"],
            evidence={int(row["n"]): float(row["sigma_min"]) for row in doc.get("evidence", [])},
        )

    def section_frame(self) -> pd.DataFrame:
        return pd.DataFrame(sorted(self.evidence.items()), columns=["n", "sigma_min"])


def finite_section_evidence(T: BandOperatorZ, sizes, settings: Settings = DEFAULT_SETTINGS) -> Dict[int, float]:
    evidence = {}
    for n in sizes:
        sigma = scipy.linalg.svdvals(T.finite_section(int(n)))
        evidence[int(n)] = float(sigma[-1]) if sigma.size else 0.0
    return evidence


def fredholm_report(T: BandOperatorZ, settings: Settings = DEFAULT_SETTINGS) -> FredholmReport:
    """
    Certify Fredholmness through the limit symbols at +inf and -inf and,
    when certified, compute the index from their windings. Raises
    NotConvergent when a diagonal has no limit at either end.
    """
    sides = {"plus": PLUS_INFINITY, "minus": MINUS_INFINITY}
    symbols, moduli, status = {}, {}, {}
    for side, direction in sides.items():
        symbols[side] = laurent_symbol(limit_operator(T, direction, settings))
        moduli[side] = symbol_min_modulus(symbols[side], settings.samples, settings)
        status[side] = symbol_status(moduli[side], settings)
        if status[side] == INCONCLUSIVE:
            logger.warning(
                f"{T.name}: symbol at {direction} has min modulus {moduli[side].value:.3e} but the "
                f"certificate is not positive ({moduli[side].lower_bound:.3e}); raise the sample count"
            )

    fredholm = all(v == CERTIFIED for v in status.values())
    orientation = calibrated_orientation()
    windings: Dict[str, Optional[int]] = {"plus": None, "minus": None}
    index = None
    if fredholm:
        windings = {side: winding_number(symbols[side], settings.samples, settings) for side in sides}
        index = orientation.index(windings["minus"], windings["plus"])

    evidence = finite_section_evidence(T, settings.section_sizes, settings)
    logger.info(f"{T.name}: fredholm={fredholm} index={index} status={status}")
    return FredholmReport(fredholm, status, symbols, moduli, windings, index, orientation.describe(), evidence)


def format_fredholm_report(report: FredholmReport) -> str:
    verdict = "✅ FREDHOLM" if report.fredholm else "❌ NOT CERTIFIED FREDHOLM"
    lines = ["\n" + "=" * 60, f"📐 FREDHOLM REPORT: {verdict}", "=" * 60]
    for side in ("minus", "plus"):
        label = "-inf" if side == "minus" else "+inf"
        m = report.min_modulus[side]
        lines.append(f"\n   {label}: f = {report.symbols[side]}")
        lines.append(f"      min |f| = {m.value:.6g} at θ = {m.theta:.6f}  (certified bound {m.lower_bound:.3e})")
        lines.append(f"      status  = {report.status[side]}")
        if report.windings[side] is not None:
            lines.append(f"      winding = {report.windings[side]}")
    if report.index is not None:
        lines.append(f"\n   🔢 Index = {report.index}")
    lines.append(f"   ℹ️  {report.orientation}")
    if report.evidence:
        lines.append("\n   Finite-section evidence (sigma_min):")
        for n, value in sorted(report.evidence.items()):
            lines.append(f"      n={n:<5} {value:.6e}")
    return "\n".join(lines)
