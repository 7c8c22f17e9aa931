"""
Band Operators on l2(Z)

Width-w banded operators whose diagonals are structured coefficient
sequences, with:
- entries, shift conjugation, adjoints and finite-rank perturbations
- limit operators along +inf, -inf or a declared subsequence
- Laurent operators and their trigonometric-polynomial symbols
- square and rectangular finite sections

Diagonal convention: d_m(n) = T[n+m, n], so the shift V with d_1 = 1
sends delta_n to delta_(n+1).
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_SETTINGS, Settings
from .errors import FormatError, LimitLabError, NotConvergent

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]


def parse_complex(value) -> complex:
    """A JSON number or a [re, im] pair"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise FormatError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise FormatError(f"not a number: {value!r}")


def complex_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------------------
# Directions
# ---------------------------------------------------------------------------

TAIL_RUN = 64


@dataclass(frozen=True)
class DirectionSpec:
    """
    +inf, -inf, or a subsequence n_k with |n_k| strictly increasing.
    Arithmetic subsequences n_k = a*k + b keep (a, b) in `step` so
    structured diagonals can decide them exactly.
    """
    kind: str
    generator: Optional[Callable[[int], int]] = field(default=None, compare=False)
    label: str = ""
    step: Optional[Tuple[int, int]] = None

    def sites(self, depths: Sequence[int]) -> np.ndarray:
        depths = np.asarray(depths, dtype=np.int64)
        if self.kind == "plus":
            return depths
        if self.kind == "minus":
            return -depths
        sites = np.array([int(self.generator(int(k))) for k in depths], dtype=np.int64)
        magnitudes = np.abs(sites)
        if np.any(np.diff(magnitudes) <= 0):
            raise LimitLabError(f"subsequence {self.label or 'generator'} is not strictly increasing in |n_k|")
        return sites

    def tail_sites(self, settings: Settings = DEFAULT_SETTINGS, length: int = TAIL_RUN) -> np.ndarray:
        """n_k for a run of consecutive k starting at the deepest probe"""
        start = max(settings.probe_depths)
        return self.sites(np.arange(start, start + length))

    def __str__(self) -> str:
        if self.kind == "plus":
            return "+inf"
        if self.kind == "minus":
            return "-inf"
        return f"subsequence({self.label})" if self.label else "subsequence"


PLUS_INFINITY = DirectionSpec("plus")
MINUS_INFINITY = DirectionSpec("minus")


def subsequence(generator: Callable[[int], int], label: str = "") -> DirectionSpec:
    return DirectionSpec("subsequence", generator, label)


def step_direction(a: int, b: int = 0) -> DirectionSpec:
    """n_k = a*k + b"""
    if a == 0:
        raise LimitLabError("step direction needs a != 0")
    return DirectionSpec("subsequence", lambda k: a * k + b, f"{a}k{b:+d}", (int(a), int(b)))


def parse_direction(text: str) -> DirectionSpec:
    text = text.strip().lower()
    if text in ("plus", "+", "+inf", "+infinity"):
        return PLUS_INFINITY
    if text in ("minus", "-", "-inf", "-infinity"):
        return MINUS_INFINITY
    if text.startswith("step:"):
        parts = text[5:].split(",")
        try:
            a = int(parts[0])
            b = int(parts[1]) if len(parts) > 1 else 0
        except (ValueError, IndexError):
            raise FormatError(f"malformed direction {text!r}; expected step:a,b") from None
        return step_direction(a, b)
    raise FormatError(f"unknown direction {text!r}; use plus, minus or step:a,b")


# ---------------------------------------------------------------------------
# Coefficient sequences
# ---------------------------------------------------------------------------

class CoefficientSequence(ABC):
    """n -> d(n) on Z"""
    kind: str = ""

    @abstractmethod
    def values(self, n: np.ndarray) -> np.ndarray:
        """Vectorised evaluation at integer sites"""

    @abstractmethod
    def shifted(self, g: int) -> "CoefficientSequence":
        """The sequence n -> d(n + g)"""

    @abstractmethod
    def conjugate(self) -> "CoefficientSequence":
        pass

    @abstractmethod
    def limit(self, direction: DirectionSpec, settings: Settings = DEFAULT_SETTINGS, diagonal: int = 0) -> complex:
        """Limit along a direction; raises NotConvergent"""

    def __call__(self, n: int) -> complex:
        return complex(self.values(np.array([n], dtype=np.int64))[0])

    def constant_value(self) -> Optional[complex]:
        return None

    def to_dict(self) -> Dict:
        raise FormatError(f"{type(self).__name__} sequences cannot be written to a document")


@dataclass(frozen=True)
class FiniteSupport(CoefficientSequence):
    """Finitely many nonzero values; zero elsewhere"""
    table: Tuple[Tuple[int, complex], ...] = ()
    kind = "finite"

    @classmethod
    def from_mapping(cls, values: Mapping[int, Number]) -> "FiniteSupport":
        return cls(tuple(sorted((int(n), complex(v)) for n, v in values.items() if v != 0)))

    def as_mapping(self) -> Dict[int, complex]:
        return dict(self.table)

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        out = np.zeros(n.shape, dtype=np.complex128)
        for site, value in self.table:
            out[n == site] = value
        return out

    def shifted(self, g: int) -> "FiniteSupport":
        return FiniteSupport(tuple((n - g, v) for n, v in self.table))

    def conjugate(self) -> "FiniteSupport":
        return FiniteSupport(tuple((n, v.conjugate()) for n, v in self.table))

    def limit(self, direction, settings=DEFAULT_SETTINGS, diagonal=0) -> complex:
        return 0j

    def constant_value(self) -> Optional[complex]:
        return 0j if not self.table else None

    @property
    def bound(self) -> int:
        return max((abs(n) for n, _ in self.table), default=0)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "values": [[n, v.real, v.imag] for n, v in self.table]}


@dataclass(frozen=True)
class Periodic(CoefficientSequence):
    """d(n) = values[n mod p]"""
    values_: Tuple[complex, ...] = (0j,)
    kind = "periodic"

    def __post_init__(self):
        if len(self.values_) < 1:
            raise LimitLabError("periodic sequence needs period >= 1")
        object.__setattr__(self, "values_", tuple(complex(v) for v in self.values_))

    @property
    def period(self) -> int:
        return len(self.values_)

    def values(self, n: np.ndarray) -> np.ndarray:
        table = np.array(self.values_, dtype=np.complex128)
        return table[np.mod(np.asarray(n, dtype=np.int64), self.period)]

    def shifted(self, g: int) -> "Periodic":
        p = self.period
        return Periodic(tuple(self.values_[(k + g) % p] for k in range(p)))

    def conjugate(self) -> "Periodic":
        return Periodic(tuple(v.conjugate() for v in self.values_))

    def constant_value(self) -> Optional[complex]:
        first = self.values_[0]
        return first if all(v == first for v in self.values_) else None

    def limit(self, direction, settings=DEFAULT_SETTINGS, diagonal=0) -> complex:
        constant = self.constant_value()
        if constant is not None:
            return constant
        if direction.kind in ("plus", "minus"):
            # one full period far out shows the oscillation
            sign = 1 if direction.kind == "plus" else -1
            sites = sign * (max(settings.probe_depths) + np.arange(self.period, dtype=np.int64))
            raise NotConvergent(diagonal, [int(s) for s in sites], self.values(sites), str(direction))
        p = self.period
        if direction.step is not None:
            # a*k + b mod p runs through the same residues for every block of p consecutive k
            a, b = direction.step
            sites = a * (max(settings.probe_depths) + np.arange(p, dtype=np.int64)) + b
            seen = self.values(sites)
            if np.all(seen == seen[0]):
                return complex(seen[0])
            raise NotConvergent(diagonal, [int(s) for s in sites], seen, str(direction))
        sites = np.concatenate([direction.sites(settings.probe_depths),
                                direction.tail_sites(settings, max(TAIL_RUN, 2 * p))])
        seen = self.values(sites)
        if np.all(seen == seen[0]):
            logger.warning(f"diagonal {diagonal}: periodic limit along {direction} read off "
                           f"{len(sites)} sampled sites; this is heuristic")
            return complex(seen[0])
        raise NotConvergent(diagonal, [int(s) for s in sites], seen, str(direction))

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "values": [complex_pair(v) for v in self.values_]}


@dataclass(frozen=True)
class EventuallyConstant(CoefficientSequence):
    """Table on [-N, N]; left limit below -N, right limit above N"""
    window: int = 0
    table: Tuple[complex, ...] = (0j,)
    left: complex = 0j
    right: complex = 0j
    kind = "eventual"

    def __post_init__(self):
        if self.window < 0:
            raise LimitLabError("window must be >= 0")
        if len(self.table) != 2 * self.window + 1:
            raise LimitLabError(f"table must cover [-{self.window}, {self.window}] ({2 * self.window + 1} values)")
        object.__setattr__(self, "table", tuple(complex(v) for v in self.table))
        object.__setattr__(self, "left", complex(self.left))
        object.__setattr__(self, "right", complex(self.right))

    @classmethod
    def step(cls, left: Number, right: Number, window: int = 0) -> "EventuallyConstant":
        """left for n < 0, right for n >= 0"""
        table = tuple(complex(left) if n < 0 else complex(right) for n in range(-window, window + 1))
        return cls(window, table, complex(left), complex(right))

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        out = np.where(n < -self.window, self.left, self.right).astype(np.complex128)
        inside = np.abs(n) <= self.window
        out[inside] = np.array(self.table, dtype=np.complex128)[n[inside] + self.window]
        return out

    def shifted(self, g: int) -> "EventuallyConstant":
        window = self.window + abs(g)
        sites = np.arange(-window, window + 1, dtype=np.int64)
        return EventuallyConstant(window, tuple(self.values(sites + g)), self.left, self.right)

    def conjugate(self) -> "EventuallyConstant":
        return EventuallyConstant(self.window, tuple(v.conjugate() for v in self.table),
                                  self.left.conjugate(), self.right.conjugate())

    def constant_value(self) -> Optional[complex]:
        if self.left == self.right and all(v == self.left for v in self.table):
            return self.left
        return None

    def limit(self, direction, settings=DEFAULT_SETTINGS, diagonal=0) -> complex:
        if direction.kind == "plus":
            return self.right
        if direction.kind == "minus":
            return self.left
        if self.left == self.right:
            return self.right
        if direction.step is not None:
            return self.right if direction.step[0] > 0 else self.left
        sites = np.concatenate([direction.sites(settings.probe_depths), direction.tail_sites(settings)])
        signs = np.sign(sites)
        if np.all(signs == signs[0]):
            logger.warning(f"diagonal {diagonal}: eventual limit along {direction} read off "
                           f"{len(sites)} sampled sites; this is heuristic")
            return self.right if signs[0] > 0 else self.left
        raise NotConvergent(diagonal, [int(s) for s in sites], self.values(sites), str(direction))

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "window": self.window,
            "table": [complex_pair(v) for v in self.table],
            "left": complex_pair(self.left),
            "right": complex_pair(self.right),
        }


@dataclass(frozen=True, eq=False)
class Sampled(CoefficientSequence):
    """
    Callback sequence; beyond |n| > bound nothing is promised. Limits use a
    three-probe Cauchy test, which is a heuristic.
    """
    func: Callable[[int], Number] = field(default=lambda n: 0)
    bound: int = 0
    kind = "sampled"

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        return np.array([complex(self.func(int(k))) for k in n.reshape(-1)], dtype=np.complex128).reshape(n.shape)

    def shifted(self, g: int) -> "Sampled":
        func = self.func
        return Sampled(lambda n: func(n + g), self.bound + abs(g))

    def conjugate(self) -> "Sampled":
        func = self.func
        return Sampled(lambda n: complex(func(n)).conjugate(), self.bound)

    def limit(self, direction, settings=DEFAULT_SETTINGS, diagonal=0) -> complex:
        sites = direction.sites(settings.probe_depths)
        probes = self.values(sites)
        last = probes[-3:]
        spread = max(abs(last[0] - last[1]), abs(last[1] - last[2]), abs(last[0] - last[2]))
        if spread <= settings.limit_tolerance:
            logger.warning(
                f"diagonal {diagonal}: sampled limit along {direction} accepted by a three-probe test "
                f"(spread {spread:.1e}); this is heuristic"
            )
            return complex(last[-1])
        raise NotConvergent(diagonal, [int(s) for s in sites], probes, str(direction))


def _add_finite(seq: CoefficientSequence, extra: FiniteSupport) -> CoefficientSequence:
    """seq + finite-rank correction, keeping an exact class whenever possible"""
    if not extra.table:
        return seq
    if isinstance(seq, FiniteSupport):
        merged = seq.as_mapping()
        for n, v in extra.table:
            merged[n] = merged.get(n, 0j) + v
        return FiniteSupport.from_mapping(merged)
    if isinstance(seq, EventuallyConstant) or (isinstance(seq, Periodic) and seq.constant_value() is not None):
        if isinstance(seq, Periodic):
            c = seq.constant_value()
            seq = EventuallyConstant(0, (c,), c, c)
        window = max(seq.window, extra.bound)
        sites = np.arange(-window, window + 1, dtype=np.int64)
        table = seq.values(sites) + extra.values(sites)
        return EventuallyConstant(window, tuple(table), seq.left, seq.right)
    base = seq
    bound = getattr(seq, "bound", 0)
    return Sampled(lambda n: base(n) + extra(n), max(bound, extra.bound))


def sequence_from_dict(doc: Mapping) -> CoefficientSequence:
    kind = doc.get("kind")
    try:
        if kind == "finite":
            return FiniteSupport.from_mapping({int(row[0]): parse_complex(row[1:]) if len(row) == 3 else parse_complex(row[1])
                                               for row in doc.get("values", [])})
        if kind == "periodic":
            return Periodic(tuple(parse_complex(v) for v in doc["values"]))
        if kind == "eventual":
            window = int(doc["window"])
            return EventuallyConstant(window, tuple(parse_complex(v) for v in doc["table"]),
                                      parse_complex(doc["left"]), parse_complex(doc["right"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LimitLabError):
            raise FormatError(str(exc)) from exc
        raise FormatError(f"malformed {kind} diagonal: {exc}") from exc
    if kind == "sampled":
        raise FormatError("sampled diagonals are only available from library code")
    raise FormatError(f"unknown diagonal kind {kind!r}")


# ---------------------------------------------------------------------------
# Laurent operators and symbols
# ---------------------------------------------------------------------------

def _normalise(coeffs: Union[Mapping[int, Number], Iterable[Tuple[int, Number]]]) -> Tuple[Tuple[int, complex], ...]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    merged: Dict[int, complex] = {}
    for m, c in items:
        merged[int(m)] = merged.get(int(m), 0j) + complex(c)
    return tuple(sorted((m, c) for m, c in merged.items() if c != 0))


@dataclass(frozen=True)
class LaurentSymbol:
    """theta -> sum_m c_m e^(i m theta); zero coefficients are dropped"""
    coeffs: Tuple[Tuple[int, complex], ...] = ()

    @classmethod
    def from_coeffs(cls, coeffs: Union[Mapping[int, Number], Iterable[Tuple[int, Number]]]) -> "LaurentSymbol":
        return cls(_normalise(coeffs))

    @classmethod
    def monomial(cls, k: int, c: Number = 1.0) -> "LaurentSymbol":
        return cls.from_coeffs({k: c})

    @property
    def degree(self) -> int:
        return max((abs(m) for m, _ in self.coeffs), default=0)

    def coefficient(self, m: int) -> complex:
        return dict(self.coeffs).get(m, 0j)

    def evaluate(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=np.complex128)
        for m, c in self.coeffs:
            out += c * np.exp(1j * m * theta)
        return out

    def samples(self, n: int) -> np.ndarray:
        """s(2 pi j / n), j = 0..n-1, evaluated with one FFT"""
        if n <= 2 * self.degree:
            return self.evaluate(2 * np.pi * np.arange(n) / n)
        placed = np.zeros(n, dtype=np.complex128)
        for m, c in self.coeffs:
            placed[m % n] += c
        return np.fft.ifft(placed) * n

    def product(self, other: "LaurentSymbol") -> "LaurentSymbol":
        merged: Dict[int, complex] = {}
        for m1, c1 in self.coeffs:
            for m2, c2 in other.coeffs:
                merged[m1 + m2] = merged.get(m1 + m2, 0j) + c1 * c2
        return LaurentSymbol.from_coeffs(merged)

    __mul__ = product

    def conjugate_reflection(self) -> "LaurentSymbol":
        """The symbol of the adjoint: c'_m = conj(c_-m), i.e. theta -> conj(s(theta))"""
        return LaurentSymbol.from_coeffs({-m: c.conjugate() for m, c in self.coeffs})

    def to_dict(self) -> Dict:
        return {"symbol": [[m, c.real, c.imag] for m, c in self.coeffs]}

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for m, c in self.coeffs:
            cs = f"{c.real:g}" if c.imag == 0 else f"({c:g})"
            terms.append(cs if m == 0 else f"{cs}·e^({m}iθ)")
        return " + ".join(terms)


@dataclass(frozen=True)
class LaurentOperator:
    """Translation-invariant band operator with constant diagonals c_m"""
    coeffs: Tuple[Tuple[int, complex], ...] = ()

    @classmethod
    def from_coeffs(cls, coeffs) -> "LaurentOperator":
        return cls(_normalise(coeffs))

    @property
    def width(self) -> int:
        return max((abs(m) for m, _ in self.coeffs), default=0)

    def coefficient(self, m: int) -> complex:
        return dict(self.coeffs).get(m, 0j)

    def adjoint(self) -> "LaurentOperator":
        return LaurentOperator.from_coeffs({-m: c.conjugate() for m, c in self.coeffs})

    def to_dict(self) -> Dict:
        return {"coeffs": [[m, c.real, c.imag] for m, c in self.coeffs]}


def laurent_symbol(L: LaurentOperator) -> LaurentSymbol:
    return LaurentSymbol(L.coeffs)


# ---------------------------------------------------------------------------
# Band operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BandOperatorZ:
    """T on l2(Z) with T[x, y] = d_(x-y)(y) for |x - y| <= width, else 0"""
    width: int
    diagonals: Tuple[Tuple[int, CoefficientSequence], ...]
    name: str = field(default="T", compare=False)

    def __post_init__(self):
        if self.width < 0:
            raise LimitLabError("band width must be >= 0")
        seen = set()
        for m, _ in self.diagonals:
            if abs(m) > self.width:
                raise LimitLabError(f"diagonal {m} lies outside the band of width {self.width}")
            if m in seen:
                raise LimitLabError(f"diagonal {m} given twice")
            seen.add(m)
        object.__setattr__(self, "diagonals", tuple(sorted(self.diagonals, key=lambda item: item[0])))

    @classmethod
    def from_diagonals(cls, diagonals: Mapping[int, CoefficientSequence], width: Optional[int] = None,
                       name: str = "T") -> "BandOperatorZ":
        w = max((abs(m) for m in diagonals), default=0) if width is None else width
        return cls(w, tuple(diagonals.items()), name)

    def diagonal(self, m: int) -> CoefficientSequence:
        return dict(self.diagonals).get(m, FiniteSupport())

    def entry(self, x: int, y: int) -> complex:
        m = x - y
        if abs(m) > self.width:
            return 0j
        return self.diagonal(m)(y)

    def shift_conjugate(self, g: int) -> "BandOperatorZ":
        """U_g T U_g^-1: entry (x, y) becomes entry(T, g + x, g + y)"""
        return BandOperatorZ(self.width, tuple((m, d.shifted(g)) for m, d in self.diagonals), self.name)

    def adjoint(self) -> "BandOperatorZ":
        """Diagonal m of T* is n -> conj(d_-m(n + m))"""
        return BandOperatorZ(self.width, tuple((-m, d.shifted(-m).conjugate()) for m, d in self.diagonals),
                             f"{self.name}*")

    def perturb(self, m: int, table: Mapping[int, Number]) -> "BandOperatorZ":
        """Add a finitely supported correction to diagonal m"""
        if abs(m) > self.width:
            raise LimitLabError(f"diagonal {m} lies outside the band of width {self.width}")
        diagonals = dict(self.diagonals)
        diagonals[m] = _add_finite(self.diagonal(m), FiniteSupport.from_mapping(table))
        return BandOperatorZ(self.width, tuple(diagonals.items()), self.name)

    def rectangular_section(self, rows: Tuple[int, int], cols: Tuple[int, int]) -> np.ndarray:
        """Matrix of T over the inclusive index ranges rows x cols"""
        r0, r1 = rows
        c0, c1 = cols
        out = np.zeros((r1 - r0 + 1, c1 - c0 + 1), dtype=np.complex128)
        sites = np.arange(c0, c1 + 1, dtype=np.int64)
        for m, d in self.diagonals:
            targets = sites + m
            mask = (targets >= r0) & (targets <= r1)
            if np.any(mask):
                out[targets[mask] - r0, np.nonzero(mask)[0]] = d.values(sites[mask])
        return out

    def finite_section(self, n: int) -> np.ndarray:
        """The (2n+1)x(2n+1) block over [-n, n]"""
        if n < 0:
            raise LimitLabError("finite section needs n >= 0")
        return self.rectangular_section((-n, n), (-n, n))

    def to_dict(self) -> Dict:
        return {"width": self.width, "diagonals": [dict(m=m, **d.to_dict()) for m, d in self.diagonals]}

    @classmethod
    def from_dict(cls, doc: Mapping, name: str = "T") -> "BandOperatorZ":
        try:
            width = int(doc["width"])
            raw = doc["diagonals"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"band document needs 'width' and 'diagonals': {exc}") from exc
        diagonals = []
        for entry in raw:
            if not isinstance(entry, Mapping) or "m" not in entry:
                raise FormatError(f"diagonal entry needs an 'm' field: {entry!r}")
            diagonals.append((int(entry["m"]), sequence_from_dict(entry)))
        try:
            return cls(width, tuple(diagonals), name)
        except LimitLabError as exc:
            raise FormatError(str(exc)) from exc


def entry(T: BandOperatorZ, x: int, y: int) -> complex:
    return T.entry(x, y)


def shift_conjugate(T: BandOperatorZ, g: int) -> BandOperatorZ:
    return T.shift_conjugate(g)


def finite_section(T: BandOperatorZ, n: int) -> np.ndarray:
    return T.finite_section(n)


def limit_operator(T: BandOperatorZ, direction: DirectionSpec,
                   settings: Settings = DEFAULT_SETTINGS) -> LaurentOperator:
    """Entrywise limit of the shift conjugates of T along a direction"""
    coeffs = {}
    for m, d in T.diagonals:
        coeffs[m] = d.limit(direction, settings, diagonal=m)
        logger.debug(f"{T.name}: diagonal {m} -> {coeffs[m]} along {direction}")
    return LaurentOperator.from_coeffs(coeffs)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def bilateral_shift() -> BandOperatorZ:
    """V delta_n = delta_(n+1)"""
    return BandOperatorZ(1, ((1, Periodic((1.0,))),), "V")


def identity_operator() -> BandOperatorZ:
    return BandOperatorZ(0, ((0, Periodic((1.0,))),), "I")


def laurent_operator_band(L: LaurentOperator) -> BandOperatorZ:
    return BandOperatorZ(L.width, tuple((m, Periodic((c,))) for m, c in L.coeffs), "L")


def two_sided_operator(left_coeffs: Mapping[int, Number], right_coeffs: Mapping[int, Number],
                       window: int = 0, name: str = "T") -> BandOperatorZ:
    """Diagonal m equals left_coeffs[m] for n < 0 and right_coeffs[m] for n >= 0"""
    ms = set(left_coeffs) | set(right_coeffs)
    diagonals = tuple(
        (m, EventuallyConstant.step(left_coeffs.get(m, 0), right_coeffs.get(m, 0), window)) for m in sorted(ms)
    )
    width = max((abs(m) for m in ms), default=0)
    return BandOperatorZ(width, diagonals, name)


def format_limit_operator(L: LaurentOperator, direction: DirectionSpec) -> str:
    lines = [f"\n🎯 Limit operator along {direction}", "-" * 60]
    if not L.coeffs:
        lines.append("   (zero operator)")
    for m, c in L.coeffs:
        lines.append(f"   c_{m:<3} = {c:.10g}")
    lines.append(f"   symbol: {laurent_symbol(L)}")
    return "\n".join(lines)
