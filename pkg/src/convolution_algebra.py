"""
Convolution Algebra of a Finite Groupoid

The *-algebra C_c(G) over a finite groupoid with counting measures:
- convolution (f*g)(gamma) = sum over alpha in G_s(gamma) of f(gamma alpha^-1) g(alpha)
- involution f*(gamma) = conj(f(gamma^-1)) and the I-norm
- regular representations lambda_x(f) on l2(G_x) as fibre matrices
- reduced norm sup_x ||lambda_x(f)|| and a spectral norm helper

Elements are dense complex coefficient vectors indexed by arrow id.
Sums always run in source-fibre declaration order so repeated runs are
bit-identical.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed

from .config import DEFAULT_SETTINGS, Settings
from .errors import GroupoidMismatch, LimitLabError, NoConvergence, NonSquare
from .groupoid_core import FiniteGroupoid, Label

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Index tables (built once per groupoid)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def convolution_tables(g: FiniteGroupoid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Padded index tables (left, right) of shape (|arrows|, max fibre size).

    Row gamma lists gamma alpha^-1 and alpha for alpha in G_s(gamma); unused
    slots point at the zero sentinel at index |arrows|.
    """
    n = g.n_arrows
    width = max((len(f) for f in g.source_fibres), default=0)
    left = np.full((n, width), n, dtype=np.intp)
    right = np.full((n, width), n, dtype=np.intp)
    for gamma in range(n):
        for k, alpha in enumerate(g.fibre(g.source(gamma))):
            left[gamma, k] = g.compose(gamma, g.inverse(alpha))
            right[gamma, k] = alpha
    return left, right


@lru_cache(maxsize=64)
def fibre_tables(g: FiniteGroupoid) -> Tuple[np.ndarray, ...]:
    """Per unit x the matrix of arrow ids Q_x[i, j] = fibre[i] fibre[j]^-1"""
    tables = []
    for fibre in g.source_fibres:
        q = np.empty((len(fibre), len(fibre)), dtype=np.intp)
        for i, row in enumerate(fibre):
            for j, col in enumerate(fibre):
                q[i, j] = g.compose(row, g.inverse(col))
        tables.append(q)
    return tuple(tables)


def map_units(func: Callable[[int], object], units: Sequence[int], n_jobs: int = 1) -> List:
    """Evaluate func per unit, in unit order; fans out with joblib when n_jobs != 1"""
    if n_jobs == 1 or len(units) < 2:
        return [func(x) for x in units]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(x) for x in units)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A finitely supported complex function on the arrows of a groupoid"""
    groupoid: FiniteGroupoid
    coeffs: np.ndarray

    def __post_init__(self):
        values = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if values.shape[0] != self.groupoid.n_arrows:
            raise LimitLabError(
                f"element has {values.shape[0]} coefficients, groupoid has {self.groupoid.n_arrows} arrows"
            )
        if not np.all(np.isfinite(values)):
            raise LimitLabError("element coefficients must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "coeffs", values)

    def _check_same(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.groupoid is not self.groupoid and other.groupoid != self.groupoid:
            raise GroupoidMismatch(f"elements live on different groupoids ({self.groupoid.name} vs {other.groupoid.name})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        same = other.groupoid is self.groupoid or other.groupoid == self.groupoid
        return same and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.groupoid, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.groupoid, self.coeffs - other.coeffs)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.groupoid, -self.coeffs)

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.groupoid, complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return convolve(self, other)

    def __getitem__(self, label: Label) -> complex:
        return complex(self.coeffs[self.groupoid.arrow_index(label)])

    def support(self) -> Tuple[Label, ...]:
        return tuple(self.groupoid.arrow_label(int(a)) for a in np.flatnonzero(self.coeffs))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def to_dict(self) -> Dict:
        return {
            "coeffs": [[self.groupoid.arrow_label(int(a)), float(self.coeffs[a].real), float(self.coeffs[a].imag)]
                       for a in np.flatnonzero(self.coeffs)]
        }

    def __repr__(self) -> str:
        terms = ", ".join(f"{lbl}: {self[lbl]:.6g}" for lbl in self.support()[:6])
        more = " ..." if len(self.support()) > 6 else ""
        return f"AlgebraElement({self.groupoid.name}; {{{terms}{more}}})"


def zero_element(g: FiniteGroupoid) -> AlgebraElement:
    return AlgebraElement(g, np.zeros(g.n_arrows, dtype=np.complex128))


def unit_element(g: FiniteGroupoid) -> AlgebraElement:
    """The indicator of the unit arrows, the identity of C_c(G)"""
    coeffs = np.zeros(g.n_arrows, dtype=np.complex128)
    coeffs[list(g.unit_arrows)] = 1.0
    return AlgebraElement(g, coeffs)


def delta(g: FiniteGroupoid, label: Label, value: complex = 1.0) -> AlgebraElement:
    coeffs = np.zeros(g.n_arrows, dtype=np.complex128)
    coeffs[g.arrow_index(label)] = value
    return AlgebraElement(g, coeffs)


def element_from_labels(g: FiniteGroupoid, values: Mapping[Label, complex]) -> AlgebraElement:
    coeffs = np.zeros(g.n_arrows, dtype=np.complex128)
    for label, value in values.items():
        coeffs[g.arrow_index(label)] += value
    return AlgebraElement(g, coeffs)


def unitize(f: AlgebraElement) -> AlgebraElement:
    """1 + f"""
    return unit_element(f.groupoid) + f


# ---------------------------------------------------------------------------
# Algebra operations
# ---------------------------------------------------------------------------

def convolve(f: AlgebraElement, h: AlgebraElement) -> AlgebraElement:
    """(f*h)(gamma) = sum_{alpha in G_s(gamma)} f(gamma alpha^-1) h(alpha)"""
    f._check_same(h)
    g = f.groupoid
    if g.n_arrows == 0:
        return zero_element(g)
    left, right = convolution_tables(g)
    fpad = np.append(f.coeffs, 0)
    hpad = np.append(h.coeffs, 0)
    return AlgebraElement(g, (fpad[left] * hpad[right]).sum(axis=1))


def involution(f: AlgebraElement) -> AlgebraElement:
    g = f.groupoid
    return AlgebraElement(g, np.conj(f.coeffs[np.asarray(g.inverses, dtype=np.intp)]))


def i_norm(f: AlgebraElement) -> float:
    """max(sup_x sum_{G_x} |f|, sup_x sum_{G_x} |f*|)"""
    g = f.groupoid
    if g.n_units == 0:
        return 0.0
    f_abs = np.abs(f.coeffs)
    star_abs = np.abs(involution(f).coeffs)
    best = 0.0
    for fibre in g.source_fibres:
        idx = list(fibre)
        best = max(best, float(f_abs[idx].sum()), float(star_abs[idx].sum()))
    return best


@dataclass(frozen=True, eq=False)
class FibreMatrix:
    """lambda_x(f) on l2(G_x); rows and columns follow the fibre listing"""
    unit: Label
    arrows: Tuple[Label, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (len(self.arrows), len(self.arrows)):
            raise LimitLabError(f"fibre matrix at {self.unit!r} has shape {m.shape}, fibre size {len(self.arrows)}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return len(self.arrows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FibreMatrix):
            return NotImplemented
        return self.unit == other.unit and self.arrows == other.arrows and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def to_dict(self) -> Dict:
        return {
            "unit": self.unit,
            "arrows": list(self.arrows),
            "real": self.matrix.real.tolist(),
            "imag": self.matrix.imag.tolist(),
        }


def lambda_matrix(f: AlgebraElement, x: int) -> np.ndarray:
    return f.coeffs[fibre_tables(f.groupoid)[x]]


def regular_representation(f: AlgebraElement, x: Label) -> FibreMatrix:
    """Entry (row gamma'', column gamma') is f(gamma'' gamma'^-1) over gamma', gamma'' in G_x"""
    g = f.groupoid
    xi = g.unit_index(x)
    return FibreMatrix(g.units[xi], tuple(g.arrow_label(a) for a in g.fibre(xi)), lambda_matrix(f, xi))


def left_regular_matrix(f: AlgebraElement) -> np.ndarray:
    """Block-diagonal sum of lambda_x(f) over all units (faithful on C_c(G))"""
    g = f.groupoid
    if g.n_units == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    return scipy.linalg.block_diag(*(lambda_matrix(f, x) for x in range(g.n_units)))


def spectral_norm(matrix: np.ndarray, settings: Settings = DEFAULT_SETTINGS) -> float:
    """
    Largest singular value.

    Full SVD up to settings.dense_limit, otherwise power iteration on M^H M
    with relative tolerance settings.power_tol.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"spectral_norm needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n == 0:
        return 0.0
    if n <= settings.dense_limit:
        return float(scipy.linalg.svdvals(m)[0])

    gram = m.conj().T @ m
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    previous = 0.0
    for iteration in range(1, settings.power_max_iter + 1):
        w = gram @ v
        value = float(np.linalg.norm(w))
        if value == 0.0:
            return 0.0
        v = w / value
        if abs(value - previous) <= settings.power_tol * value:
            logger.debug(f"power iteration converged after {iteration} steps (n={n})")
            return float(np.sqrt(value))
        previous = value
    raise NoConvergence(settings.power_max_iter)


def reduced_norm(f: AlgebraElement, settings: Settings = DEFAULT_SETTINGS) -> float:
    """sup over units of ||lambda_x(f)||"""
    g = f.groupoid
    norms = map_units(lambda x: spectral_norm(lambda_matrix(f, x), settings), range(g.n_units), settings.n_jobs)
    return max(norms, default=0.0)


def format_fibre_matrix(fm: FibreMatrix, precision: int = 4) -> str:
    width = max((len(str(a)) for a in fm.arrows), default=1)
    lines = [f"\n🔢 lambda_x at unit {fm.unit} ({fm.dim}x{fm.dim})", "-" * 60]
    for label, row in zip(fm.arrows, fm.matrix):
        cells = "  ".join(_format_complex(z, precision) for z in row)
        lines.append(f"   {str(label):>{width}} | {cells}")
    return "\n".join(lines)


def _format_complex(z: complex, precision: int) -> str:
    if z.imag == 0:
        return f"{z.real:.{precision}g}"
    return f"{z.real:.{precision}g}{z.imag:+.{precision}g}i"
