"""
Operator Fibre Sections and the Symbol Calculus

Works on bounded sections x -> phi(x) acting on l2(G_x):
- lambda sections, equivariance defect and propagation sets
- boundary decompositions G = G(X) + G(dX), the quotient map onto
  C_c(G(dX)), canonical lifts and the symbol section over dX
- fibrewise invertibility (Exel-type test) with the inverse read back into
  C_c(G)
- the four-condition check for invertibility modulo C_c(G(X))
- crossed-product representations for finite group actions

On a finite unit space every section is continuous, so sections here are
plain families of matrices.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_SETTINGS, Settings
from .convolution_algebra import (
    AlgebraElement,
    FibreMatrix,
    convolve,
    element_from_labels,
    fibre_tables,
    i_norm,
    lambda_matrix,
    map_units,
    reduced_norm,
    spectral_norm,
    unit_element,
    unitize,
    zero_element,
)
from .errors import FormatError, GroupoidMismatch, LimitLabError, NotInvariant, SingularFibre
from .groupoid_core import (
    ActionSpec,
    FiniteGroupoid,
    GroupSpec,
    Label,
    invariance_check,
    reduction,
    regular_action,
    transformation_groupoid,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorSection:
    """phi(x) on l2(G_x) for every unit x; fibres[x] follows the fibre listing"""
    groupoid: FiniteGroupoid
    fibres: Tuple[np.ndarray, ...]

    def __post_init__(self):
        g = self.groupoid
        if len(self.fibres) != g.n_units:
            raise LimitLabError(f"section has {len(self.fibres)} fibres, groupoid has {g.n_units} units")
        mats = []
        for x, m in enumerate(self.fibres):
            m = np.asarray(m, dtype=np.complex128)
            size = len(g.fibre(x))
            if m.shape != (size, size):
                raise LimitLabError(f"fibre {g.units[x]!r}: shape {m.shape}, expected {(size, size)}")
            if not np.all(np.isfinite(m)):
                raise LimitLabError(f"fibre {g.units[x]!r} has non-finite entries")
            mats.append(m)
        object.__setattr__(self, "fibres", tuple(mats))

    def fibre(self, x: Label) -> FibreMatrix:
        g = self.groupoid
        xi = g.unit_index(x)
        return FibreMatrix(g.units[xi], tuple(g.arrow_label(a) for a in g.fibre(xi)), self.fibres[xi])

    def norm(self, settings: Settings = DEFAULT_SETTINGS) -> float:
        return max((spectral_norm(m, settings) for m in self.fibres), default=0.0)

    def with_fibre(self, x: Label, matrix: np.ndarray) -> "OperatorSection":
        xi = self.groupoid.unit_index(x)
        fibres = list(self.fibres)
        fibres[xi] = matrix
        return OperatorSection(self.groupoid, tuple(fibres))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorSection):
            return NotImplemented
        return self.groupoid == other.groupoid and all(
            np.array_equal(a, b) for a, b in zip(self.fibres, other.fibres)
        )

    __hash__ = None

    def to_dict(self) -> Dict:
        return {"fibres": [self.fibre(u).to_dict() for u in self.groupoid.units]}


@dataclass(frozen=True)
class PropagationSet:
    """Arrows K with T(gamma'', gamma') != 0 only when gamma'' gamma'^-1 is in K"""
    arrows: FrozenSet[Label]

    def is_symmetric(self, g: FiniteGroupoid) -> bool:
        return all(g.arrow_label(g.inverse(g.arrow_index(a))) in self.arrows for a in self.arrows)


def lambda_section(f: AlgebraElement) -> OperatorSection:
    g = f.groupoid
    return OperatorSection(g, tuple(lambda_matrix(f, x) for x in range(g.n_units)))


def identity_section(g: FiniteGroupoid) -> OperatorSection:
    return OperatorSection(g, tuple(np.eye(len(fibre), dtype=np.complex128) for fibre in g.source_fibres))


def zero_section(g: FiniteGroupoid) -> OperatorSection:
    return OperatorSection(g, tuple(np.zeros((len(f), len(f)), dtype=np.complex128) for f in g.source_fibres))


@lru_cache(maxsize=64)
def translation_permutations(g: FiniteGroupoid) -> Tuple[np.ndarray, ...]:
    """For each arrow gamma: position in G_s(gamma) of alpha.gamma, alpha over G_r(gamma)"""
    perms = []
    for gamma in range(g.n_arrows):
        perms.append(np.array(
            [g.fibre_position[g.compose(alpha, gamma)] for alpha in g.fibre(g.range(gamma))],
            dtype=np.intp,
        ))
    return tuple(perms)


def equivariance_defect(s: OperatorSection, settings: Settings = DEFAULT_SETTINGS) -> float:
    """max over arrows gamma of ||phi(r(gamma)) - R_gamma* phi(s(gamma)) R_gamma||"""
    g = s.groupoid
    worst = 0.0
    for gamma, perm in enumerate(translation_permutations(g)):
        if g.is_unit_arrow(gamma):
            continue
        moved = s.fibres[g.source(gamma)][np.ix_(perm, perm)]
        diff = s.fibres[g.range(gamma)] - moved
        if np.any(diff):
            worst = max(worst, spectral_norm(diff, settings))
    return worst


def propagation(s: OperatorSection) -> PropagationSet:
    g = s.groupoid
    hit = set()
    tables = fibre_tables(g)
    for x, m in enumerate(s.fibres):
        rows, cols = np.nonzero(m)
        hit.update(int(a) for a in tables[x][rows, cols])
    return PropagationSet(frozenset(g.arrow_label(a) for a in hit))


def section_inverse(s: OperatorSection, settings: Settings = DEFAULT_SETTINGS) -> Optional[OperatorSection]:
    """Fibrewise inverse, or None when some fibre has inverse norm >= 1/cut"""
    inverses = []
    for x, m in enumerate(s.fibres):
        if m.shape[0] == 0:
            inverses.append(m)
            continue
        try:
            inv = np.linalg.inv(m)
        except np.linalg.LinAlgError:
            logger.debug(f"fibre {s.groupoid.units[x]!r} is exactly singular")
            return None
        if not np.all(np.isfinite(inv)) or spectral_norm(inv, settings) * settings.invertibility_cut >= 1.0:
            return None
        inverses.append(inv)
    return OperatorSection(s.groupoid, tuple(inverses))


# ---------------------------------------------------------------------------
# Boundary decomposition, quotient and symbol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryDecomposition:
    """Units split into an invariant open part X and its invariant complement dX"""
    groupoid: FiniteGroupoid
    interior: FrozenSet[int]
    boundary: FrozenSet[int]

    @classmethod
    def from_boundary(cls, g: FiniteGroupoid, boundary: Iterable[Label]) -> "BoundaryDecomposition":
        bd = frozenset(g.unit_index(u) for u in boundary)
        interior = frozenset(range(g.n_units)) - bd
        for part in (bd, interior):
            result = invariance_check(g, [g.units[x] for x in part])
            if not result:
                raise NotInvariant(result.witness)
        return cls(g, interior, bd)

    @classmethod
    def from_interior(cls, g: FiniteGroupoid, interior: Iterable[Label]) -> "BoundaryDecomposition":
        inside = {g.unit_index(u) for u in interior}
        return cls.from_boundary(g, [g.units[x] for x in range(g.n_units) if x not in inside])

    @cached_property
    def interior_groupoid(self) -> FiniteGroupoid:
        return reduction(self.groupoid, [self.groupoid.units[x] for x in sorted(self.interior)])

    @cached_property
    def boundary_groupoid(self) -> FiniteGroupoid:
        return reduction(self.groupoid, [self.groupoid.units[x] for x in sorted(self.boundary)])

    @cached_property
    def boundary_arrows(self) -> np.ndarray:
        """Ids in the big groupoid of the arrows of G(dX), in reduced order"""
        return np.array([a.id for a in self.groupoid.arrows if a.source in self.boundary], dtype=np.intp)

    @property
    def degenerate(self) -> bool:
        return not self.boundary

    def boundary_labels(self) -> Tuple[Label, ...]:
        return tuple(self.groupoid.units[x] for x in sorted(self.boundary))


def _check_groupoid(f: AlgebraElement, d: BoundaryDecomposition) -> None:
    if f.groupoid != d.groupoid:
        raise GroupoidMismatch("element and boundary decomposition use different groupoids")


def quotient_restrict(f: AlgebraElement, d: BoundaryDecomposition) -> AlgebraElement:
    """The restriction q: C_c(G) -> C_c(G(dX)); its kernel is C_c(G(X))"""
    _check_groupoid(f, d)
    return AlgebraElement(d.boundary_groupoid, f.coeffs[d.boundary_arrows])


def canonical_lift(h: AlgebraElement, d: BoundaryDecomposition) -> AlgebraElement:
    """h on G(dX), zero on G(X)"""
    if h.groupoid != d.boundary_groupoid:
        raise GroupoidMismatch("lift expects an element of C_c(G(dX))")
    coeffs = np.zeros(d.groupoid.n_arrows, dtype=np.complex128)
    coeffs[d.boundary_arrows] = h.coeffs
    return AlgebraElement(d.groupoid, coeffs)


def symbol(f: AlgebraElement, d: BoundaryDecomposition) -> OperatorSection:
    """The section omega -> lambda_omega(f) over dX (fibres over dX stay inside G(dX))"""
    _check_groupoid(f, d)
    return OperatorSection(d.boundary_groupoid, tuple(lambda_matrix(f, x) for x in sorted(d.boundary)))


# ---------------------------------------------------------------------------
# Fibrewise invertibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FibreVerdict:
    unit: Label
    sigma_min: float
    invertible: bool
    near_threshold: bool = False

    def to_dict(self) -> Dict:
        return {"unit": self.unit, "sigma_min": self.sigma_min, "invertible": self.invertible,
                "near_threshold": self.near_threshold}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "FibreVerdict":
        return cls(doc["unit"], float(doc["sigma_min"]), bool(doc["invertible"]), bool(doc.get("near_threshold", False)))


def _coeffs_element(g: FiniteGroupoid, rows) -> Optional[AlgebraElement]:
    if rows is None:
        return None
    return element_from_labels(g, {label: complex(re, im) for label, re, im in rows})


def _optional_float(value) -> Optional[float]:
    return None if value is None else float(value)


@dataclass(frozen=True, eq=False)
class ExelReport:
    mode: str
    per_unit: Tuple[FibreVerdict, ...]
    verdict: bool
    sup_inverse_norm: Optional[float]
    inverse: Optional[AlgebraElement] = None
    inverse_residual: Optional[float] = None

    @property
    def singular_units(self) -> List[Label]:
        return [v.unit for v in self.per_unit if not v.invertible]

    def to_dict(self) -> Dict:
        out = {
            "mode": self.mode,
            "per_unit": [v.to_dict() for v in self.per_unit],
            "verdict": self.verdict,
            "sup_inverse_norm": self.sup_inverse_norm,
        }
        if self.inverse is not None:
            out["inverse"] = self.inverse.to_dict()["coeffs"]
            out["inverse_residual"] = self.inverse_residual
        return out

    @classmethod
    def from_dict(cls, doc: Mapping, g: FiniteGroupoid) -> "ExelReport":
        """Rebuild a report written by to_dict; g is the groupoid the element lives on"""
        try:
            return cls(
                doc["mode"],
                tuple(FibreVerdict.from_dict(v) for v in doc["per_unit"]),
                bool(doc["verdict"]),
                _optional_float(doc["sup_inverse_norm"]),
                _coeffs_element(g, doc.get("inverse")),
                _optional_float(doc.get("inverse_residual")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed invertibility report: {exc}") from exc


def _sigma_min(m: np.ndarray) -> float:
    if m.shape[0] == 0:
        return float("inf")
    return float(scipy.linalg.svdvals(m)[-1])


def exel_invertibility(f: AlgebraElement, mode: str = "plain", settings: Settings = DEFAULT_SETTINGS,
                       want_inverse: bool = False) -> ExelReport:
    """
    Decide invertibility of f (mode "plain") or 1 + f (mode "unitized")
    fibre by fibre. At finite scale the direct sum of the lambda_x is
    faithful, so the verdict is exact up to the declared singular-value cut.
    """
    if mode not in ("plain", "unitized"):
        raise LimitLabError(f"unknown mode {mode!r}; expected 'plain' or 'unitized'")
    a = unitize(f) if mode == "unitized" else f
    g = a.groupoid
    cut = settings.invertibility_cut

    mats = [lambda_matrix(a, x) for x in range(g.n_units)]
    sigmas = map_units(lambda x: _sigma_min(mats[x]), range(g.n_units), settings.n_jobs)
    verdicts = []
    for x, sigma in enumerate(sigmas):
        invertible = sigma > cut
        near = invertible and sigma <= cut * settings.near_band
        if near:
            logger.warning(f"fibre {g.units[x]!r}: sigma_min={sigma:.3e} is close to the cut {cut:.1e}")
        verdicts.append(FibreVerdict(g.units[x], sigma, invertible, near))
    verdict = all(v.invertible for v in verdicts)

    if not verdict:
        logger.info(f"{mode} element on {g.name} is not invertible at {len(verdicts) - sum(v.invertible for v in verdicts)} unit(s)")
        if want_inverse:
            raise SingularFibre([v.unit for v in verdicts if not v.invertible])
        return ExelReport(mode, tuple(verdicts), False, None)

    sup_inv = max((1.0 / v.sigma_min for v in verdicts), default=1.0)
    # h(gamma) = lambda_s(gamma)(h)[gamma, unit arrow at s(gamma)]
    coeffs = np.zeros(g.n_arrows, dtype=np.complex128)
    pos = g.fibre_position
    for x in range(g.n_units):
        if not mats[x].size:
            continue
        inv = np.linalg.inv(mats[x])
        col = pos[g.unit_arrow(x)]
        for gamma in g.fibre(x):
            coeffs[gamma] = inv[pos[gamma], col]
    inverse = AlgebraElement(g, coeffs)
    one = unit_element(g)
    residual = max(i_norm(convolve(a, inverse) - one), i_norm(convolve(inverse, a) - one))
    logger.info(f"{mode} element on {g.name} is invertible (sup ||inverse|| = {sup_inv:.4g}, residual {residual:.2e})")
    return ExelReport(mode, tuple(verdicts), True, sup_inv, inverse, residual)


# ---------------------------------------------------------------------------
# Invertibility modulo C_c(G(X))
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MainTheoremReport:
    """
    c1  some h has f*h - 1 and h*f - 1 supported in G(X)
    c2  the symbol section is invertible with a common bound
    c3  every lambda_omega(f), omega in dX, is invertible; sup of inverse norms
    c4  every lambda_omega(f), omega in dX, is invertible
    """
    conditions: Dict[str, bool]
    degenerate: bool
    per_unit: Tuple[FibreVerdict, ...]
    sup_inverse_norm: Optional[float]
    section_inverse_bound: Optional[float]
    certificate: Optional[AlgebraElement]
    certificate_residual: Optional[float]
    quotient_norm: float
    limit_norm: float
    note: str = field(default="inverse-norm suprema are finite maxima over dX")

    @property
    def agree(self) -> bool:
        return len(set(self.conditions.values())) == 1

    @property
    def verdict(self) -> bool:
        return self.agree and all(self.conditions.values())

    def to_dict(self) -> Dict:
        return {
            "conditions": dict(self.conditions),
            "agree": self.agree,
            "degenerate": self.degenerate,
            "per_unit": [v.to_dict() for v in self.per_unit],
            "verdict": self.verdict,
            "sup_inverse_norm": self.sup_inverse_norm,
            "section_inverse_bound": self.section_inverse_bound,
            "certificate": self.certificate.to_dict()["coeffs"] if self.certificate is not None else None,
            "certificate_residual": self.certificate_residual,
            "quotient_norm": self.quotient_norm,
            "limit_norm": self.limit_norm,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, doc: Mapping, g: FiniteGroupoid) -> "MainTheoremReport":
        try:
            report = cls(
                {k: bool(v) for k, v in doc["conditions"].items()},
                bool(doc["degenerate"]),
                tuple(FibreVerdict.from_dict(v) for v in doc["per_unit"]),
                _optional_float(doc["sup_inverse_norm"]),
                _optional_float(doc["section_inverse_bound"]),
                _coeffs_element(g, doc["certificate"]),
                _optional_float(doc["certificate_residual"]),
                float(doc["quotient_norm"]),
                float(doc["limit_norm"]),
                str(doc.get("note", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed four-condition report: {exc}") from exc
        if "verdict" in doc and bool(doc["verdict"]) != report.verdict:
            raise FormatError("report verdict does not follow from its conditions")
        return report


def main_theorem_check(f: AlgebraElement, d: BoundaryDecomposition,
                       settings: Settings = DEFAULT_SETTINGS) -> MainTheoremReport:
    """Evaluate the four invertibility-modulo-G(X) conditions independently"""
    _check_groupoid(f, d)
    g = d.groupoid
    cut = settings.invertibility_cut

    if d.degenerate:
        logger.info("empty boundary: every condition holds vacuously (1 lies in C_c(G(X)))")
        return MainTheoremReport(
            conditions={"c1": True, "c2": True, "c3": True, "c4": True},
            degenerate=True, per_unit=(), sup_inverse_norm=None, section_inverse_bound=None,
            certificate=zero_element(g), certificate_residual=0.0, quotient_norm=0.0, limit_norm=0.0,
            note="degenerate: empty boundary",
        )

    # (1) through the quotient, then the canonical lift
    q = quotient_restrict(f, d)
    quotient_report = exel_invertibility(q, settings=settings)
    c1 = quotient_report.verdict
    certificate, residual = None, None
    if c1:
        certificate = canonical_lift(quotient_report.inverse, d)
        one = unit_element(g)
        residual = max(
            i_norm(quotient_restrict(convolve(f, certificate) - one, d)),
            i_norm(quotient_restrict(convolve(certificate, f) - one, d)),
        )

    # (2) the symbol as a section
    sym = symbol(f, d)
    inverse_section = section_inverse(sym, settings)
    c2 = inverse_section is not None
    section_bound = inverse_section.norm(settings) if inverse_section is not None else None

    # (3) and (4) limit operators one by one
    verdicts = []
    inverse_norms = []
    for x in sorted(d.boundary):
        m = lambda_matrix(f, x)
        sigma = _sigma_min(m)
        verdicts.append(FibreVerdict(g.units[x], sigma, sigma > cut, cut < sigma <= cut * settings.near_band))
        inverse_norms.append(1.0 / sigma if sigma > 0 else float("inf"))
    sup_inv = max(inverse_norms)
    c3 = bool(np.isfinite(sup_inv) and sup_inv < 1.0 / cut)
    c4 = all(v.invertible for v in verdicts)

    conditions = {"c1": bool(c1), "c2": bool(c2), "c3": c3, "c4": bool(c4)}
    report = MainTheoremReport(
        conditions=conditions,
        degenerate=False,
        per_unit=tuple(verdicts),
        sup_inverse_norm=sup_inv if c3 else None,
        section_inverse_bound=section_bound,
        certificate=certificate,
        certificate_residual=residual,
        quotient_norm=reduced_norm(q, settings),
        limit_norm=sym.norm(settings),
    )
    if not report.agree:
        logger.error(f"invertibility conditions disagree on {g.name}: {conditions}")
    else:
        logger.info(f"invertibility modulo G(X) on {g.name}: {all(conditions.values())}")
    return report


# ---------------------------------------------------------------------------
# Crossed products of finite actions
# ---------------------------------------------------------------------------

def crossed_product_coefficients(action: ActionSpec, F: AlgebraElement) -> Dict[str, np.ndarray]:
    """F -> sum_gamma f_gamma gamma with f_gamma(x) = F(x, gamma)"""
    G = action.group
    if F.groupoid.n_arrows != len(action.points) * G.order:
        raise GroupoidMismatch("element does not live on the transformation groupoid of this action")
    table = F.coeffs.reshape(len(action.points), G.order)
    return {G.elements[gamma]: table[:, gamma].copy() for gamma in range(G.order)}


def act_on_function(action: ActionSpec, gamma: int, f: np.ndarray) -> np.ndarray:
    """(gamma.f)(x) = f(gamma^-1 x)"""
    G = action.group
    inv = G.inv(gamma)
    return np.asarray(f)[[action.act(inv, i) for i in range(len(action.points))]]


def twisted_product(action: ActionSpec, a: Mapping[str, np.ndarray],
                    b: Mapping[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """(sum f_g g)(sum f'_h h) = sum f_g (g.f'_h) gh"""
    G = action.group
    out = {name: np.zeros(len(action.points), dtype=np.complex128) for name in G.elements}
    for g_name, fg in a.items():
        g = G.index(g_name)
        for h_name, fh in b.items():
            h = G.index(h_name)
            out[G.elements[G.mult(g, h)]] += np.asarray(fg) * act_on_function(action, g, fh)
    return out


def multiplication_operator(action: ActionSpec, f: np.ndarray, omega: Label) -> np.ndarray:
    """M_omega(f) delta_gamma = f(gamma omega) delta_gamma on l2(G)"""
    w = action.point_index(omega)
    values = np.asarray(f, dtype=np.complex128)
    return np.diag([values[action.act(gamma, w)] for gamma in range(action.group.order)])


def translation_unitary(group: GroupSpec, gamma: int) -> np.ndarray:
    """rho(gamma) delta_h = delta_{gamma h}"""
    n = group.order
    u = np.zeros((n, n), dtype=np.complex128)
    for h in range(n):
        u[group.mult(gamma, h), h] = 1.0
    return u


def fibre_bijection_unitary(action: ActionSpec, omega: Label) -> np.ndarray:
    """V_omega: l2(G_omega) -> l2(G), delta_(gamma omega, gamma) -> delta_gamma"""
    g = transformation_groupoid(action)
    w = action.point_index(omega)
    order = action.group.order
    fibre = g.fibre(w)
    v = np.zeros((order, len(fibre)), dtype=np.complex128)
    for k, arrow in enumerate(fibre):
        v[arrow % order, k] = 1.0
    return v


def crossed_product_rep(action: ActionSpec, F: AlgebraElement, omega: Label) -> np.ndarray:
    """(M_omega x rho)(sum f_gamma gamma); entry (g, h) is F(g omega, g h^-1)"""
    w = action.point_index(omega)
    G = action.group
    coefficients = crossed_product_coefficients(action, F)
    out = np.zeros((G.order, G.order), dtype=np.complex128)
    for gamma in range(G.order):
        out += multiplication_operator(action, coefficients[G.elements[gamma]], action.points[w]) @ \
            translation_unitary(G, gamma)
    return out


def group_roe_matrix(group: GroupSpec, F: AlgebraElement) -> np.ndarray:
    """Left-multiplication action of G on itself, read at the identity: T[g, h] = F(g, g h^-1)"""
    action = regular_action(group)
    return crossed_product_rep(action, F, action.points[group.identity])


def roe_to_element(group: GroupSpec, T: np.ndarray) -> AlgebraElement:
    """Inverse of group_roe_matrix: F(x, gamma) = T[x, gamma^-1 x]"""
    action = regular_action(group)
    g = transformation_groupoid(action)
    n = group.order
    coeffs = np.zeros(n * n, dtype=np.complex128)
    for x in range(n):
        for gamma in range(n):
            coeffs[x * n + gamma] = T[x, group.mult(group.inv(gamma), x)]
    return AlgebraElement(g, coeffs)


# ---------------------------------------------------------------------------
# Display
# ---------------------------------------------------------------------------

def format_exel_report(report: ExelReport) -> str:
    status = "✅ INVERTIBLE" if report.verdict else "❌ NOT INVERTIBLE"
    lines = ["\n" + "=" * 60, f"🧮 FIBREWISE INVERTIBILITY ({report.mode}): {status}", "=" * 60]
    for v in report.per_unit:
        mark = "✓" if v.invertible else "✗"
        near = "  ⚠️ near cut" if v.near_threshold else ""
        lines.append(f"   {mark} unit {v.unit}: sigma_min = {v.sigma_min:.6g}{near}")
    if report.verdict:
        lines.append(f"\n   sup ||lambda_x^-1|| = {report.sup_inverse_norm:.6g}")
        lines.append(f"   inverse residual    = {report.inverse_residual:.2e}")
        lines.append("   Inverse coefficients:")
        for label, re, im in report.inverse.to_dict()["coeffs"]:
            lines.append(f"      {label}: {complex(re, im):.6g}")
    return "\n".join(lines)


def format_main_theorem_report(report: MainTheoremReport) -> str:
    lines = ["\n" + "=" * 60, "🧭 INVERTIBILITY MODULO THE INTERIOR", "=" * 60]
    if report.degenerate:
        lines.append("   ℹ️  Empty boundary: all conditions hold vacuously")
    labels = {
        "c1": "inverse modulo C_c(G(X))",
        "c2": "symbol section invertible",
        "c3": "limit operators uniformly invertible",
        "c4": "limit operators invertible",
    }
    for key, text in labels.items():
        mark = "✅" if report.conditions[key] else "❌"
        lines.append(f"   {mark} ({key}) {text}")
    lines.append(f"\n   Conditions agree: {'yes' if report.agree else 'NO'}")
    for v in report.per_unit:
        lines.append(f"   • boundary unit {v.unit}: sigma_min = {v.sigma_min:.6g}")
    if report.sup_inverse_norm is not None:
        lines.append(f"   sup ||lambda_omega^-1|| = {report.sup_inverse_norm:.6g}")
    if report.certificate_residual is not None:
        lines.append(f"   certificate residual    = {report.certificate_residual:.2e}")
    lines.append(f"   ||q(f)||_r = {report.quotient_norm:.6g}   sup ||lambda_omega(f)|| = {report.limit_norm:.6g}")
    return "\n".join(lines)
