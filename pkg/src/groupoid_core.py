"""
Finite Groupoid Core

Builds and checks the finite (discrete, etale) groupoids everything else
runs on:
- validation of raw composition / inverse tables against the groupoid laws
- standard constructions: pair groupoid, group as a one-unit groupoid,
  transformation groupoid of a finite action, disjoint unions
- invariant unit subsets, reductions, orbits and isomorphism tests
- defect report for families of approximate invariant means

Arrows carry dense integer ids (their position in declaration order) and a
user-facing label. Composition is kept as the list of composable triples,
never as a dense |arrows|^2 table.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from networkx.algorithms import isomorphism

from .errors import (
    ActionError,
    AxiomViolation,
    GroupAxiomError,
    GroupoidAxiomError,
    InvalidMeanFamily,
    NotInvariant,
    SupportViolation,
    UnknownArrow,
    UnknownPoint,
    UnknownUnit,
)

logger = logging.getLogger(__name__)

Label = Union[int, str]

# Slot used for a missing unit arrow / inverse while a candidate is checked
MISSING = -1


# ---------------------------------------------------------------------------
# Groupoids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arrow:
    """One arrow: dense id, label, and source / range as unit indices"""
    id: int
    label: Label
    source: int
    range: int


@dataclass(frozen=True)
class FiniteGroupoid:
    """
    A validated finite groupoid.

    units        unit labels in declaration order (unit index = position)
    arrows       Arrow records in declaration order (arrow id = position)
    unit_arrows  unit index -> id of the identity arrow at that unit
    compositions composable triples (a, b, ab), one per pair with s(a) = r(b)
    inverses     arrow id -> id of its inverse
    """
    units: Tuple[Label, ...]
    arrows: Tuple[Arrow, ...]
    unit_arrows: Tuple[int, ...]
    compositions: Tuple[Tuple[int, int, int], ...]
    inverses: Tuple[int, ...]
    name: str = field(default="groupoid", compare=False)

    # -- lookups -----------------------------------------------------------

    @cached_property
    def _unit_index(self) -> Dict[Label, int]:
        return {u: i for i, u in enumerate(self.units)}

    @cached_property
    def _arrow_index(self) -> Dict[Label, int]:
        return {a.label: a.id for a in self.arrows}

    @cached_property
    def _compose(self) -> Dict[Tuple[int, int], int]:
        return {(a, b): c for a, b, c in self.compositions}

    @cached_property
    def source_fibres(self) -> Tuple[Tuple[int, ...], ...]:
        fibres: List[List[int]] = [[] for _ in self.units]
        for a in self.arrows:
            fibres[a.source].append(a.id)
        return tuple(tuple(f) for f in fibres)

    @cached_property
    def range_fibres(self) -> Tuple[Tuple[int, ...], ...]:
        fibres: List[List[int]] = [[] for _ in self.units]
        for a in self.arrows:
            fibres[a.range].append(a.id)
        return tuple(tuple(f) for f in fibres)

    @cached_property
    def fibre_position(self) -> Tuple[int, ...]:
        """Position of each arrow inside its own source fibre"""
        pos = [0] * len(self.arrows)
        for fibre in self.source_fibres:
            for k, a in enumerate(fibre):
                pos[a] = k
        return tuple(pos)

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def __len__(self) -> int:
        return len(self.arrows)

    def source(self, a: int) -> int:
        return self.arrows[a].source

    def range(self, a: int) -> int:
        return self.arrows[a].range

    def compose(self, a: int, b: int) -> Optional[int]:
        """Product ab, or None when s(a) != r(b)"""
        return self._compose.get((a, b))

    def inverse(self, a: int) -> int:
        return self.inverses[a]

    def unit_arrow(self, x: int) -> int:
        return self.unit_arrows[x]

    def is_unit_arrow(self, a: int) -> bool:
        arrow = self.arrows[a]
        return arrow.source == arrow.range and self.unit_arrows[arrow.source] == a

    def fibre(self, x: int) -> Tuple[int, ...]:
        """Source fibre s^-1(x) in declaration order"""
        return self.source_fibres[x]

    def unit_index(self, label: Label) -> int:
        try:
            return self._unit_index[label]
        except KeyError:
            # JSON / CLI input may hand over "3" for the unit 3 and vice versa
            for candidate in _label_variants(label):
                if candidate in self._unit_index:
                    return self._unit_index[candidate]
            raise UnknownUnit(label) from None

    def arrow_index(self, label: Label) -> int:
        try:
            return self._arrow_index[label]
        except KeyError:
            for candidate in _label_variants(label):
                if candidate in self._arrow_index:
                    return self._arrow_index[candidate]
            raise UnknownArrow(label) from None

    def unit_label(self, x: int) -> Label:
        return self.units[x]

    def arrow_label(self, a: int) -> Label:
        return self.arrows[a].label

    def hom(self, x: int, y: int) -> Tuple[int, ...]:
        """Arrows with source x and range y"""
        return tuple(a for a in self.source_fibres[x] if self.arrows[a].range == y)

    def summary(self) -> Dict:
        return {
            "name": self.name,
            "units": len(self.units),
            "arrows": len(self.arrows),
            "composable_pairs": len(self.compositions),
            "orbits": len(orbits(self)),
            "max_fibre": max((len(f) for f in self.source_fibres), default=0),
        }


def _label_variants(label: Label) -> List[Label]:
    if isinstance(label, str):
        try:
            return [int(label)]
        except ValueError:
            return []
    return [str(label)]


@dataclass
class RawGroupoid:
    """Unchecked tables as read from a document"""
    units: List[Label]
    arrows: List[Tuple[Label, Label, Label]]          # (id, s, r)
    compose: List[Tuple[Label, Label, Label]]         # (a, b, ab)
    invert: List[Tuple[Label, Label]]                 # (a, a^-1)
    unit_arrows: Optional[List[Tuple[Label, Label]]] = None
    name: str = "groupoid"


def _assemble(units, arrows, compositions, inverses, unit_arrows, name) -> FiniteGroupoid:
    return FiniteGroupoid(
        units=tuple(units),
        arrows=tuple(arrows),
        unit_arrows=tuple(unit_arrows),
        compositions=tuple(sorted(compositions)),
        inverses=tuple(inverses),
        name=name,
    )


def _structural_candidate(raw: RawGroupoid) -> Tuple[List[AxiomViolation], Optional[FiniteGroupoid]]:
    """Resolve labels and endpoints; return violations plus a candidate to law-check"""
    violations: List[AxiomViolation] = []

    unit_index: Dict[Label, int] = {}
    for u in raw.units:
        if u in unit_index:
            violations.append(AxiomViolation("duplicate_unit", (u,)))
        unit_index.setdefault(u, len(unit_index))

    arrows: List[Arrow] = []
    arrow_index: Dict[Label, int] = {}
    for label, s, r in raw.arrows:
        if label in arrow_index:
            violations.append(AxiomViolation("duplicate_arrow", (label,)))
            continue
        if s not in unit_index or r not in unit_index:
            violations.append(AxiomViolation("unknown_unit", (label,), f"s={s!r} r={r!r}"))
            continue
        arrow_index[label] = len(arrows)
        arrows.append(Arrow(len(arrows), label, unit_index[s], unit_index[r]))

    if violations:
        return violations, None

    compose: Dict[Tuple[int, int], int] = {}
    for row in raw.compose:
        a_l, b_l, c_l = row
        missing = [x for x in (a_l, b_l, c_l) if x not in arrow_index]
        if missing:
            violations.append(AxiomViolation("unknown_arrow", tuple(missing), f"in compose row {list(row)}"))
            continue
        a, b, c = arrow_index[a_l], arrow_index[b_l], arrow_index[c_l]
        if arrows[a].source != arrows[b].range:
            violations.append(AxiomViolation(
                "composability", (a_l, b_l),
                f"source({a_l})={raw.units[arrows[a].source]!r} != range({b_l})={raw.units[arrows[b].range]!r}",
            ))
            continue
        if (a, b) in compose and compose[(a, b)] != c:
            violations.append(AxiomViolation("conflicting_composition", (a_l, b_l)))
            continue
        compose[(a, b)] = c

    inverses = [MISSING] * len(arrows)
    for row in raw.invert:
        a_l, b_l = row
        missing = [x for x in (a_l, b_l) if x not in arrow_index]
        if missing:
            violations.append(AxiomViolation("unknown_arrow", tuple(missing), f"in invert row {list(row)}"))
            continue
        a = arrow_index[a_l]
        if inverses[a] != MISSING and inverses[a] != arrow_index[b_l]:
            violations.append(AxiomViolation("conflicting_inverse", (a_l,)))
            continue
        inverses[a] = arrow_index[b_l]

    unit_arrows = [MISSING] * len(unit_index)
    if raw.unit_arrows is not None:
        for u, a_l in raw.unit_arrows:
            if u not in unit_index:
                violations.append(AxiomViolation("unknown_unit", (a_l,), f"unit {u!r}"))
                continue
            if a_l not in arrow_index:
                violations.append(AxiomViolation("unknown_arrow", (a_l,), f"unit arrow of {u!r}"))
                continue
            unit_arrows[unit_index[u]] = arrow_index[a_l]
    else:
        # the unit arrow at x is the unique idempotent loop at x
        for x in range(len(unit_index)):
            loops = [a.id for a in arrows if a.source == x and a.range == x]
            idempotent = [a for a in loops if compose.get((a, a)) == a]
            if len(idempotent) == 1:
                unit_arrows[x] = idempotent[0]
            elif len(idempotent) > 1:
                violations.append(AxiomViolation(
                    "ambiguous_unit_arrow", tuple(arrows[a].label for a in idempotent), f"unit {raw.units[x]!r}",
                ))

    candidate = _assemble(
        unit_index.keys(), arrows, [(a, b, c) for (a, b), c in compose.items()],
        inverses, unit_arrows, raw.name,
    )
    return violations, candidate


def _law_violations(g: FiniteGroupoid) -> List[AxiomViolation]:
    """Check every groupoid law on an assembled candidate"""
    violations: List[AxiomViolation] = []
    lbl = g.arrow_label

    for a, b, c in g.compositions:
        if g.range(c) != g.range(a) or g.source(c) != g.source(b):
            violations.append(AxiomViolation("composition_endpoints", (lbl(a), lbl(b), lbl(c))))

    for a in range(g.n_arrows):
        for b in g.range_fibres[g.source(a)]:
            if g.compose(a, b) is None:
                violations.append(AxiomViolation("missing_composition", (lbl(a), lbl(b))))

    units_ok = True
    for x in range(g.n_units):
        u = g.unit_arrows[x]
        if u == MISSING:
            violations.append(AxiomViolation("missing_unit_arrow", (), f"unit {g.units[x]!r}"))
            units_ok = False
        elif g.source(u) != x or g.range(u) != x:
            violations.append(AxiomViolation("unit_arrow_endpoints", (lbl(u),), f"unit {g.units[x]!r}"))
            units_ok = False

    if units_ok:
        for a in range(g.n_arrows):
            if g.compose(a, g.unit_arrow(g.source(a))) != a:
                violations.append(AxiomViolation("right_unit", (lbl(a), lbl(g.unit_arrow(g.source(a))))))
            if g.compose(g.unit_arrow(g.range(a)), a) != a:
                violations.append(AxiomViolation("left_unit", (lbl(g.unit_arrow(g.range(a))), lbl(a))))

    for a in range(g.n_arrows):
        inv = g.inverses[a]
        if inv == MISSING:
            violations.append(AxiomViolation("missing_inverse", (lbl(a),)))
            continue
        if g.source(inv) != g.range(a) or g.range(inv) != g.source(a):
            violations.append(AxiomViolation("inverse_endpoints", (lbl(a), lbl(inv))))
            continue
        if g.inverses[inv] != a:
            violations.append(AxiomViolation("inverse_involution", (lbl(a), lbl(inv))))
        if units_ok:
            if g.compose(a, inv) != g.unit_arrow(g.range(a)):
                violations.append(AxiomViolation("inverse_law", (lbl(a), lbl(inv))))
            if g.compose(inv, a) != g.unit_arrow(g.source(a)):
                violations.append(AxiomViolation("inverse_law", (lbl(inv), lbl(a))))

    for a in range(g.n_arrows):
        for b in g.range_fibres[g.source(a)]:
            ab = g.compose(a, b)
            if ab is None:
                continue
            for c in g.range_fibres[g.source(b)]:
                bc = g.compose(b, c)
                if bc is None:
                    continue
                left, right = g.compose(ab, c), g.compose(a, bc)
                if left is None or right is None or left != right:
                    violations.append(AxiomViolation("associativity", (lbl(a), lbl(b), lbl(c))))
    return violations


def groupoid_violations(raw: RawGroupoid) -> List[AxiomViolation]:
    """All axiom violations of raw tables (empty list means valid)"""
    violations, candidate = _structural_candidate(raw)
    if candidate is not None:
        violations += _law_violations(candidate)
    return violations


def validate_groupoid(raw: RawGroupoid) -> FiniteGroupoid:
    """
    Validate raw composition / inverse tables.

    Returns the groupoid when every law holds, otherwise raises
    GroupoidAxiomError listing each violation with its witnessing arrows.
    """
    violations, candidate = _structural_candidate(raw)
    if candidate is not None:
        violations += _law_violations(candidate)
    if violations or candidate is None:
        logger.info(f"Groupoid '{raw.name}' rejected with {len(violations)} violation(s)")
        raise GroupoidAxiomError(violations)
    logger.info(f"Groupoid '{raw.name}' validated: {candidate.n_units} units, {candidate.n_arrows} arrows")
    return candidate


def to_raw(g: FiniteGroupoid) -> RawGroupoid:
    lbl = g.arrow_label
    return RawGroupoid(
        units=list(g.units),
        arrows=[(a.label, g.units[a.source], g.units[a.range]) for a in g.arrows],
        compose=[(lbl(a), lbl(b), lbl(c)) for a, b, c in g.compositions],
        invert=[(lbl(a), lbl(g.inverse(a))) for a in range(g.n_arrows)],
        unit_arrows=[(g.units[x], lbl(g.unit_arrow(x))) for x in range(g.n_units)],
        name=g.name,
    )


# ---------------------------------------------------------------------------
# Groups and actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """A finite group as element names plus Cayley and inverse tables (indices)"""
    elements: Tuple[str, ...]
    identity: int
    table: Tuple[Tuple[int, ...], ...]
    inverse: Tuple[int, ...]
    name: str = field(default="group", compare=False)

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise GroupAxiomError("a group needs at least one element")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise GroupAxiomError(f"Cayley table must be {n}x{n}")
        if any(not 0 <= c < n for row in self.table for c in row):
            raise GroupAxiomError("Cayley table entry out of range")
        e = self.identity
        for a in range(n):
            if self.table[e][a] != a or self.table[a][e] != a:
                raise GroupAxiomError(f"{self.elements[e]!r} is not an identity (fails at {self.elements[a]!r})")
            inv = self.inverse[a]
            if self.table[a][inv] != e or self.table[inv][a] != e:
                raise GroupAxiomError(f"wrong inverse for {self.elements[a]!r}")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                names = (self.elements[a], self.elements[b], self.elements[c])
                raise GroupAxiomError(f"Cayley table is not associative at {names}")

    @classmethod
    def from_table(cls, elements: Sequence[str], table: Sequence[Sequence[int]],
                   identity: Optional[int] = None, inverse: Optional[Sequence[int]] = None,
                   name: str = "group") -> "GroupSpec":
        """Build a group, deriving identity and inverses when not given"""
        n = len(elements)
        rows = tuple(tuple(int(c) for c in row) for row in table)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GroupAxiomError(f"Cayley table must be {n}x{n}")
        if identity is None:
            candidates = [e for e in range(n) if all(rows[e][a] == a == rows[a][e] for a in range(n))]
            if not candidates:
                raise GroupAxiomError("Cayley table has no identity element")
            identity = candidates[0]
        if inverse is None:
            inv = []
            for a in range(n):
                found = [b for b in range(n) if rows[a][b] == identity]
                if not found:
                    raise GroupAxiomError(f"{elements[a]!r} has no inverse")
                inv.append(found[0])
            inverse = inv
        return cls(tuple(str(e) for e in elements), int(identity), rows, tuple(int(i) for i in inverse), name)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def mult(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def index(self, name: str) -> int:
        try:
            return self.elements.index(str(name))
        except ValueError:
            raise GroupAxiomError(f"unknown group element {name!r}") from None


def cyclic_group(n: int) -> GroupSpec:
    """Z/n with elements e, g, g^2, ..."""
    if n < 1:
        raise GroupAxiomError("cyclic group order must be >= 1")
    names = ["e", "g"] + [f"g^{k}" for k in range(2, n)]
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return GroupSpec.from_table(names[:n], table, identity=0,
                                inverse=[(-a) % n for a in range(n)], name=f"Z/{n}")


def symmetric_group(n: int) -> GroupSpec:
    """S_n on {0..n-1}; elements in one-line notation, (pq)(i) = p(q(i))"""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    names = ["".join(str(i) for i in p) for p in perms]
    return GroupSpec.from_table(names, table, identity=0, name=f"S{n}")


def direct_product(g: GroupSpec, h: GroupSpec) -> GroupSpec:
    pairs = list(itertools.product(range(g.order), range(h.order)))
    index = {p: i for i, p in enumerate(pairs)}
    table = [[index[(g.mult(a1, a2), h.mult(b1, b2))] for (a2, b2) in pairs] for (a1, b1) in pairs]
    names = [f"({g.elements[a]},{h.elements[b]})" for a, b in pairs]
    return GroupSpec.from_table(names, table, identity=index[(g.identity, h.identity)],
                                name=f"{g.name}x{h.name}")


@dataclass(frozen=True)
class ActionSpec:
    """
    A finite group acting on a finite point set.

    perms[g][i] is the index of the point g.x_i; the map g -> perms[g] must
    be a homomorphism into the permutations of the points.
    """
    group: GroupSpec
    points: Tuple[Label, ...]
    perms: Tuple[Tuple[int, ...], ...]
    name: str = field(default="action", compare=False)

    def __post_init__(self):
        n, G = len(self.points), self.group
        if len(set(self.points)) != n:
            raise ActionError("duplicate point labels")
        if len(self.perms) != G.order:
            raise ActionError(f"need one permutation per group element ({G.order}), got {len(self.perms)}")
        for g, p in enumerate(self.perms):
            if sorted(p) != list(range(n)):
                raise ActionError(f"image of {G.elements[g]!r} is not a permutation of the points")
        if any(self.perms[G.identity][i] != i for i in range(n)):
            raise ActionError("identity does not act trivially")
        for g, h in itertools.product(range(G.order), repeat=2):
            gh = self.perms[G.mult(g, h)]
            if any(gh[i] != self.perms[g][self.perms[h][i]] for i in range(n)):
                raise ActionError(f"not a homomorphism at ({G.elements[g]!r}, {G.elements[h]!r})")

    def act(self, g: int, i: int) -> int:
        return self.perms[g][i]

    def point_index(self, label: Label) -> int:
        if label in self.points:
            return self.points.index(label)
        for candidate in _label_variants(label):
            if candidate in self.points:
                return self.points.index(candidate)
        raise UnknownPoint(label)


def trivial_action(group: GroupSpec, points: Sequence[Label]) -> ActionSpec:
    n = len(points)
    return ActionSpec(group, tuple(points), tuple(tuple(range(n)) for _ in range(group.order)), "trivial")


def regular_action(group: GroupSpec) -> ActionSpec:
    """Left multiplication of a group on itself"""
    perms = tuple(tuple(group.mult(g, x) for x in range(group.order)) for g in range(group.order))
    return ActionSpec(group, tuple(group.elements), perms, "regular")


# ---------------------------------------------------------------------------
# Standard constructions
# ---------------------------------------------------------------------------

def pair_groupoid(n: int) -> FiniteGroupoid:
    """Units 1..n, arrows (i,j) with s=j, r=i, (i,j)(j,k)=(i,k), (i,j)^-1=(j,i)"""
    if n < 1:
        raise ValueError("pair groupoid needs n >= 1")

    def aid(i: int, j: int) -> int:
        return (i - 1) * n + (j - 1)

    arrows = [Arrow(aid(i, j), f"({i},{j})", j - 1, i - 1)
              for i in range(1, n + 1) for j in range(1, n + 1)]
    compositions = [(aid(i, j), aid(j, k), aid(i, k))
                    for i in range(1, n + 1) for j in range(1, n + 1) for k in range(1, n + 1)]
    inverses = [aid(j, i) for i in range(1, n + 1) for j in range(1, n + 1)]
    unit_arrows = [aid(i, i) for i in range(1, n + 1)]
    return _assemble(range(1, n + 1), arrows, compositions, inverses, unit_arrows, f"pair({n})")


def group_groupoid(group: GroupSpec, unit_label: Label = "*") -> FiniteGroupoid:
    """A group regarded as a groupoid with a single unit"""
    arrows = [Arrow(a, name, 0, 0) for a, name in enumerate(group.elements)]
    compositions = [(a, b, group.mult(a, b)) for a in range(group.order) for b in range(group.order)]
    return _assemble([unit_label], arrows, compositions, list(group.inverse), [group.identity], group.name)


def transformation_groupoid(action: ActionSpec) -> FiniteGroupoid:
    """
    X x G with s(x,g) = g^-1 x, r(x,g) = x, (x,g)(g^-1 x, h) = (x, gh)
    and (x,g)^-1 = (g^-1 x, g^-1). Arrow (x_i, g) has id i*|G| + g.
    """
    G = action.group
    order = G.order

    def aid(i: int, g: int) -> int:
        return i * order + g

    arrows, compositions, inverses = [], [], []
    for i, x in enumerate(action.points):
        for g in range(order):
            src = action.act(G.inv(g), i)
            arrows.append(Arrow(aid(i, g), f"({x},{G.elements[g]})", src, i))
            inverses.append(aid(src, G.inv(g)))
            for h in range(order):
                compositions.append((aid(i, g), aid(src, h), aid(i, G.mult(g, h))))
    unit_arrows = [aid(i, G.identity) for i in range(len(action.points))]
    return _assemble(action.points, arrows, compositions, inverses, unit_arrows,
                     f"{action.name}:{G.name}")


def disjoint_union(*parts: FiniteGroupoid, name: str = "") -> FiniteGroupoid:
    """Disjoint union; component k relabels unit u as 'k:u' and arrow a as 'k:a'"""
    units, arrows, compositions, inverses, unit_arrows = [], [], [], [], []
    unit_offset = arrow_offset = 0
    for k, g in enumerate(parts):
        units.extend(f"{k}:{u}" for u in g.units)
        arrows.extend(Arrow(a.id + arrow_offset, f"{k}:{a.label}", a.source + unit_offset, a.range + unit_offset)
                      for a in g.arrows)
        compositions.extend((a + arrow_offset, b + arrow_offset, c + arrow_offset) for a, b, c in g.compositions)
        inverses.extend(i + arrow_offset for i in g.inverses)
        unit_arrows.extend(u + arrow_offset for u in g.unit_arrows)
        unit_offset += g.n_units
        arrow_offset += g.n_arrows
    return _assemble(units, arrows, compositions, inverses, unit_arrows,
                     name or " + ".join(g.name for g in parts))


def empty_groupoid() -> FiniteGroupoid:
    return _assemble([], [], [], [], [], "empty")


# ---------------------------------------------------------------------------
# Invariant subsets and reductions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantSubset:
    """A unit subset Y with r^-1(Y) = s^-1(Y); build it with invariant_subset()"""
    units: FrozenSet[int]

    def labels(self, g: FiniteGroupoid) -> Tuple[Label, ...]:
        return tuple(g.units[x] for x in sorted(self.units))


@dataclass(frozen=True)
class InvarianceResult:
    invariant: bool
    witness: Optional[Label] = None

    def __bool__(self) -> bool:
        return self.invariant


def _unit_indices(g: FiniteGroupoid, y: Union[InvariantSubset, Iterable[Label]]) -> FrozenSet[int]:
    if isinstance(y, InvariantSubset):
        return y.units
    return frozenset(g.unit_index(u) for u in y)


def invariance_check(g: FiniteGroupoid, y: Iterable[Label]) -> InvarianceResult:
    """True iff r^-1(Y) = s^-1(Y); otherwise the first arrow with one endpoint in Y"""
    inside = _unit_indices(g, y)
    for a in g.arrows:
        if (a.source in inside) != (a.range in inside):
            return InvarianceResult(False, a.label)
    return InvarianceResult(True)


def invariant_subset(g: FiniteGroupoid, y: Iterable[Label]) -> InvariantSubset:
    inside = _unit_indices(g, y)
    result = invariance_check(g, [g.units[x] for x in inside])
    if not result:
        raise NotInvariant(result.witness)
    return InvariantSubset(inside)


def _restrict(g: FiniteGroupoid, inside: FrozenSet[int], name: str) -> FiniteGroupoid:
    keep_units = [x for x in range(g.n_units) if x in inside]
    unit_map = {x: k for k, x in enumerate(keep_units)}
    keep_arrows = [a for a in g.arrows if a.source in inside and a.range in inside]
    arrow_map = {a.id: k for k, a in enumerate(keep_arrows)}
    arrows = [Arrow(arrow_map[a.id], a.label, unit_map[a.source], unit_map[a.range]) for a in keep_arrows]
    compositions = [(arrow_map[a], arrow_map[b], arrow_map[c]) for a, b, c in g.compositions
                    if a in arrow_map and b in arrow_map]
    inverses = [arrow_map[g.inverse(a.id)] for a in keep_arrows]
    unit_arrows = [arrow_map[g.unit_arrow(x)] for x in keep_units]
    return _assemble([g.units[x] for x in keep_units], arrows, compositions, inverses, unit_arrows, name)


def reduction(g: FiniteGroupoid, y: Union[InvariantSubset, Iterable[Label]]) -> FiniteGroupoid:
    """
    The reduction G(Y): arrows with range and source in Y, inherited structure.
    Labels and declaration order are preserved; raises NotInvariant.
    """
    inside = _unit_indices(g, y)
    if not isinstance(y, InvariantSubset):
        result = invariance_check(g, [g.units[x] for x in inside])
        if not result:
            raise NotInvariant(result.witness)
    if not inside:
        return empty_groupoid()
    return _restrict(g, inside, f"{g.name}|{len(inside)}")


def orbit_graph(g: FiniteGroupoid) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n_units))
    graph.add_edges_from((a.source, a.range) for a in g.arrows)
    return graph


def orbits(g: FiniteGroupoid) -> List[Tuple[Label, ...]]:
    """Orbits of the unit space, in order of their first unit"""
    components = sorted((sorted(c) for c in nx.connected_components(orbit_graph(g))), key=lambda c: c[0])
    return [tuple(g.units[x] for x in comp) for comp in components]


def saturation(g: FiniteGroupoid, y: Iterable[Label]) -> Tuple[Label, ...]:
    """Smallest invariant unit subset containing Y"""
    inside = _unit_indices(g, y)
    graph = orbit_graph(g)
    hit = set()
    for x in inside:
        hit |= nx.node_connected_component(graph, x)
    return tuple(g.units[x] for x in sorted(hit))


def isotropy(g: FiniteGroupoid, x: Label) -> GroupSpec:
    """The isotropy group at x as a GroupSpec"""
    xi = g.unit_index(x)
    loops = list(g.hom(xi, xi))
    pos = {a: k for k, a in enumerate(loops)}
    table = [[pos[g.compose(a, b)] for b in loops] for a in loops]
    return GroupSpec.from_table([str(g.arrow_label(a)) for a in loops], table,
                                identity=pos[g.unit_arrow(xi)],
                                inverse=[pos[g.inverse(a)] for a in loops], name=f"iso({x})")


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

def _quiver(g: FiniteGroupoid) -> nx.DiGraph:
    quiver = nx.DiGraph()
    for x in range(g.n_units):
        quiver.add_node(x, loops=len(g.hom(x, x)))
    for a in g.arrows:
        if a.source != a.range:
            if quiver.has_edge(a.source, a.range):
                quiver[a.source][a.range]["count"] += 1
            else:
                quiver.add_edge(a.source, a.range, count=1)
    return quiver


def _arrow_bijection(g: FiniteGroupoid, h: FiniteGroupoid, unit_map: Mapping[int, int]) -> Optional[Dict[int, int]]:
    """Backtracking search for an arrow bijection over a fixed unit bijection"""
    psi: Dict[int, int] = {g.unit_arrow(x): h.unit_arrow(unit_map[x]) for x in range(g.n_units)}
    order = [a for a in range(g.n_arrows) if a not in psi]
    used = set(psi.values())

    def consistent(a: int) -> bool:
        for b, hb in psi.items():
            for left, right in ((a, b), (b, a)):
                c = g.compose(left, right)
                if c is not None and c in psi:
                    if h.compose(psi[left], psi[right]) != psi[c]:
                        return False
        return True

    def extend(k: int) -> bool:
        if k == len(order):
            return True
        a = order[k]
        targets = h.hom(unit_map[g.source(a)], unit_map[g.range(a)])
        for t in targets:
            if t in used:
                continue
            psi[a] = t
            used.add(t)
            if consistent(a) and extend(k + 1):
                return True
            del psi[a]
            used.discard(t)
        return False

    return dict(psi) if extend(0) else None


def find_isomorphism(g: FiniteGroupoid, h: FiniteGroupoid) -> Optional[Dict[Label, Label]]:
    """An arrow-label bijection g -> h preserving composition, or None"""
    if g.n_units != h.n_units or g.n_arrows != h.n_arrows:
        return None
    matcher = isomorphism.DiGraphMatcher(
        _quiver(g), _quiver(h),
        node_match=lambda u, v: u["loops"] == v["loops"],
        edge_match=lambda u, v: u["count"] == v["count"],
    )
    for unit_map in matcher.isomorphisms_iter():
        psi = _arrow_bijection(g, h, unit_map)
        if psi is not None:
            return {g.arrow_label(a): h.arrow_label(b) for a, b in psi.items()}
    return None


def are_isomorphic(g: FiniteGroupoid, h: FiniteGroupoid) -> bool:
    return find_isomorphism(g, h) is not None


# ---------------------------------------------------------------------------
# Approximate invariant means
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeanFamily:
    """
    One family m^(n) = {m_x}: weights[x, a] is m_x(a).
    Each row must be nonnegative, of total mass <= 1 and supported on s^-1(x).
    """
    index: int
    weights: np.ndarray


def _check_mean(g: FiniteGroupoid, m: MeanFamily) -> None:
    w = np.asarray(m.weights, dtype=float)
    if w.shape != (g.n_units, g.n_arrows):
        raise InvalidMeanFamily(f"family {m.index}: weights shape {w.shape}, expected {(g.n_units, g.n_arrows)}")
    if np.any(w < 0):
        raise InvalidMeanFamily(f"family {m.index}: negative weight")
    for x in range(g.n_units):
        outside = [g.arrow_label(a) for a in np.nonzero(w[x])[0] if g.source(int(a)) != x]
        if outside:
            raise SupportViolation(g.units[x], outside)
        if w[x].sum() > 1 + 1e-12:
            raise InvalidMeanFamily(f"family {m.index}: mass {w[x].sum():.6g} > 1 at unit {g.units[x]!r}")


@dataclass(frozen=True)
class MeanDefectRow:
    index: int
    d1: float
    d2: float
    worst_unit: Optional[Label]
    worst_arrow: Optional[Label]


@dataclass(frozen=True)
class MeanDefectReport:
    """d1(n) = max_x |1 - ||m_x||_1|, d2(n) = max_gamma translation defect"""
    rows: Tuple[MeanDefectRow, ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.rows], columns=["index", "d1", "d2", "worst_unit", "worst_arrow"])

    def to_dict(self) -> Dict:
        return {"rows": [dict(r.__dict__) for r in self.rows]}

    @property
    def decreasing(self) -> bool:
        """Both defects non-increasing along the sequence (reported, not a verdict)"""
        d1 = [r.d1 for r in self.rows]
        d2 = [r.d2 for r in self.rows]
        return all(a >= b for a, b in zip(d1, d1[1:])) and all(a >= b for a, b in zip(d2, d2[1:]))


def mean_defect(g: FiniteGroupoid, means: Sequence[MeanFamily],
                arrows: Optional[Iterable[Label]] = None) -> MeanDefectReport:
    """
    Defects of a sequence of mean families.

    d2 compares m_{s(gamma)} pulled back along alpha -> alpha.gamma with
    m_{r(gamma)}, over alpha in s^-1(r(gamma)); with `arrows` the maximum is
    taken over that finite set only.
    """
    probe = list(range(g.n_arrows)) if arrows is None else [g.arrow_index(a) for a in arrows]
    translations = []
    for gamma in probe:
        alphas = np.array(g.fibre(g.range(gamma)), dtype=int)
        moved = np.array([g.compose(int(a), gamma) for a in alphas], dtype=int)
        translations.append((gamma, alphas, moved))

    rows = []
    for m in means:
        _check_mean(g, m)
        w = np.asarray(m.weights, dtype=float)
        gaps = np.abs(1.0 - w.sum(axis=1)) if g.n_units else np.zeros(0)
        d1 = float(gaps.max()) if len(gaps) else 0.0
        worst_unit = g.units[int(gaps.argmax())] if len(gaps) else None
        d2, worst_arrow = 0.0, None
        for gamma, alphas, moved in translations:
            defect = float(np.abs(w[g.source(gamma), moved] - w[g.range(gamma), alphas]).sum())
            if worst_arrow is None or defect > d2:
                d2, worst_arrow = defect, g.arrow_label(gamma)
        rows.append(MeanDefectRow(m.index, d1, d2, worst_unit, worst_arrow))
        logger.debug(f"mean family {m.index}: d1={d1:.3e} d2={d2:.3e}")
    return MeanDefectReport(tuple(rows))


def means_from_sets(g: FiniteGroupoid, sets: Mapping[Label, Iterable[Label]], index: int = 0) -> MeanFamily:
    """Uniform probability on a chosen subset of each source fibre"""
    w = np.zeros((g.n_units, g.n_arrows))
    for unit, chosen in sets.items():
        x = g.unit_index(unit)
        ids = [g.arrow_index(a) for a in chosen]
        if ids:
            w[x, ids] = 1.0 / len(ids)
    return MeanFamily(index, w)


def uniform_means(g: FiniteGroupoid, index: int = 0) -> MeanFamily:
    w = np.zeros((g.n_units, g.n_arrows))
    for x, fibre in enumerate(g.source_fibres):
        w[x, list(fibre)] = 1.0 / len(fibre)
    return MeanFamily(index, w)


def unit_point_means(g: FiniteGroupoid, index: int = 0) -> MeanFamily:
    w = np.zeros((g.n_units, g.n_arrows))
    for x in range(g.n_units):
        w[x, g.unit_arrow(x)] = 1.0
    return MeanFamily(index, w)


def cyclic_interval_means(g: FiniteGroupoid, generator: Label, length: int, index: int = 0) -> MeanFamily:
    """Folner-type mean on a one-unit groupoid: uniform on {e, a, ..., a^(length-1)}"""
    if g.n_units != 1:
        raise InvalidMeanFamily("interval means need a one-unit groupoid")
    a = g.arrow_index(generator)
    powers, current = [], g.unit_arrow(0)
    for _ in range(length):
        if current in powers:
            break
        powers.append(current)
        current = g.compose(current, a)
    return means_from_sets(g, {g.units[0]: [g.arrow_label(p) for p in powers]}, index)


# ---------------------------------------------------------------------------
# Display
# ---------------------------------------------------------------------------

def format_groupoid_summary(g: FiniteGroupoid) -> str:
    info = g.summary()
    lines = [
        "\n" + "=" * 60,
        f"🔷 GROUPOID: {info['name']}",
        "=" * 60,
        f"   Units:            {info['units']}",
        f"   Arrows:           {info['arrows']}",
        f"   Composable pairs: {info['composable_pairs']}",
        f"   Orbits:           {info['orbits']}",
        f"   Largest fibre:    {info['max_fibre']}",
    ]
    return "\n".join(lines)


def format_violations(violations: Sequence[AxiomViolation]) -> str:
    lines = [f"❌ {len(violations)} axiom violation(s):"]
    for v in violations:
        lines.append(f"   • {v}")
    return "\n".join(lines)


def format_mean_defect(report: MeanDefectReport) -> str:
    lines = ["\n📉 Approximate invariant mean defects", "-" * 60]
    for r in report.rows:
        lines.append(f"   n={r.index:<4} d1={r.d1:.3e}  d2={r.d2:.3e}  (worst arrow: {r.worst_arrow})")
    lines.append("   ℹ️  Defects are reported only; amenability is an asymptotic property.")
    return "\n".join(lines)
