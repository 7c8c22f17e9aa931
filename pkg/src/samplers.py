"""
Seeded random instances for property tests and the acceptance runner.

Every sampler takes a numpy Generator so runs are reproducible.
"""

import logging
from typing import List, Tuple

import numpy as np

from .band_z import BandOperatorZ, EventuallyConstant, LaurentSymbol
from .convolution_algebra import AlgebraElement
from .errors import LimitLabError
from .fibre_symbol import BoundaryDecomposition
from .groupoid_core import (
    ActionSpec,
    FiniteGroupoid,
    GroupSpec,
    cyclic_group,
    direct_product,
    disjoint_union,
    group_groupoid,
    orbits,
    pair_groupoid,
    symmetric_group,
    transformation_groupoid,
)

logger = logging.getLogger(__name__)


def small_groups(max_order: int = 6) -> List[GroupSpec]:
    groups = [cyclic_group(n) for n in range(1, max_order + 1)]
    if max_order >= 4:
        groups.append(direct_product(cyclic_group(2), cyclic_group(2)))
    if max_order >= 6:
        groups.append(symmetric_group(3))
    return groups


def _cyclic_subgroup(G: GroupSpec, h: int) -> List[int]:
    members, current = [], G.identity
    while current not in members:
        members.append(current)
        current = G.mult(current, h)
    return sorted(members)


def _left_cosets(G: GroupSpec, H: List[int]) -> List[Tuple[int, ...]]:
    cosets: List[Tuple[int, ...]] = []
    for g in range(G.order):
        coset = tuple(sorted(G.mult(g, h) for h in H))
        if coset not in cosets:
            cosets.append(coset)
    return cosets


def random_action(rng: np.random.Generator, max_group: int = 6, max_points: int = 6) -> ActionSpec:
    """A disjoint union of coset actions G on G/<h>, with shuffled point labels"""
    groups = small_groups(max_group)
    G = groups[int(rng.integers(len(groups)))]
    blocks: List[List[Tuple[int, ...]]] = []
    total = 0
    while True:
        orbit = _left_cosets(G, _cyclic_subgroup(G, int(rng.integers(G.order))))
        if total + len(orbit) > max_points:
            if blocks:
                break
            orbit = [tuple(range(G.order))]  # G/G, a fixed point
        blocks.append(orbit)
        total += len(orbit)
        if total >= max_points or rng.random() < 0.4:
            break

    index = {}
    for b, block in enumerate(blocks):
        for c in block:
            index[(b, c)] = len(index)
    perms = []
    for g in range(G.order):
        perm = [0] * total
        for b, block in enumerate(blocks):
            for c in block:
                perm[index[(b, c)]] = index[(b, tuple(sorted(G.mult(g, x) for x in c)))]
        perms.append(tuple(perm))
    labels = [int(v) for v in rng.permutation(total) + 1]
    return ActionSpec(G, tuple(labels), tuple(perms), "random")


def random_groupoid(rng: np.random.Generator, max_arrows: int = 40) -> FiniteGroupoid:
    """Pair groupoids, groups, transformation groupoids and unions of those, within max_arrows"""
    if max_arrows < 1:
        raise LimitLabError(f"a groupoid needs at least one arrow, max_arrows={max_arrows}")
    for _ in range(100):
        choice = int(rng.integers(4 if max_arrows >= 2 else 3))
        if choice == 0:
            g = pair_groupoid(int(rng.integers(1, 6)))
        elif choice == 1:
            groups = small_groups(6)
            g = group_groupoid(groups[int(rng.integers(len(groups)))])
        elif choice == 2:
            g = transformation_groupoid(random_action(rng, 6, 6))
        else:
            left = int(rng.integers(1, max_arrows))
            g = disjoint_union(random_groupoid(rng, left), random_groupoid(rng, max_arrows - left))
        if g.n_arrows <= max_arrows:
            return g
    return pair_groupoid(int(np.sqrt(max_arrows)))


def random_element(rng: np.random.Generator, g: FiniteGroupoid, integer: bool = False,
                   density: float = 0.7) -> AlgebraElement:
    mask = rng.random(g.n_arrows) < density
    if integer:
        values = rng.integers(-3, 4, g.n_arrows) + 1j * rng.integers(-3, 4, g.n_arrows)
    else:
        values = rng.standard_normal(g.n_arrows) + 1j * rng.standard_normal(g.n_arrows)
    return AlgebraElement(g, np.where(mask, values, 0))


def singular_unitized_element(rng: np.random.Generator, g: FiniteGroupoid, integer: bool = False,
                              density: float = 0.4) -> AlgebraElement:
    """
    a with 1 + a singular: on one orbit a = -(1/k) sum of its arrows, k the
    fibre size there, so each lambda_x(1 + a) is I - J/k on that orbit.
    Elsewhere a is random.
    """
    parts = orbits(g)
    orbit = {g.unit_index(u) for u in parts[int(rng.integers(len(parts)))]}
    k = len(g.fibre(next(iter(orbit))))
    coeffs = np.array(random_element(rng, g, integer, density).coeffs)
    coeffs[[a.id for a in g.arrows if a.source in orbit]] = -1.0 / k
    return AlgebraElement(g, coeffs)


def random_boundary(rng: np.random.Generator, g: FiniteGroupoid) -> BoundaryDecomposition:
    """A union of randomly chosen orbits as the boundary (proper when possible)"""
    parts = orbits(g)
    if len(parts) == 1:
        chosen = parts if rng.random() < 0.5 else []
    else:
        k = int(rng.integers(1, len(parts)))
        picks = rng.choice(len(parts), size=k, replace=False)
        chosen = [parts[int(i)] for i in picks]
    return BoundaryDecomposition.from_boundary(g, [u for orbit in chosen for u in orbit])


def main_theorem_instance(rng: np.random.Generator, singular: bool = False,
                          max_arrows: int = 40) -> Tuple[AlgebraElement, BoundaryDecomposition]:
    """
    A (element, boundary) pair over a union of at least two blocks. With
    singular=True one boundary orbit gets a singular fibre: its coefficients
    are zeroed or replaced by an all-ones block.
    """
    g = disjoint_union(random_groupoid(rng, max_arrows // 2), random_groupoid(rng, max_arrows // 2))
    d = random_boundary(rng, g)
    while d.degenerate:
        d = random_boundary(rng, g)
    f = random_element(rng, g, density=0.8)
    coeffs = np.array(f.coeffs)
    # a unit shift keeps random fibres comfortably invertible
    coeffs[list(g.unit_arrows)] += 4.0
    if singular:
        orbit = [g.unit_index(u) for u in orbits(d.boundary_groupoid)[0]]
        arrows = [a.id for a in g.arrows if a.source in orbit]
        if len(g.fibre(orbit[0])) > 1 and rng.random() < 0.5:
            coeffs[arrows] = 1.0
        else:
            coeffs[arrows] = 0.0
    return AlgebraElement(g, coeffs), d


def random_nonvanishing_symbol(rng: np.random.Generator, max_degree: int = 3) -> Tuple[LaurentSymbol, int]:
    """
    c z^k prod (z - a_i) with |a_i| in [0.2, 0.5] or [2, 4], exponents inside
    [-max_degree, max_degree]. Returns the symbol and its winding number.
    """
    d = int(rng.integers(0, max_degree + 1))
    k = int(rng.integers(-max_degree, max_degree - d + 1))
    poly = np.array([1.0 + 0j])
    inside = 0
    for _ in range(d):
        small = rng.random() < 0.5
        radius = rng.uniform(0.2, 0.5) if small else rng.uniform(2.0, 4.0)
        inside += int(small)
        root = radius * np.exp(2j * np.pi * rng.random())
        poly = np.convolve(poly, np.array([-root, 1.0]))
    c = (0.5 + rng.random()) * np.exp(2j * np.pi * rng.random())
    coeffs = {k + j: c * poly[j] for j in range(len(poly))}
    return LaurentSymbol.from_coeffs(coeffs), k + inside


def random_two_sided_operator(rng: np.random.Generator, max_width: int = 3,
                              noise: float = 0.1) -> Tuple[BandOperatorZ, LaurentSymbol, LaurentSymbol]:
    """Eventually-constant band operator with random nonvanishing limit symbols and window noise"""
    left, _ = random_nonvanishing_symbol(rng, max_width)
    right, _ = random_nonvanishing_symbol(rng, max_width)
    window = int(rng.integers(0, 6))
    left_c, right_c = dict(left.coeffs), dict(right.coeffs)
    diagonals = []
    for m in sorted(set(left_c) | set(right_c)):
        sites = np.arange(-window, window + 1)
        table = np.where(sites < 0, left_c.get(m, 0j), right_c.get(m, 0j)).astype(np.complex128)
        table += noise * (rng.standard_normal(table.shape) + 1j * rng.standard_normal(table.shape))
        diagonals.append((m, EventuallyConstant(window, tuple(table), left_c.get(m, 0j), right_c.get(m, 0j))))
    width = max((abs(m) for m, _ in diagonals), default=0)
    return BandOperatorZ(width, tuple(diagonals), "random"), left, right
