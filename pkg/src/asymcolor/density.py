"""Exact rational density measures and the pair bookkeeping built on them.

Everything here returns Fraction; there are no tolerances in core math.
The maximization routines iterate over vertex subsets and take all induced
edges, which is sound because adding an edge at a fixed vertex set never
lowers any of the measures involved. Witnesses are therefore induced.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal

from .graphs import Graph, adjacency_masks, canonical_key, induced_subgraph

DEFAULT_EPSILON = Fraction(1, 100)

# subset maximization is exponential in vertex count; everything in this
# package that needs these measures lives well below this line
_SUBSET_LIMIT = 20

BalanceMode = Literal["balanced", "strictly_balanced", "two_balanced", "strictly_two_balanced"]
PairCase = Literal["strict", "equal"]


@dataclass(frozen=True)
class Witness:
    """A maximizing induced subgraph: original vertices plus the extraction."""

    vertices: tuple[int, ...]
    subgraph: Graph


@dataclass(frozen=True)
class DensityProfile:
    graph: Graph
    d: Fraction
    m: Fraction
    d2: Fraction
    m2: Fraction
    witness_m: Witness
    witness_m2: Witness


@dataclass(frozen=True)
class PairHypotheses:
    """Which optional hypotheses of the underlying conjecture the pair meets.

    These are recorded, not enforced: a pair failing them still gets a spec
    (the colorer and the growth procedures run fine), but certification logic
    downstream reads these flags.
    """

    distinct: bool
    h2_strictly_two_balanced: bool
    h1_case_balance: bool  # strict case: strictly balanced w.r.t. d2(.,h2); equal case: strictly 2-balanced

    @property
    def balance_ok(self) -> bool:
        return self.h2_strictly_two_balanced and self.h1_case_balance


@dataclass(frozen=True)
class PairSpec:
    h1: Graph
    h2: Graph
    epsilon: Fraction
    m2_h1: Fraction
    m2_h2: Fraction
    m2_pair: Fraction
    gamma: Fraction
    case: PairCase
    hypotheses: PairHypotheses


def d_density(g: Graph) -> Fraction:
    """Edges over vertices; 0 for the graph with no vertices."""
    if g.vertex_count == 0:
        return Fraction(0)
    return Fraction(g.edge_count, g.vertex_count)


def d2_density(g: Graph) -> Fraction:
    """(e-1)/(v-2) for non-empty graphs on >= 3 vertices, 1/2 for K2, else 0."""
    if g.vertex_count >= 3 and g.edge_count >= 1:
        return Fraction(g.edge_count - 1, g.vertex_count - 2)
    if g.vertex_count == 2 and g.edge_count == 1:
        return Fraction(1, 2)
    return Fraction(0)


def _pointwise(vertex_count: int, edge_count: int, measure: str) -> Fraction:
    if measure == "d":
        return Fraction(edge_count, vertex_count) if vertex_count else Fraction(0)
    if vertex_count >= 3 and edge_count >= 1:
        return Fraction(edge_count - 1, vertex_count - 2)
    if vertex_count == 2 and edge_count == 1:
        return Fraction(1, 2)
    return Fraction(0)


def _iter_induced(g: Graph):
    """Yield (vertex tuple, induced edge count) for every vertex subset."""
    if g.vertex_count > _SUBSET_LIMIT:
        raise ValueError(
            f"subset maximization limited to {_SUBSET_LIMIT} vertices, got {g.vertex_count}"
        )
    masks = adjacency_masks(g)
    for sub in range(1 << g.vertex_count):
        verts = [v for v in range(g.vertex_count) if (sub >> v) & 1]
        edges = sum((masks[v] & sub).bit_count() for v in verts) // 2
        yield tuple(verts), edges


def _maximize(g: Graph, value: Callable[[int, int], Fraction]) -> tuple[Fraction, Witness]:
    best: Fraction | None = None
    best_verts: tuple[int, ...] = ()
    for verts, edges in _iter_induced(g):
        val = value(len(verts), edges)
        if best is None or val > best or (val == best and (len(verts), verts) < (len(best_verts), best_verts)):
            best = val
            best_verts = verts
    assert best is not None
    sub, _ = induced_subgraph(g, best_verts)
    return best, Witness(best_verts, sub)


def m_density(g: Graph) -> tuple[Fraction, Witness]:
    """max d(J) over subgraphs J, with a least maximizing induced witness."""
    return _maximize(g, lambda v, e: _pointwise(v, e, "d"))


def m2_density(g: Graph) -> tuple[Fraction, Witness]:
    """max d2(J) over subgraphs J, with a least maximizing induced witness."""
    return _maximize(g, lambda v, e: _pointwise(v, e, "d2"))


def d2_asym(g1: Graph, h2: Graph) -> Fraction:
    """e1 / (v1 - 2 + 1/m2(h2)), or 0 when h2 is empty or v1 < 2."""
    if h2.edge_count == 0 or g1.vertex_count < 2:
        return Fraction(0)
    m2_h2, _ = m2_density(h2)
    return Fraction(g1.edge_count) / (g1.vertex_count - 2 + 1 / m2_h2)


def m2_asym(h1: Graph, h2: Graph) -> tuple[Fraction, Witness]:
    """max of d2_asym(J, h2) over J contained in h1, with a least witness."""
    if h2.edge_count == 0:
        sub, _ = induced_subgraph(h1, ())
        return Fraction(0), Witness((), sub)
    m2_h2, _ = m2_density(h2)
    inv = 1 / m2_h2

    def value(v: int, e: int) -> Fraction:
        if v < 2:
            return Fraction(0)
        return Fraction(e) / (v - 2 + inv)

    return _maximize(h1, value)


def density_profile(g: Graph) -> DensityProfile:
    m, wm = m_density(g)
    m2, wm2 = m2_density(g)
    return DensityProfile(g, d_density(g), m, d2_density(g), m2, wm, wm2)


# ---------------------------------------------------------------------------
# balancedness


def _balanced_against(g: Graph, value: Callable[[int, int], Fraction], strict: bool) -> bool:
    # Proper subgraphs on the full vertex set have fewer edges and all the
    # measures here are strictly edge-monotone wherever they are nonzero, so
    # only proper vertex subsets (taken induced) can violate or tie.
    whole = value(g.vertex_count, g.edge_count)
    for verts, edges in _iter_induced(g):
        if len(verts) == g.vertex_count:
            continue
        val = value(len(verts), edges)
        if val > whole or (strict and val == whole):
            return False
    return True


def balancedness(g: Graph, mode: BalanceMode) -> bool:
    """Whether every proper subgraph sits (strictly) below g in d or d2."""
    measure = "d" if mode in ("balanced", "strictly_balanced") else "d2"
    strict = mode.startswith("strictly")
    return _balanced_against(g, lambda v, e: _pointwise(v, e, measure), strict)


def asym_balancedness(h1: Graph, h2: Graph, strict: bool) -> bool:
    """Balancedness of h1 measured by d2_asym(., h2)."""
    if h2.edge_count == 0:
        return not strict  # measure identically 0: balanced, never strictly
    m2_h2, _ = m2_density(h2)
    inv = 1 / m2_h2

    def value(v: int, e: int) -> Fraction:
        if v < 2:
            return Fraction(0)
        return Fraction(e) / (v - 2 + inv)

    return _balanced_against(h1, value, strict)


# ---------------------------------------------------------------------------
# pairs


def build_pair_spec(h1: Graph, h2: Graph, epsilon: Fraction = DEFAULT_EPSILON) -> PairSpec:
    """Cache every pair-level quantity and record which hypotheses hold.

    Rejects pairs violating the hard preconditions (non-empty, m2 ordering,
    m2(h2) > 1, epsilon > 0) naming the violated hypothesis. The balance
    hypotheses and distinctness are recorded in .hypotheses, not enforced.
    """
    epsilon = Fraction(epsilon)
    if h1.edge_count == 0:
        raise ValueError("h1 must be non-empty (have at least one edge)")
    if h2.edge_count == 0:
        raise ValueError("h2 must be non-empty (have at least one edge)")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m2_h1, _ = m2_density(h1)
    m2_h2, _ = m2_density(h2)
    if m2_h2 <= 1:
        raise ValueError(f"m2(h2) = {m2_h2} <= 1; the pair needs m2(h2) > 1")
    if m2_h1 < m2_h2:
        raise ValueError(
            f"m2(h1) = {m2_h1} < m2(h2) = {m2_h2}; order the pair so m2(h1) >= m2(h2)"
        )
    m2_pair, _ = m2_asym(h1, h2)
    case: PairCase = "strict" if m2_h1 > m2_h2 else "equal"
    gamma = 1 / m2_pair - 1 / (m2_pair + epsilon)
    assert gamma > 0
    assert m2_h1 >= m2_pair >= m2_h2

    if case == "strict":
        h1_case_balance = asym_balancedness(h1, h2, strict=True)
    else:
        h1_case_balance = balancedness(h1, "strictly_two_balanced")
    hypotheses = PairHypotheses(
        distinct=canonical_key(h1) != canonical_key(h2),
        h2_strictly_two_balanced=balancedness(h2, "strictly_two_balanced"),
        h1_case_balance=h1_case_balance,
    )
    return PairSpec(h1, h2, epsilon, m2_h1, m2_h2, m2_pair, gamma, case, hypotheses)


def density_slack(f: Graph, pair: PairSpec) -> Fraction:
    """v(F) - e(F)/m2_pair: the budget every growth step is audited against."""
    return Fraction(f.vertex_count) - Fraction(f.edge_count) / pair.m2_pair
