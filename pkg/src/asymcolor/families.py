"""Membership machinery for the obstruction families, plus the coloring
searcher that doubles as the brute-force oracle.

Vocabulary used throughout (each mirrors one family from the underlying
theory, renamed for what it checks):

- an "anchored" copy is a copy L of h2 such that every edge e of L is the
  exact edge-intersection E(L) cap E(R) = {e} for some copy R of h1;
- a graph is "pinned" when every edge is such an exact intersection for some
  (L, R) pair, and "anchored" when every edge lies on an anchored copy
  (anchored implies pinned);
- a "blocker" is a 2-connected graph of max density at most m2_pair + epsilon
  that is anchored (strict case) or pinned (equal case);
- a blocker decomposition splits a host into maximal blocker-subgraphs and
  classifies copies of h1/h2 as trivial (inside one member) or not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .density import PairSpec, m_density
from .graphs import (
    Copy,
    CopySet,
    Edge,
    Graph,
    canonical_key,
    enumerate_copies,
    extract_from_edges,
    graphs_up_to,
    is_two_connected,
    norm_edge,
)

RED = "red"
BLUE = "blue"

DEFAULT_ORACLE_BUDGET = 2_000_000


@dataclass
class Coloring:
    """A partial or total red/blue edge coloring; missing edges are uncolored."""

    graph: Graph
    assignment: dict[Edge, str] = field(default_factory=dict)

    def __post_init__(self):
        eset = self.graph.edge_set()
        for e, c in self.assignment.items():
            if e not in eset:
                raise ValueError(f"assignment colors {e}, which is not an edge")
            if c not in (RED, BLUE):
                raise ValueError(f"bad color {c!r} for edge {e}")

    def color_of(self, e: Edge) -> str:
        return self.assignment.get(norm_edge(*e), "uncolored")

    def is_total(self) -> bool:
        return len(self.assignment) == self.graph.edge_count

    def uncolored_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.graph.edges if e not in self.assignment)


@dataclass(frozen=True)
class ColoringCheck:
    ok: bool
    kind: str | None = None  # "uncolored" | "red_h1" | "blue_h2"
    edges: tuple[Edge, ...] = ()


def verify_coloring(coloring: Coloring, pair: PairSpec) -> ColoringCheck:
    """Independent validity check by copy enumeration.

    Reports, in order: uncolored edges, then an all-red copy of h1, then an
    all-blue copy of h2. Returns the first failure only.
    """
    missing = coloring.uncolored_edges()
    if missing:
        return ColoringCheck(False, "uncolored", missing)
    a = coloring.assignment
    for c in enumerate_copies(coloring.graph, pair.h1).copies:
        if all(a[e] == RED for e in c.edges):
            return ColoringCheck(False, "red_h1", tuple(sorted(c.edges)))
    for c in enumerate_copies(coloring.graph, pair.h2).copies:
        if all(a[e] == BLUE for e in c.edges):
            return ColoringCheck(False, "blue_h2", tuple(sorted(c.edges)))
    return ColoringCheck(True)


# ---------------------------------------------------------------------------
# the searcher / oracle

SearchStatus = Literal["valid", "invalid", "budget_exceeded"]


@dataclass(frozen=True)
class ColoringSearch:
    status: SearchStatus
    coloring: Coloring | None
    nodes_expanded: int


class _BudgetHit(Exception):
    pass


def has_valid_coloring(g: Graph, pair: PairSpec, budget: int = DEFAULT_ORACLE_BUDGET) -> ColoringSearch:
    """Backtracking search for a total coloring with no red h1 and no blue h2.

    Propagation: a copy of h1 with all but one edge red forces its last edge
    blue, and dually for h2. Branching picks an edge in the tightest live
    copy. "invalid" is returned only after the search space is exhausted;
    hitting the node budget is reported as its own outcome and must not be
    read as either verdict.
    """
    edges = g.edges
    n_e = len(edges)
    idx = {e: i for i, e in enumerate(edges)}
    h1_sets = [
        tuple(sorted(idx[e] for e in c.edges))
        for c in (enumerate_copies(g, pair.h1).copies if pair.h1.edge_count and n_e else ())
    ]
    h2_sets = [
        tuple(sorted(idx[e] for e in c.edges))
        for c in (enumerate_copies(g, pair.h2).copies if pair.h2.edge_count and n_e else ())
    ]
    edge_h1: list[list[int]] = [[] for _ in range(n_e)]
    edge_h2: list[list[int]] = [[] for _ in range(n_e)]
    for ci, cs in enumerate(h1_sets):
        for e in cs:
            edge_h1[e].append(ci)
    for ci, cs in enumerate(h2_sets):
        for e in cs:
            edge_h2[e].append(ci)

    color: list[str | None] = [None] * n_e
    un1 = [len(c) for c in h1_sets]
    un2 = [len(c) for c in h2_sets]
    mono1 = [0] * len(h1_sets)  # red counts
    mono2 = [0] * len(h2_sets)  # blue counts
    nodes = 0

    def assign(e0: int, c0: str, trail: list[int]) -> bool:
        queue = [(e0, c0)]
        while queue:
            e, c = queue.pop()
            if color[e] is not None:
                if color[e] == c:
                    continue
                return False
            color[e] = c
            trail.append(e)
            # update every counter before any conflict return, so undo (which
            # reverses complete updates) stays in sync
            for ci in edge_h1[e]:
                un1[ci] -= 1
                if c == RED:
                    mono1[ci] += 1
            for ci in edge_h2[e]:
                un2[ci] -= 1
                if c == BLUE:
                    mono2[ci] += 1
            if c == RED:
                for ci in edge_h1[e]:
                    k = len(h1_sets[ci])
                    if mono1[ci] == k:
                        return False
                    if un1[ci] == 1 and mono1[ci] == k - 1:
                        f = next(x for x in h1_sets[ci] if color[x] is None)
                        queue.append((f, BLUE))
            else:
                for ci in edge_h2[e]:
                    k = len(h2_sets[ci])
                    if mono2[ci] == k:
                        return False
                    if un2[ci] == 1 and mono2[ci] == k - 1:
                        f = next(x for x in h2_sets[ci] if color[x] is None)
                        queue.append((f, RED))
        return True

    def undo(trail: list[int]):
        for e in reversed(trail):
            c = color[e]
            for ci in edge_h1[e]:
                un1[ci] += 1
                if c == RED:
                    mono1[ci] -= 1
            for ci in edge_h2[e]:
                un2[ci] += 1
                if c == BLUE:
                    mono2[ci] -= 1
            color[e] = None

    def pick() -> int | None:
        best, best_score = None, None
        for e in range(n_e):
            if color[e] is not None:
                continue
            score = n_e + 1
            for ci in edge_h1[e]:
                if mono1[ci] == len(h1_sets[ci]) - un1[ci]:  # all assigned are red
                    score = min(score, un1[ci])
            for ci in edge_h2[e]:
                if mono2[ci] == len(h2_sets[ci]) - un2[ci]:
                    score = min(score, un2[ci])
            if best_score is None or score < best_score:
                best, best_score = e, score
        return best

    def search() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _BudgetHit
        e = pick()
        if e is None:
            return True
        for c in (RED, BLUE):
            trail: list[int] = []
            if assign(e, c, trail):
                if search():
                    return True
            undo(trail)
        return False

    try:
        found = search()
    except _BudgetHit:
        return ColoringSearch("budget_exceeded", None, nodes)
    if not found:
        return ColoringSearch("invalid", None, nodes)
    out = Coloring(g, {edges[i]: color[i] for i in range(n_e) if color[i] is not None})
    # the searcher never leaves an edge both unforced and unbranched
    assert out.is_total()
    return ColoringSearch("valid", out, nodes)


# ---------------------------------------------------------------------------
# family membership


@dataclass(frozen=True)
class FamilyReport:
    graph: Graph
    pinned: bool
    anchored: bool
    anchored_copies: CopySet
    pinned_failures: tuple[Edge, ...]
    anchored_failures: tuple[Edge, ...]
    anchor_of: dict[Edge, Copy]


def anchored_copies(g: Graph, pair: PairSpec) -> CopySet:
    """Copies L of h2 whose every edge e satisfies E(L) & E(R) == {e} for
    some copy R of h1."""
    h2_copies = enumerate_copies(g, pair.h2)
    h1_by_edge = enumerate_copies(g, pair.h1).by_edge()
    good = []
    for L in h2_copies.copies:
        if all(
            any(L.edges & R.edges == {e} for R in h1_by_edge.get(e, ()))
            for e in L.edges
        ):
            good.append(L)
    return CopySet(pair.h2, tuple(good))


def family_report(g: Graph, pair: PairSpec) -> FamilyReport:
    """Pinned/anchored verdicts with per-edge failure witnesses."""
    h1_by_edge = enumerate_copies(g, pair.h1).by_edge()
    h2_by_edge = enumerate_copies(g, pair.h2).by_edge()
    anchored_set = anchored_copies(g, pair)
    anchored_by_edge = anchored_set.by_edge()

    pinned_failures = []
    for e in g.edges:
        pinned_here = any(
            L.edges & R.edges == {e}
            for L in h2_by_edge.get(e, ())
            for R in h1_by_edge.get(e, ())
        )
        if not pinned_here:
            pinned_failures.append(e)

    anchor_of: dict[Edge, Copy] = {}
    anchored_failures = []
    for e in g.edges:
        hosts = anchored_by_edge.get(e)
        if hosts:
            anchor_of[e] = min(hosts, key=Copy.sort_key)
        else:
            anchored_failures.append(e)

    pinned = not pinned_failures
    anchored = not anchored_failures
    assert not anchored or pinned  # anchored membership implies pinned
    return FamilyReport(
        g, pinned, anchored, anchored_set, tuple(pinned_failures), tuple(anchored_failures), anchor_of
    )


def is_blocker(a: Graph, pair: PairSpec) -> bool:
    """Case-dependent blocker test: 2-connected, m below the density cap,
    anchored (strict case) or pinned (equal case)."""
    if not is_two_connected(a):
        return False
    m, _ = m_density(a)
    if m > pair.m2_pair + pair.epsilon:
        return False
    report = family_report(a, pair)
    return report.anchored if pair.case == "strict" else report.pinned


@dataclass(frozen=True)
class BlockerEntry:
    graph: Graph
    search: ColoringSearch


@dataclass(frozen=True)
class BlockerCatalog:
    """Blockers up to a vertex bound. Complete only below the bound: the
    underlying finiteness is conjectural, so the bound is part of the result."""

    pair: PairSpec
    max_vertices: int
    entries: tuple[BlockerEntry, ...]

    @property
    def members(self) -> tuple[Graph, ...]:
        return tuple(e.graph for e in self.entries)


def enumerate_blockers(
    pair: PairSpec, max_vertices: int, coloring_budget: int = DEFAULT_ORACLE_BUDGET
) -> BlockerCatalog:
    """All blockers up to max_vertices vertices, up to isomorphism, each with
    its coloring-search verdict.

    Generation prunes by the density cap (m(g) <= m2_pair + epsilon survives
    vertex deletion, so the prune never loses a future blocker).
    """
    cap = pair.m2_pair + pair.epsilon

    def keep(g: Graph) -> bool:
        return m_density(g)[0] <= cap

    entries = []
    for g in graphs_up_to(max_vertices, keep=keep):
        if is_blocker(g, pair):
            entries.append(BlockerEntry(g, has_valid_coloring(g, pair, coloring_budget)))
    return BlockerCatalog(pair, max_vertices, tuple(entries))


# ---------------------------------------------------------------------------
# host decomposition into blocker members


@dataclass(frozen=True)
class PatternCopy:
    kind: str  # "h1" | "h2"
    copy: Copy


@dataclass(frozen=True)
class BlockerDecomposition:
    graph: Graph
    members: tuple[Copy, ...]
    per_edge_count: dict[Edge, int]
    nontrivial_copies: tuple[PatternCopy, ...]

    @property
    def covered_once(self) -> bool:
        """Every edge in exactly one member (the decomposition is clean)."""
        return all(c == 1 for c in self.per_edge_count.values())

    @property
    def sparse(self) -> bool:
        """No copy of h1 or h2 straddles two members."""
        return not self.nontrivial_copies


def blocker_decomposition(
    g: Graph, pair: PairSpec, blockers: Sequence[Graph]
) -> BlockerDecomposition:
    """Maximal blocker-subgraphs of g, per-edge coverage, straddling copies."""
    pool: dict[frozenset[Edge], Copy] = {}
    for pattern in blockers:
        for c in enumerate_copies(g, pattern).copies:
            pool.setdefault(c.edges, c)
    maximal: list[Copy] = []
    for c in sorted(pool.values(), key=lambda c: (-len(c.edges), c.sort_key())):
        if not any(c.edges < kept.edges for kept in maximal):
            maximal.append(c)
    members = tuple(sorted(maximal, key=Copy.sort_key))

    per_edge_count = {e: 0 for e in g.edges}
    touching: dict[Edge, list[int]] = {e: [] for e in g.edges}
    for mi, mem in enumerate(members):
        for e in mem.edges:
            per_edge_count[e] += 1
            touching[e].append(mi)

    nontrivial: list[PatternCopy] = []
    seen_edge_sets: set[frozenset[Edge]] = set()
    for kind, pattern in (("h1", pair.h1), ("h2", pair.h2)):
        for c in enumerate_copies(g, pattern).copies:
            if c.edges in seen_edge_sets:
                continue
            touched = {mi for e in c.edges for mi in touching[e]}
            if len(touched) >= 2:
                seen_edge_sets.add(c.edges)
                nontrivial.append(PatternCopy(kind, c))
    nontrivial.sort(key=lambda pc: (pc.kind, pc.copy.sort_key()))
    return BlockerDecomposition(g, members, per_edge_count, tuple(nontrivial))


@dataclass(frozen=True)
class MemberColoringResult:
    """Outcome of coloring a host member by member.

    A member with no valid coloring is not an internal error: it refutes the
    emptiness premise for this pair/epsilon and is reported as a finding.
    """

    ok: bool
    coloring: Coloring | None
    finding: str | None
    failed_member: Copy | None
    decomposition: BlockerDecomposition


def color_by_members(
    g: Graph,
    pair: PairSpec,
    blockers: Sequence[Graph],
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> MemberColoringResult:
    """Color each maximal blocker member locally and take the union.

    Precondition (checked): g decomposes cleanly (every edge in exactly one
    member) with no straddling h1/h2 copies. Local validity then composes.
    """
    decomp = blocker_decomposition(g, pair, blockers)
    if not (decomp.covered_once and decomp.sparse):
        raise ValueError("host is not a cleanly-covered sparse union of blocker members")
    assignment: dict[Edge, str] = {}
    for mem in decomp.members:
        sub, index = extract_from_edges(mem.edges)
        back = {v: k for k, v in index.items()}
        res = has_valid_coloring(sub, pair, budget)
        if res.status != "valid":
            finding = (
                "blocker member admits no valid coloring; the emptiness premise "
                "fails for this pair and epsilon"
                if res.status == "invalid"
                else "coloring search for a blocker member exceeded its budget"
            )
            return MemberColoringResult(False, None, finding, mem, decomp)
        assert res.coloring is not None
        for (u, v), c in res.coloring.assignment.items():
            assignment[norm_edge(back[u], back[v])] = c
    return MemberColoringResult(True, Coloring(g, assignment), None, None, decomp)
