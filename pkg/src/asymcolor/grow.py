"""Growth procedures that turn a stuck residual into a density certificate.

The colorer hands over a residual graph in which every edge is pinned by
copy-pair structure.  The procedures here grow a small witness subgraph F
inside that residual, one copy attachment at a time, while auditing the
slack lambda(F) = v(F) - e(F)/m2_pair.  Non-degenerate attachments keep the
slack constant; degenerate ones (vertex re-use) pay a fixed toll, so the
slack can only fall a bounded number of times before the density guard
fires and a subgraph of maximum edge density is extracted.

The second half of the module builds and audits flower attachments: a copy
of h2 glued to F along one edge, with a pendant h1 copy pinning each new
edge.  The edge-ordering pass groups pendant edges whose copies share
material and certifies the per-cluster overcount inequality that the
external-density bound rests on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import log
from typing import Literal, Sequence

from .density import PairSpec, density_slack
from .families import anchored_copies, blocker_decomposition
from .graphs import (
    Copy,
    CopySet,
    Edge,
    Graph,
    adjacency_sets,
    canonical_form,
    canonical_key,
    enumerate_copies,
    extract_from_edges,
    graph,
    norm_edge,
    subgraph_from_edges,
)

Variant = Literal["grow", "grow_alt"]


class GrowError(RuntimeError):
    """A growth precondition failed; carries the partial trace for debugging."""

    def __init__(self, message: str, steps: Sequence["GrowStep"] = ()):
        super().__init__(message)
        self.steps = tuple(steps)


# ---------------------------------------------------------------------------
# exact minimum slack over all subgraphs, by max-flow
#
# Minimisers of lambda are induced subgraphs without isolated vertices (an
# extra edge lowers lambda, an isolated vertex raises it), so it suffices to
# range over vertex subsets S with all induced edges.  Writing m2_pair = p/q,
#     lambda(S) = |S| - e(S) * q / p = (p*|S| - q*e(S)) / p,
# so minimising lambda is maximising gain(S) = q*e(S) - p*|S|.  That is the
# classic project-selection cut: an edge yields q but needs both endpoints,
# each vertex costs p.  max gain = q*|E| - mincut, exact in integers.


class _FlowNet:
    def __init__(self, n: int):
        self.adj: list[list[list[int]]] = [[] for _ in range(n)]

    def add(self, u: int, v: int, cap: int) -> None:
        self.adj[u].append([v, cap, len(self.adj[v])])
        self.adj[v].append([u, 0, len(self.adj[u]) - 1])

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        n = len(self.adj)
        while True:
            level = [-1] * n
            level[s] = 0
            queue = [s]
            for u in queue:
                for arc in self.adj[u]:
                    if arc[1] > 0 and level[arc[0]] < 0:
                        level[arc[0]] = level[u] + 1
                        queue.append(arc[0])
            if level[t] < 0:
                return total
            iters = [0] * n

            def push(u: int, limit: int) -> int:
                if u == t:
                    return limit
                while iters[u] < len(self.adj[u]):
                    arc = self.adj[u][iters[u]]
                    v, cap, rev = arc
                    if cap > 0 and level[v] == level[u] + 1:
                        got = push(v, min(limit, cap))
                        if got:
                            arc[1] -= got
                            self.adj[v][rev][1] += got
                            return got
                    iters[u] += 1
                return 0

            while True:
                pushed = push(s, 1 << 62)
                if not pushed:
                    break
                total += pushed


def _max_gain(f: Graph, pair: PairSpec) -> int:
    if f.edge_count == 0:
        return 0
    p = pair.m2_pair.numerator
    q = pair.m2_pair.denominator
    ecount = f.edge_count
    n = f.vertex_count
    net = _FlowNet(2 + ecount + n)
    source, sink = 0, 1 + ecount + n
    inf = q * ecount + 1
    for i, (u, v) in enumerate(f.edges):
        net.add(source, 1 + i, q)
        net.add(1 + i, 1 + ecount + u, inf)
        net.add(1 + i, 1 + ecount + v, inf)
    for v in range(n):
        net.add(1 + ecount + v, sink, p)
    return q * ecount - net.max_flow(source, sink)


def min_slack(f: Graph, pair: PairSpec) -> Fraction:
    """min over all subgraphs S of f of v(S) - e(S)/m2_pair (0 at the empty one)."""
    return Fraction(-_max_gain(f, pair), pair.m2_pair.numerator)


def _minimising_witness(f: Graph, pair: PairSpec) -> tuple[Graph, tuple[int, ...]]:
    """All gain-maximising vertex subsets, keeping the canonically least one.

    Branch and bound over vertex inclusion.  The bound drops a vertex from
    the active pool and forgets its edges; q*e(active) - p*|included| can
    only overestimate any completion, so pruning strictly below the flow
    optimum keeps every maximiser reachable.
    """
    target = _max_gain(f, pair)
    p = pair.m2_pair.numerator
    q = pair.m2_pair.denominator
    n = f.vertex_count
    adj = adjacency_sets(f)
    order = sorted(range(n), key=lambda v: (-len(adj[v]), v))
    active = [True] * n
    included: set[int] = set()
    state = {"union_edges": f.edge_count, "e_in": 0}
    best: list[tuple] = []

    def collect() -> None:
        verts = sorted(included)
        inside = [e for e in f.edges if e[0] in included and e[1] in included]
        if inside:
            sub, _ = extract_from_edges(inside)
        else:
            sub = graph(0)
        key = (canonical_key(sub), tuple(verts))
        if not best or key < best[0][0]:
            best[:] = [(key, sub, tuple(verts))]

    def rec(k: int) -> None:
        if q * state["union_edges"] - p * len(included) < target:
            return
        if k == n:
            if q * state["e_in"] - p * len(included) == target:
                collect()
            return
        v = order[k]
        gained = sum(1 for w in adj[v] if w in included)
        included.add(v)
        state["e_in"] += gained
        rec(k + 1)
        included.discard(v)
        state["e_in"] -= gained
        active[v] = False
        lost = sum(1 for w in adj[v] if active[w])
        state["union_edges"] -= lost
        rec(k + 1)
        active[v] = True
        state["union_edges"] += lost

    rec(0)
    assert best, "flow optimum not met by any subset; gain bookkeeping is broken"
    _, sub, verts = best[0]
    return sub, verts


def minimising_subgraph(f: Graph, pair: PairSpec) -> Graph:
    """The canonically least subgraph of f attaining the minimum slack."""
    return _minimising_witness(f, pair)[0]


# ---------------------------------------------------------------------------
# eligible edges and the two extension moves


def eligible_edge(f: Graph, pair: PairSpec, variant: Variant = "grow") -> Edge | None:
    """The orbit-least edge of f that the growth loop may extend at.

    grow:     an edge lying on no anchored h2-copy of f (f as a standalone
              graph).  None means every edge is so covered.
    grow_alt: an edge e such that no h2-copy L and h1-copy R of f intersect
              in exactly {e}.  None means f itself is flower-closed.

    The choice is pinned down isomorphism-invariantly: map the candidates
    through f's canonical labelling and take the least image.
    """
    if variant == "grow":
        covered: set[Edge] = set()
        for cp in anchored_copies(f, pair).copies:
            covered |= cp.edges
        pool = [e for e in f.edges if e not in covered]
    else:
        h1_by_edge = enumerate_copies(f, pair.h1).by_edge()
        pinned: set[Edge] = set()
        for cp in enumerate_copies(f, pair.h2).copies:
            for e in cp.edges:
                if e in pinned:
                    continue
                if any(cp.edges & r.edges == {e} for r in h1_by_edge.get(e, ())):
                    pinned.add(e)
        pool = [e for e in f.edges if e not in pinned]
    if not pool:
        return None
    _, mapping = canonical_form(f)
    return min(pool, key=lambda e: norm_edge(mapping[e[0]], mapping[e[1]]))


@dataclass
class _HostContext:
    host: Graph
    pair: PairSpec
    h1_copies: CopySet
    h1_by_edge: dict[Edge, list[Copy]]
    anchored: CopySet | None = None     # grow variant
    h2_copies: CopySet | None = None    # grow_alt variant


def _extend_anchored(
    f_edges: set[Edge], f_verts: set[int], e: Edge, ctx: _HostContext
) -> tuple[tuple[int, ...], tuple[tuple[Edge, tuple[int, ...]], ...]]:
    """Attach the least anchored h2-copy of the host through e, then pin each
    new edge with an h1-copy meeting that copy in exactly this edge.  Mutates
    f in place; returns the overlap geometry for degeneracy classification."""
    assert ctx.anchored is not None
    l_copy = next((cp for cp in ctx.anchored.copies if e in cp.edges), None)
    if l_copy is None:
        raise GrowError(
            f"no anchored h2-copy of the host passes through {e}; "
            "the residual is not pin-closed"
        )
    l_overlap = tuple(sorted(l_copy.vertices & f_verts))
    fresh = sorted(l_copy.edges - f_edges)
    f_edges |= l_copy.edges
    f_verts |= l_copy.vertices
    pendant_overlaps = []
    for e2 in fresh:
        r_copy = next(
            (r for r in ctx.h1_by_edge.get(e2, ()) if l_copy.edges & r.edges == {e2}),
            None,
        )
        if r_copy is None:
            raise GrowError(
                f"no h1-copy of the host meets the attached h2-copy in exactly {e2}; "
                "the residual is not pin-closed"
            )
        pendant_overlaps.append((e2, tuple(sorted(r_copy.vertices & f_verts))))
        f_edges |= r_copy.edges
        f_verts |= r_copy.vertices
    return l_overlap, tuple(pendant_overlaps)


def _extend_alt(
    f_edges: set[Edge], f_verts: set[int], e: Edge, ctx: _HostContext
) -> tuple[str, tuple[int, ...]]:
    """Attach one side of the least (h2-copy, h1-copy) pair meeting in exactly
    {e}: the h2 side if it is not yet inside f, otherwise the h1 side."""
    assert ctx.h2_copies is not None
    chosen_pair = None
    for l_copy in ctx.h2_copies.copies:
        if e not in l_copy.edges:
            continue
        for r_copy in ctx.h1_by_edge.get(e, ()):
            if l_copy.edges & r_copy.edges == {e}:
                chosen_pair = (l_copy, r_copy)
                break
        if chosen_pair:
            break
    if chosen_pair is None:
        raise GrowError(
            f"no copy pair of the host meets in exactly {e}; "
            "the residual is not pin-closed"
        )
    l_copy, r_copy = chosen_pair
    if not l_copy.edges <= f_edges:
        branch, attach = "l", l_copy
    else:
        branch, attach = "r", r_copy
    overlap = tuple(sorted(attach.vertices & f_verts))
    f_edges |= attach.edges
    f_verts |= attach.vertices
    return branch, overlap


def extend_anchored(f: Graph, e: Edge, host: Graph, pair: PairSpec) -> Graph:
    """One anchored-extension step as a pure graph map (f, host share labels)."""
    ctx = _HostContext(
        host,
        pair,
        h1c := enumerate_copies(host, pair.h1),
        h1c.by_edge(),
        anchored=anchored_copies(host, pair),
    )
    f_edges, f_verts = set(f.edges), {v for edge in f.edges for v in edge}
    _extend_anchored(f_edges, f_verts, norm_edge(*e), ctx)
    return subgraph_from_edges(host.vertex_count, f_edges)


def extend_alt(f: Graph, e: Edge, host: Graph, pair: PairSpec) -> Graph:
    """One copy-pair extension step as a pure graph map (f, host share labels)."""
    ctx = _HostContext(
        host,
        pair,
        h1c := enumerate_copies(host, pair.h1),
        h1c.by_edge(),
        h2_copies=enumerate_copies(host, pair.h2),
    )
    f_edges, f_verts = set(f.edges), {v for edge in f.edges for v in edge}
    _extend_alt(f_edges, f_verts, norm_edge(*e), ctx)
    return subgraph_from_edges(host.vertex_count, f_edges)


# ---------------------------------------------------------------------------
# the growth loop


@dataclass(frozen=True)
class GrowStep:
    index: int
    kind: str  # special_case_1 | special_case_2 | absorb_h1 | extend_anchored | extend_alt
    degenerate: bool
    lambda_before: Fraction
    lambda_after: Fraction
    added_vertices: int
    added_edges: int
    anchor_edge: Edge | None = None
    copy_overlap: tuple[int, ...] | None = None
    pendant_overlaps: tuple[tuple[Edge, tuple[int, ...]], ...] = ()
    alt_branch: str | None = None

    def to_dict(self) -> dict:
        return {
            "i": self.index,
            "kind": self.kind,
            "degenerate": self.degenerate,
            "lambda_before": str(self.lambda_before),
            "lambda_after": str(self.lambda_after),
            "v_added": self.added_vertices,
            "e_added": self.added_edges,
        }


@dataclass(frozen=True)
class GrowTrace:
    steps: tuple[GrowStep, ...]
    outcome: str  # hit_iteration_cap | hit_density_guard | special_case
    final: Graph
    host_edges: tuple[Edge, ...]


def classify_iteration(step: GrowStep, pair: PairSpec) -> str:
    """non_degenerate, degenerate_type_1 (whole-copy absorption),
    degenerate_type_2 (anchored extension re-used vertices) or
    degenerate_alt (copy-pair extension re-used vertices)."""
    if step.kind == "absorb_h1":
        return "degenerate_type_1"
    if step.kind == "extend_anchored":
        assert step.anchor_edge is not None and step.copy_overlap is not None
        if set(step.copy_overlap) != set(step.anchor_edge):
            return "degenerate_type_2"
        for e2, overlap in step.pendant_overlaps:
            if set(overlap) != set(e2):
                return "degenerate_type_2"
        return "non_degenerate"
    if step.kind == "extend_alt":
        assert step.anchor_edge is not None and step.copy_overlap is not None
        if set(step.copy_overlap) != set(step.anchor_edge):
            return "degenerate_alt"
        return "non_degenerate"
    return "non_degenerate"  # special-case returns do not attach anything


def _special_return(
    kind: str, union_edges: set[Edge], pair: PairSpec
) -> tuple[Graph, GrowTrace]:
    final, _ = extract_from_edges(union_edges)
    lam = density_slack(final, pair)
    step = GrowStep(
        index=0,
        kind=kind,
        degenerate=False,
        lambda_before=lam,
        lambda_after=lam,
        added_vertices=final.vertex_count,
        added_edges=final.edge_count,
    )
    trace = GrowTrace((step,), "special_case", final, tuple(sorted(union_edges)))
    return final, trace


def _grow(
    host: Graph, pair: PairSpec, blockers: Sequence[Graph], variant: Variant
) -> tuple[Graph, GrowTrace]:
    if host.edge_count == 0:
        raise GrowError("empty host has no seed edge")

    if blockers:
        decomp = blocker_decomposition(host, pair, blockers)
        members = decomp.members
    else:
        decomp, members = None, ()
    edge_members: dict[Edge, list[Copy]] = {
        e: [m for m in members if e in m.edges] for e in host.edges
    }

    if all(len(edge_members[e]) == 1 for e in host.edges):
        # every edge on exactly one catalog member: return the members a
        # straddling copy touches
        if decomp is None or not decomp.nontrivial_copies:
            raise GrowError(
                "every edge lies on exactly one catalog member but no copy of "
                "h1 or h2 straddles two members; the host is a sparse member "
                "union and should not have been grown"
            )
        straddler = decomp.nontrivial_copies[0].copy
        union: set[Edge] = set()
        for e in sorted(straddler.edges):
            for m in edge_members[e]:
                union |= m.edges
        return _special_return("special_case_1", union, pair)

    shared = next((e for e in sorted(host.edges) if len(edge_members[e]) >= 2), None)
    if shared is not None:
        m1, m2 = edge_members[shared][:2]
        return _special_return("special_case_2", set(m1.edges | m2.edges), pair)

    seed_edge = min(e for e in host.edges if not edge_members[e])
    h1_copies = enumerate_copies(host, pair.h1)
    ctx = _HostContext(host, pair, h1_copies, h1_copies.by_edge())
    if variant == "grow":
        ctx.anchored = anchored_copies(host, pair)
    else:
        ctx.h2_copies = enumerate_copies(host, pair.h2)

    seed = next((r for r in ctx.h1_by_edge.get(seed_edge, ())), None)
    if seed is None:
        raise GrowError(
            f"seed edge {seed_edge} lies on no h1-copy; the host is not copy-covered"
        )
    f_edges: set[Edge] = set(seed.edges)
    f_verts: set[int] = set(seed.vertices)

    cap = log(host.vertex_count)
    steps: list[GrowStep] = []
    i = 0
    while True:
        lam = Fraction(len(f_verts)) - Fraction(len(f_edges)) / pair.m2_pair
        extracted, index = extract_from_edges(f_edges)
        if not (i < cap and min_slack(extracted, pair) > -pair.gamma):
            break
        before_v, before_e = len(f_verts), len(f_edges)
        kwargs: dict = {}
        if variant == "grow":
            absorbed = next(
                (
                    r
                    for r in h1_copies.copies
                    if not r.edges <= f_edges and len(r.vertices & f_verts) >= 2
                ),
                None,
            )
            if absorbed is not None:
                kwargs["kind"] = "absorb_h1"
                kwargs["copy_overlap"] = tuple(sorted(absorbed.vertices & f_verts))
                f_edges |= absorbed.edges
                f_verts |= absorbed.vertices
            else:
                e = _mapped_eligible(extracted, index, pair, "grow", steps)
                l_overlap, pendants = _extend_anchored(f_edges, f_verts, e, ctx)
                kwargs = {
                    "kind": "extend_anchored",
                    "anchor_edge": e,
                    "copy_overlap": l_overlap,
                    "pendant_overlaps": pendants,
                }
        else:
            e = _mapped_eligible(extracted, index, pair, "grow_alt", steps)
            branch, overlap = _extend_alt(f_edges, f_verts, e, ctx)
            kwargs = {
                "kind": "extend_alt",
                "anchor_edge": e,
                "copy_overlap": overlap,
                "alt_branch": branch,
            }
        if len(f_edges) <= before_e:
            raise GrowError("growth step added no edge; attachment bookkeeping is broken", steps)
        lam_after = Fraction(len(f_verts)) - Fraction(len(f_edges)) / pair.m2_pair
        proto = GrowStep(
            index=i,
            degenerate=False,
            lambda_before=lam,
            lambda_after=lam_after,
            added_vertices=len(f_verts) - before_v,
            added_edges=len(f_edges) - before_e,
            **kwargs,
        )
        cls = classify_iteration(proto, pair)
        if cls != "non_degenerate":
            proto = GrowStep(**{**proto.__dict__, "degenerate": True})
        steps.append(proto)
        i += 1

    if i >= cap:
        final, _ = extract_from_edges(f_edges)
        host_edges = tuple(sorted(f_edges))
        outcome = "hit_iteration_cap"
    else:
        extracted, index = extract_from_edges(f_edges)
        back = {c: o for o, c in index.items()}
        final, verts = _minimising_witness(extracted, pair)
        chosen = {back[c] for c in verts}
        host_edges = tuple(
            sorted(e for e in f_edges if e[0] in chosen and e[1] in chosen)
        )
        outcome = "hit_density_guard"
    return final, GrowTrace(tuple(steps), outcome, final, host_edges)


def _mapped_eligible(
    extracted: Graph,
    index: dict[int, int],
    pair: PairSpec,
    variant: Variant,
    steps: Sequence[GrowStep],
) -> Edge:
    e = eligible_edge(extracted, pair, variant)
    if e is None:
        raise GrowError(
            "no eligible edge: the current subgraph is itself pin-closed, so "
            "growing further is impossible; with the true catalog this graph "
            "would have been a member return",
            steps,
        )
    back = {c: o for o, c in index.items()}
    return norm_edge(back[e[0]], back[e[1]])


def grow(
    host: Graph, pair: PairSpec, blockers: Sequence[Graph] = ()
) -> tuple[Graph, GrowTrace]:
    """Grow a witness in a residual where every edge rides an anchored h2-copy."""
    return _grow(host, pair, blockers, "grow")


def grow_alt(
    host: Graph, pair: PairSpec, blockers: Sequence[Graph] = ()
) -> tuple[Graph, GrowTrace]:
    """Growth variant for the equal-density case: extend by one side of a
    copy pair instead of a whole anchored bundle."""
    return _grow(host, pair, blockers, "grow_alt")


# ---------------------------------------------------------------------------
# flower attachments and the external-density audit


class FlowerError(ValueError):
    pass


@dataclass(frozen=True)
class FlowerAttachment:
    """A copy of h2 glued to a base graph along one edge, with a pendant
    h1-copy pinning each remaining edge of that copy.

    The base occupies labels 0..base.vertex_count-1; attachment labels come
    after.  pendant_copies is keyed by the inner edge each pendant pins,
    sorted.  classification is "disjoint" when the pendants are pairwise
    vertex- and edge-disjoint outside their pins and avoid the inner copy's
    vertices, else "overlapping".
    """

    base: Graph
    anchor_edge: Edge
    h1: Graph
    h2: Graph
    inner_copy: Copy
    pendant_copies: tuple[tuple[Edge, Copy], ...]
    classification: str

    @property
    def inner_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.inner_copy.edges - {self.anchor_edge}))

    def outer_vertices(self, f: Edge) -> frozenset[int]:
        return dict(self.pendant_copies)[f].vertices - set(f)

    def outer_edges(self, f: Edge) -> frozenset[Edge]:
        return dict(self.pendant_copies)[f].edges - {f}

    def all_vertices(self) -> frozenset[int]:
        verts = set(range(self.base.vertex_count)) | set(self.inner_copy.vertices)
        for _, cp in self.pendant_copies:
            verts |= cp.vertices
        return frozenset(verts)

    def all_edges(self) -> frozenset[Edge]:
        edges = set(self.base.edges) | set(self.inner_copy.edges)
        for _, cp in self.pendant_copies:
            edges |= cp.edges
        return frozenset(edges)

    def union_graph(self) -> Graph:
        verts = self.all_vertices()
        return subgraph_from_edges(max(verts) + 1, self.all_edges())


def _is_copy_of(cp: Copy, pattern: Graph) -> bool:
    if len(cp.vertices) != pattern.vertex_count or len(cp.edges) != pattern.edge_count:
        return False
    sub, _ = extract_from_edges(cp.edges)
    return canonical_key(sub) == canonical_key(pattern)


def _classify_flower(
    inner: Copy, pendants: Sequence[tuple[Edge, Copy]]
) -> str:
    inner_verts = inner.vertices
    seen_u: set[int] = set()
    seen_d: set[Edge] = set()
    for f, cp in pendants:
        u = cp.vertices - set(f)
        d = cp.edges - {f}
        if u & inner_verts or u & seen_u or d & seen_d:
            return "overlapping"
        seen_u |= u
        seen_d |= d
    return "disjoint"


def make_flower(
    base: Graph,
    anchor_edge: Edge,
    pair: PairSpec,
    inner_copy: Copy,
    pendant_copies: Sequence[tuple[Edge, Copy]],
) -> FlowerAttachment:
    """Validate the attachment constraints and classify. Raises FlowerError
    naming the violated clause."""
    anchor = norm_edge(*anchor_edge)
    base_edges = base.edge_set()
    base_verts = set(range(base.vertex_count))
    if anchor not in base_edges:
        raise FlowerError("anchor edge is not an edge of the base")
    if not _is_copy_of(inner_copy, pair.h2):
        raise FlowerError("inner copy is not a copy of h2")
    if anchor not in inner_copy.edges:
        raise FlowerError("inner copy does not contain the anchor edge")
    if inner_copy.edges & base_edges != {anchor}:
        raise FlowerError("inner copy shares a non-anchor edge with the base")
    if inner_copy.vertices & base_verts != set(anchor):
        raise FlowerError("inner copy meets the base outside the anchor endpoints")
    pendants = tuple(sorted(pendant_copies, key=lambda fc: fc[0]))
    expected = set(inner_copy.edges) - {anchor}
    if {f for f, _ in pendants} != expected:
        raise FlowerError("pendants must pin exactly the non-anchor inner edges")
    glued = base_edges | inner_copy.edges
    for f, cp in pendants:
        if not _is_copy_of(cp, pair.h1):
            raise FlowerError(f"pendant at {f} is not a copy of h1")
        if f not in cp.edges:
            raise FlowerError(f"pendant at {f} does not contain its pin edge")
        if cp.edges & glued != {f}:
            raise FlowerError(f"pendant at {f} shares a second edge with the glued core")
        if cp.vertices & (base_verts - set(anchor)):
            raise FlowerError(f"pendant at {f} touches the base outside the anchor")
    return FlowerAttachment(
        base=base,
        anchor_edge=anchor,
        h1=pair.h1,
        h2=pair.h2,
        inner_copy=inner_copy,
        pendant_copies=pendants,
        classification=_classify_flower(inner_copy, pendants),
    )


def random_flower(
    base: Graph,
    anchor_edge: Edge,
    pair: PairSpec,
    rng: random.Random,
    overlap: bool = False,
    max_tries: int = 400,
) -> FlowerAttachment:
    """Sample an attachment; overlap=True keeps resampling until pendants
    share material (an instance outside the disjoint family)."""
    anchor = norm_edge(*anchor_edge)
    h1, h2 = pair.h1, pair.h2
    base_verts = set(range(base.vertex_count))
    for _ in range(max_tries):
        next_label = base.vertex_count
        h2_edges = list(h2.edges)
        a2, b2 = h2_edges[rng.randrange(len(h2_edges))]
        if rng.random() < 0.5:
            a2, b2 = b2, a2
        vmap = {a2: anchor[0], b2: anchor[1]}
        for v in range(h2.vertex_count):
            if v not in vmap:
                vmap[v] = next_label
                next_label += 1
        inner = Copy(
            frozenset(norm_edge(vmap[u], vmap[v]) for u, v in h2.edges),
            frozenset(vmap.values()),
        )
        blocked_edges = base.edge_set() | inner.edges
        pendants: list[tuple[Edge, Copy]] = []
        outer_pool = set(inner.vertices)
        ok = True
        for f in sorted(inner.edges - {anchor}):
            placed = None
            for _ in range(60):
                h1_edges = list(h1.edges)
                a1, b1 = h1_edges[rng.randrange(len(h1_edges))]
                if rng.random() < 0.5:
                    a1, b1 = b1, a1
                pmap = {a1: f[0], b1: f[1]}
                used = {f[0], f[1]}
                trial_next = next_label
                for v in range(h1.vertex_count):
                    if v in pmap:
                        continue
                    pool = sorted(outer_pool - used)
                    if overlap and pool and rng.random() < 0.5:
                        pmap[v] = pool[rng.randrange(len(pool))]
                    else:
                        pmap[v] = trial_next
                        trial_next += 1
                    used.add(pmap[v])
                edges = frozenset(norm_edge(pmap[u], pmap[v]) for u, v in h1.edges)
                if (edges - {f}) & blocked_edges:
                    continue
                if frozenset(pmap.values()) & (base_verts - set(anchor)):
                    continue
                placed = Copy(edges, frozenset(pmap.values()))
                next_label = trial_next
                break
            if placed is None:
                ok = False
                break
            pendants.append((f, placed))
            outer_pool |= placed.vertices - set(f)
        if not ok:
            continue
        cls = _classify_flower(inner, pendants)
        if overlap and cls != "overlapping":
            continue
        if not overlap and cls != "disjoint":
            continue
        return make_flower(base, anchor, pair, inner, pendants)
    raise FlowerError("could not sample an attachment with the requested shape")


# ---------------------------------------------------------------------------
# edge ordering and the overcount audit


@dataclass(frozen=True)
class EdgeCluster:
    edges: tuple[Edge, ...]
    vertices: frozenset[int]


@dataclass(frozen=True)
class OrderEdgesResult:
    order: tuple[Edge, ...]
    clusters: tuple[EdgeCluster, ...]
    fallthrough: tuple[Edge, ...]


def order_edges(flower: FlowerAttachment) -> OrderEdgesResult:
    """Stack the inner edges so that pendant material shared between copies
    is concentrated in clusters: seed a cluster at an edge whose pendant
    shares an outer edge with another pendant, then absorb every edge whose
    endpoints are swallowed or whose pendant shares outer edges with the
    cluster.  Edges left when no two pendants share an outer edge fall
    through unclustered."""
    d = {f: flower.outer_edges(f) for f in flower.inner_edges}
    u = {f: flower.outer_vertices(f) for f in flower.inner_edges}
    inner_verts = set(flower.inner_copy.vertices)
    remaining = set(flower.inner_edges)
    stack: list[Edge] = []
    clusters: list[EdgeCluster] = []
    while remaining:
        seed = next(
            (
                f
                for f in sorted(remaining)
                if any(d[f] & d[f2] for f2 in remaining if f2 != f)
            ),
            None,
        )
        if seed is None:
            fall = tuple(sorted(remaining))
            stack.extend(fall)
            result = OrderEdgesResult(tuple(stack), tuple(clusters), fall)
            break
        cluster = [seed]
        remaining.discard(seed)
        stack.append(seed)
        verts = set(seed) | (u[seed] & inner_verts)
        shared_d = set(d[seed])
        while True:
            nxt = next(
                (
                    uw
                    for uw in sorted(remaining)
                    if (uw[0] in verts and uw[1] in verts) or d[uw] & shared_d
                ),
                None,
            )
            if nxt is None:
                break
            cluster.append(nxt)
            remaining.discard(nxt)
            stack.append(nxt)
            shared_d |= d[nxt]
            verts = set()
            for f in cluster:
                verts |= set(f) | (u[f] & inner_verts)
        clusters.append(EdgeCluster(tuple(cluster), frozenset(verts)))
    else:
        result = OrderEdgesResult(tuple(stack), tuple(clusters), ())
    for c in result.clusters:
        assert len(c.edges) >= 2, "a cluster must absorb its witnessing partner"
    assert len(result.clusters) <= flower.h2.edge_count // 2
    return result


def flower_deltas(
    flower: FlowerAttachment, order: Sequence[Edge]
) -> dict[Edge, tuple[frozenset[Edge], frozenset[int]]]:
    """Per inner edge, the outer edges and vertices already accounted for by
    earlier pendants (the inner copy's vertices count as pre-seen).  Summing
    these against the disjoint-case totals reconciles exactly, whatever the
    order."""
    seen_d: set[Edge] = set()
    seen_u: set[int] = set(flower.inner_copy.vertices)
    out: dict[Edge, tuple[frozenset[Edge], frozenset[int]]] = {}
    for f in order:
        d = flower.outer_edges(f)
        u = flower.outer_vertices(f)
        out[f] = (frozenset(d & seen_d), frozenset(u & seen_u))
        seen_d |= d
        seen_u |= u
    return out


@dataclass(frozen=True)
class DensityAudit:
    v_plus: int
    e_plus: int
    v_plus_disjoint: int
    e_plus_disjoint: int
    ratio: Fraction
    disjoint_ratio: Fraction
    exceeds_disjoint: bool
    delta_v_total: int
    delta_e_total: int
    reconciliation_ok: bool
    cluster_ok: bool
    fallthrough_ok: bool
    ordering: OrderEdgesResult


def check_external_density(flower: FlowerAttachment, pair: PairSpec) -> DensityAudit:
    """Audit the vertex/edge excess of the attachment against the disjoint
    shape: reconcile the totals through the overcounts, check the per-cluster
    overcount inequality, and compare external densities."""
    v1, e1 = pair.h1.vertex_count, pair.h1.edge_count
    v2, e2 = pair.h2.vertex_count, pair.h2.edge_count
    v_plus = len(flower.all_vertices()) - flower.base.vertex_count
    e_plus = len(flower.all_edges()) - flower.base.edge_count
    v_star = (v2 - 2) + (e2 - 1) * (v1 - 2)
    e_star = e1 * (e2 - 1)
    ordering = order_edges(flower)
    deltas = flower_deltas(flower, ordering.order)
    dv = sum(len(x[1]) for x in deltas.values())
    de = sum(len(x[0]) for x in deltas.values())
    cluster_ok = all(
        Fraction(sum(len(deltas[f][0]) for f in c.edges))
        < pair.m2_pair * sum(len(deltas[f][1]) for f in c.edges)
        for c in ordering.clusters
    )
    fallthrough_ok = all(not deltas[f][0] for f in ordering.fallthrough)
    return DensityAudit(
        v_plus=v_plus,
        e_plus=e_plus,
        v_plus_disjoint=v_star,
        e_plus_disjoint=e_star,
        ratio=Fraction(e_plus, v_plus),
        disjoint_ratio=Fraction(e_star, v_star),
        exceeds_disjoint=Fraction(e_plus, v_plus) > Fraction(e_star, v_star),
        delta_v_total=dv,
        delta_e_total=de,
        reconciliation_ok=(e_plus == e_star - de and v_plus == v_star - dv),
        cluster_ok=cluster_ok,
        fallthrough_ok=fallthrough_ok,
        ordering=ordering,
    )


def verify_overlap_density_gain(
    flower: FlowerAttachment, disjoint: FlowerAttachment
) -> bool:
    """Strict external-density comparison of an overlapping attachment
    against a disjoint one over the same base, anchor and patterns."""
    if flower.classification != "overlapping":
        raise FlowerError("first attachment must be overlapping")
    if disjoint.classification != "disjoint":
        raise FlowerError("second attachment must be disjoint")
    if flower.base != disjoint.base or flower.anchor_edge != disjoint.anchor_edge:
        raise FlowerError("attachments must share base and anchor")
    if canonical_key(flower.h1) != canonical_key(disjoint.h1) or canonical_key(
        flower.h2
    ) != canonical_key(disjoint.h2):
        raise FlowerError("attachments must use the same patterns")
    v1, e1 = flower.h1.vertex_count, flower.h1.edge_count
    v2, e2 = flower.h2.vertex_count, flower.h2.edge_count
    dv = len(disjoint.all_vertices()) - disjoint.base.vertex_count
    de = len(disjoint.all_edges()) - disjoint.base.edge_count
    assert dv == (v2 - 2) + (e2 - 1) * (v1 - 2), "disjoint vertex excess off closed form"
    assert de == e1 * (e2 - 1), "disjoint edge excess off closed form"
    v_plus = len(flower.all_vertices()) - flower.base.vertex_count
    e_plus = len(flower.all_edges()) - flower.base.edge_count
    return Fraction(e_plus, v_plus) > Fraction(de, dv)
