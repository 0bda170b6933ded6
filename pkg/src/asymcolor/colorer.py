"""The stack colorer: delete edges that nothing pins, hand the sparse core to
the member-wise colorer, then replay the stack re-adding edges blue and
flipping one edge red on each fully-blue tracked copy.

The tracked copy list starts as all h2-copies of the input and only ever
shrinks; h1-copies are always read against the current residual. Because a
copy of a pattern in the residual is exactly a copy in the input whose edges
all survive, every copy set is enumerated once up front and filtered by a
dead-edge counter, never re-enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from .density import PairSpec
from .families import (
    BLUE,
    RED,
    Coloring,
    MemberColoringResult,
    blocker_decomposition,
    color_by_members,
    family_report,
    verify_coloring,
    DEFAULT_ORACLE_BUDGET,
)
from .graphs import Copy, CopySet, Edge, Graph, enumerate_copies, subgraph_from_edges


@dataclass(frozen=True)
class StackEntry:
    kind: Literal["edge", "h2copy"]
    edge: Edge | None = None
    copy_edges: frozenset[Edge] | None = None


@dataclass(frozen=True)
class TraceEvent:
    step: int
    action: str
    edge: Edge | None = None
    l_copy: tuple[Edge, ...] | None = None
    color: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"step": self.step, "action": self.action}
        if self.edge is not None:
            out["edge"] = list(self.edge)
        if self.l_copy is not None:
            out["l_copy"] = [list(e) for e in self.l_copy]
        if self.color is not None:
            out["color"] = self.color
        return out


@dataclass(frozen=True)
class ColorerOutcome:
    status: Literal["colored", "stuck"]
    coloring: Coloring | None
    residual: Graph | None
    live_anchors: CopySet | None
    trace: tuple[TraceEvent, ...]
    blockers: tuple[Graph, ...]


class ColorerInternalError(Exception):
    """An assertion the correctness proof forbids has fired; carries the trace."""

    def __init__(self, message: str, trace: Sequence[TraceEvent]):
        lines = [message] + [str(ev.to_dict()) for ev in trace[-20:]]
        super().__init__("\n".join(lines))
        self.trace = tuple(trace)


class UncolorableMemberError(Exception):
    """The member-wise colorer failed on the sparse core.

    Not an internal bug: it means some blocker member has no valid coloring,
    refuting the emptiness premise for this pair/epsilon. Carries the result.
    """

    def __init__(self, result: MemberColoringResult):
        super().__init__(result.finding or "member coloring failed")
        self.result = result


class _LiveCopies:
    """Copies of a pattern in the input, filtered by surviving edges."""

    def __init__(self, host: Graph, pattern: Graph, live: set[Edge]):
        self.copies = enumerate_copies(host, pattern).copies
        self.by_edge: dict[Edge, list[int]] = {}
        for i, c in enumerate(self.copies):
            for e in c.edges:
                self.by_edge.setdefault(e, []).append(i)
        self.missing = [sum(1 for e in c.edges if e not in live) for c in self.copies]

    def kill(self, e: Edge):
        for i in self.by_edge.get(e, ()):
            self.missing[i] += 1

    def revive(self, e: Edge):
        for i in self.by_edge.get(e, ()):
            self.missing[i] -= 1

    def alive(self, i: int) -> bool:
        return self.missing[i] == 0

    def alive_through(self, e: Edge):
        return (self.copies[i] for i in self.by_edge.get(e, ()) if self.missing[i] == 0)

    def alive_all(self):
        return (c for i, c in enumerate(self.copies) if self.missing[i] == 0)


def _guard_needs_work(
    live: set[Edge], h1: _LiveCopies, h2: _LiveCopies, blocker_sets: list[_LiveCopies]
) -> bool:
    """True while the residual is NOT a cleanly-covered sparse union of
    blocker members (the loop-continue condition)."""
    if not blocker_sets:
        # no members can exist: clean coverage forces an empty edge set
        return bool(live)
    living: list[Copy] = []
    for bs in blocker_sets:
        living.extend(bs.alive_all())
    living = list({c.edges: c for c in living}.values())
    living.sort(key=lambda c: (-len(c.edges), c.sort_key()))
    members: list[Copy] = []
    for c in living:
        if not any(c.edges < kept.edges for kept in members):
            members.append(c)
    counts = {e: 0 for e in live}
    touching: dict[Edge, list[int]] = {e: [] for e in live}
    for mi, mem in enumerate(members):
        for e in mem.edges:
            counts[e] += 1
            touching[e].append(mi)
    if any(c != 1 for c in counts.values()):
        return True
    for source in (h1, h2):
        for c in source.alive_all():
            touched = {mi for e in c.edges for mi in touching[e]}
            if len(touched) >= 2:
                return True
    return False


def asym_edge_color(
    g: Graph,
    pair: PairSpec,
    blockers: Sequence[Graph],
    budget: int = DEFAULT_ORACLE_BUDGET,
) -> ColorerOutcome:
    """Run the full delete/hand-off/replay pipeline on g.

    Returns Colored (with a verified coloring) or Stuck (with the residual
    and the still-tracked copies). Internal contract violations raise
    ColorerInternalError with the trace attached; an uncolorable sparse-core
    member raises UncolorableMemberError.
    """
    live: set[Edge] = set(g.edges)
    h1 = _LiveCopies(g, pair.h1, live)
    h2 = _LiveCopies(g, pair.h2, live)
    blocker_sets = [_LiveCopies(g, b, live) for b in blockers]

    tracked: list[int] = list(range(len(h2.copies)))  # indices into h2.copies
    tracked_set = set(tracked)
    stack: list[StackEntry] = []
    trace: list[TraceEvent] = []
    step = 0

    def log(action: str, edge=None, l_copy=None, color=None):
        nonlocal step
        trace.append(TraceEvent(step, action, edge, l_copy, color))
        step += 1

    def pinned_by_tracked(e: Edge) -> bool:
        for li in h2.by_edge.get(e, ()):
            if li not in tracked_set:
                continue
            L = h2.copies[li]
            for R in h1.alive_through(e):
                if L.edges & R.edges == {e}:
                    return True
        return False

    def anchored_in_residual(li: int) -> Edge | None:
        """First edge of tracked copy li with no uniquely-intersecting live
        h1-copy; None when fully anchored."""
        L = h2.copies[li]
        for e in sorted(L.edges):
            if not any(L.edges & R.edges == {e} for R in h1.alive_through(e)):
                return e
        return None

    guard_dirty = True
    guard_value = False
    while True:
        if guard_dirty:
            guard_value = _guard_needs_work(live, h1, h2, blocker_sets)
            guard_dirty = False
        if not guard_value:
            break
        measure = len(live) + len(tracked)
        # every tracked copy must still be fully alive in the residual
        assert all(h2.missing[li] == 0 for li in tracked)

        fired = False
        for e in sorted(live):
            if not pinned_by_tracked(e):
                for li in [li for li in tracked if e in h2.copies[li].edges]:
                    stack.append(StackEntry("h2copy", copy_edges=h2.copies[li].edges))
                    tracked.remove(li)
                    tracked_set.discard(li)
                    log("push_l", edge=e, l_copy=tuple(sorted(h2.copies[li].edges)))
                stack.append(StackEntry("edge", edge=e))
                live.discard(e)
                h1.kill(e)
                h2.kill(e)
                for bs in blocker_sets:
                    bs.kill(e)
                log("delete_edge", edge=e)
                guard_dirty = True
                fired = True
                break
        if not fired:
            for li in list(tracked):
                bad = anchored_in_residual(li)
                if bad is not None:
                    stack.append(StackEntry("h2copy", copy_edges=h2.copies[li].edges))
                    tracked.remove(li)
                    tracked_set.discard(li)
                    log("retire_l", edge=bad, l_copy=tuple(sorted(h2.copies[li].edges)))
                    fired = True
                    break
        if not fired:
            log("stuck")
            residual = subgraph_from_edges(g.vertex_count, live)
            live_anchors = CopySet(pair.h2, tuple(h2.copies[li] for li in sorted(tracked)))
            return ColorerOutcome("stuck", None, residual, live_anchors, tuple(trace), tuple(blockers))
        assert len(live) + len(tracked) < measure  # the loop must shrink

    # hand the sparse, cleanly-covered residual to the member-wise colorer
    residual = subgraph_from_edges(g.vertex_count, live)
    log("handoff")
    base = color_by_members(residual, pair, blockers, budget)
    if not base.ok:
        raise UncolorableMemberError(base)
    assignment: dict[Edge, str] = dict(base.coloring.assignment)

    while stack:
        entry = stack.pop()
        if entry.kind == "edge":
            e = entry.edge
            live.add(e)
            h1.revive(e)
            assignment[e] = BLUE
            log("readd_edge", edge=e, color=BLUE)
        else:
            L_edges = entry.copy_edges
            if not all(assignment.get(f) == BLUE for f in L_edges):
                continue
            flip = None
            for f in sorted(L_edges):
                if not any(L_edges & R.edges == {f} for R in h1.alive_through(f)):
                    flip = f
                    break
            if flip is None:
                raise ColorerInternalError(
                    "fully-blue tracked copy with every edge uniquely intersected; "
                    "the replay guarantee is broken",
                    trace,
                )
            assignment[flip] = RED
            log("recolor_red", edge=flip, l_copy=tuple(sorted(L_edges)), color=RED)
            for R in h1.alive_through(flip):
                if all(assignment.get(x) == RED for x in R.edges):
                    raise ColorerInternalError(
                        f"recoloring {flip} red completed a red copy", trace
                    )

    coloring = Coloring(g, assignment)
    check = verify_coloring(coloring, pair)
    if not check.ok:
        raise ColorerInternalError(f"final coloring invalid: {check}", trace)
    return ColorerOutcome("colored", coloring, None, None, tuple(trace), tuple(blockers))


@dataclass(frozen=True)
class StuckReport:
    residual: Graph
    anchored: bool
    covered_once: bool
    sparse: bool
    live_anchor_count: int


def check_stuck_state(outcome: ColorerOutcome, pair: PairSpec) -> StuckReport:
    """Independently verify what a Stuck outcome promises: the residual is in
    the anchored family and is not a cleanly-covered sparse union."""
    if outcome.status != "stuck":
        raise ValueError("outcome is not stuck")
    residual = outcome.residual
    if residual.edge_count == 0:
        raise ColorerInternalError("stuck with an empty residual", outcome.trace)
    report = family_report(residual, pair)
    if not report.anchored:
        raise ColorerInternalError(
            f"stuck residual is not anchored; failures {report.anchored_failures}",
            outcome.trace,
        )
    anchored_sets = {c.edges for c in report.anchored_copies.copies}
    for L in outcome.live_anchors.copies:
        if L.edges not in anchored_sets:
            raise ColorerInternalError("a live tracked copy is not anchored", outcome.trace)
    decomp = blocker_decomposition(residual, pair, outcome.blockers)
    if decomp.covered_once and decomp.sparse:
        raise ColorerInternalError(
            "stuck residual is already a cleanly-covered sparse union", outcome.trace
        )
    return StuckReport(
        residual, report.anchored, decomp.covered_once, decomp.sparse, len(outcome.live_anchors)
    )
