"""Small-graph core: exact copies, connectivity, canonical labels, graph6.

Everything downstream (density measures, obstruction families, the stack
colorer, the growth procedures) works over this module's Graph type. Graphs
are immutable, vertices are 0..n-1, and edges are stored as a sorted tuple of
sorted pairs so that iteration order is deterministic everywhere.

A "copy" of a pattern inside a host is a subgraph image; copies are
deduplicated by edge image (two embeddings that differ only by a pattern
automorphism are the same copy). This is the semantics all family and colorer
code relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"loop edge ({u},{v}) not allowed")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """An undirected simple graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: tuple[Edge, ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree_sequence(self) -> tuple[int, ...]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return tuple(deg)

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def __repr__(self) -> str:  # keep reprs short in test output
        return f"Graph(n={self.vertex_count}, m={len(self.edges)})"


def graph(vertex_count: int, edges: Iterable[Sequence[int]] = ()) -> Graph:
    """Build a Graph, normalizing, deduplicating and sorting the edge list."""
    if vertex_count < 0:
        raise ValueError("vertex_count must be >= 0")
    seen = set()
    for e in edges:
        u, v = e
        if not (0 <= u < vertex_count and 0 <= v < vertex_count):
            raise ValueError(f"edge ({u},{v}) out of range for {vertex_count} vertices")
        seen.add(norm_edge(u, v))
    return Graph(vertex_count, tuple(sorted(seen)))


# ---------------------------------------------------------------------------
# named graphs used all over the tests and the CLI examples


def empty_graph(n: int = 0) -> Graph:
    return graph(n)


def complete_graph(n: int) -> Graph:
    return graph(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs >= 3 vertices")
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def cube_graph() -> Graph:
    """The 3-dimensional hypercube, vertices are the 3-bit strings."""
    return graph(8, [(x, x ^ (1 << k)) for x in range(8) for k in range(3) if x < x ^ (1 << k)])


def octahedron_graph() -> Graph:
    """K_{2,2,2}: the complete graph on 6 vertices minus a perfect matching."""
    return graph(6, [(u, v) for u, v in itertools.combinations(range(6), 2) if v - u != 3])


# ---------------------------------------------------------------------------
# adjacency helpers


def adjacency_masks(g: Graph) -> list[int]:
    """Neighborhoods as bitmasks; bit v of masks[u] set iff uv is an edge."""
    masks = [0] * g.vertex_count
    for u, v in g.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def adjacency_sets(g: Graph) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(g.vertex_count)]
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Extract the induced subgraph on `vertices` as a standalone Graph.

    Returns the extracted graph together with the map original->new index.
    Vertices are relabeled in increasing original order.
    """
    verts = sorted(set(vertices))
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return graph(len(verts), edges), index


def subgraph_from_edges(vertex_count: int, edges: Iterable[Edge]) -> Graph:
    """A graph on the full 0..vertex_count-1 namespace with just these edges."""
    return graph(vertex_count, edges)


def extract_from_edges(edges: Iterable[Edge], isolated: Iterable[int] = ()) -> tuple[Graph, dict[int, int]]:
    """Relabel an edge set (plus optional isolated vertices) to a compact Graph."""
    edges = [norm_edge(*e) for e in edges]
    verts = sorted({v for e in edges for v in e} | set(isolated))
    index = {v: i for i, v in enumerate(verts)}
    return graph(len(verts), [(index[u], index[v]) for u, v in edges]), index


def graph_union(a: Graph, b: Graph) -> Graph:
    """Union of two graphs over a shared vertex namespace."""
    n = max(a.vertex_count, b.vertex_count)
    return graph(n, list(a.edges) + list(b.edges))


# ---------------------------------------------------------------------------
# copies of a pattern inside a host


@dataclass(frozen=True)
class Embedding:
    """An injective vertex map carrying every pattern edge to a host edge."""

    host: Graph
    pattern: Graph
    vertex_map: tuple[int, ...]

    @property
    def edge_image(self) -> frozenset[Edge]:
        vm = self.vertex_map
        return frozenset(norm_edge(vm[u], vm[v]) for u, v in self.pattern.edges)


@dataclass(frozen=True)
class Copy:
    """One subgraph copy: the image edge set plus a witness vertex set."""

    edges: frozenset[Edge]
    vertices: frozenset[int]

    def sort_key(self) -> tuple:
        return tuple(sorted(self.edges))


@dataclass(frozen=True)
class CopySet:
    pattern: Graph
    copies: tuple[Copy, ...]

    def __len__(self) -> int:
        return len(self.copies)

    def by_edge(self) -> dict[Edge, list[Copy]]:
        index: dict[Edge, list[Copy]] = {}
        for c in self.copies:
            for e in c.edges:
                index.setdefault(e, []).append(c)
        return index


def _pattern_order(pattern: Graph) -> list[int]:
    # Greedy connected expansion starting from a max-degree vertex; isolated
    # pattern vertices go last. Keeps the backtracking search well anchored.
    deg = pattern.degree_sequence()
    adj = adjacency_sets(pattern)
    remaining = set(range(pattern.vertex_count))
    order: list[int] = []
    while remaining:
        placed = set(order)
        best = max(
            remaining,
            key=lambda v: (len(adj[v] & placed), deg[v], -v),
        )
        order.append(best)
        remaining.discard(best)
    return order


def enumerate_embeddings(host: Graph, pattern: Graph) -> Iterator[Embedding]:
    """Yield every embedding of pattern into host (subgraph, not induced)."""
    if pattern.vertex_count == 0:
        yield Embedding(host, pattern, ())
        return
    if pattern.vertex_count > host.vertex_count:
        return
    hmask = adjacency_masks(host)
    hdeg = host.degree_sequence()
    pdeg = pattern.degree_sequence()
    padj = adjacency_sets(pattern)
    order = _pattern_order(pattern)
    pos_of = {v: i for i, v in enumerate(order)}

    assignment: list[int] = [-1] * pattern.vertex_count
    used = [False] * host.vertex_count

    def backtrack(depth: int) -> Iterator[Embedding]:
        if depth == len(order):
            yield Embedding(host, pattern, tuple(assignment))
            return
        pv = order[depth]
        anchors = [(assignment[q], q) for q in padj[pv] if pos_of[q] < depth]
        for hv in range(host.vertex_count):
            if used[hv] or hdeg[hv] < pdeg[pv]:
                continue
            ok = True
            for hu, _ in anchors:
                if not (hmask[hu] >> hv) & 1:
                    ok = False
                    break
            if not ok:
                continue
            used[hv] = True
            assignment[pv] = hv
            yield from backtrack(depth + 1)
            used[hv] = False
            assignment[pv] = -1

    yield from backtrack(0)


def enumerate_copies(host: Graph, pattern: Graph) -> CopySet:
    """All copies of pattern in host, deduplicated by edge image.

    The witness vertex set of a copy is taken from the first embedding found.
    Copies are sorted by their edge tuple so iteration is deterministic.
    """
    if pattern.edge_count == 0:
        raise ValueError("pattern must have at least one edge")
    found: dict[frozenset[Edge], Copy] = {}
    for emb in enumerate_embeddings(host, pattern):
        image = emb.edge_image
        if image not in found:
            found[image] = Copy(image, frozenset(emb.vertex_map))
    copies = tuple(sorted(found.values(), key=Copy.sort_key))
    return CopySet(pattern, copies)


# ---------------------------------------------------------------------------
# connectivity


def is_connected(g: Graph) -> bool:
    if g.vertex_count == 0:
        return True
    adj = adjacency_sets(g)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.vertex_count


def is_two_connected(g: Graph) -> bool:
    """True iff g has >= 3 vertices, is connected, and has no cut vertex."""
    if g.vertex_count < 3:
        return False
    if not is_connected(g):
        return False
    return not _articulation_points(g)


def _articulation_points(g: Graph) -> set[int]:
    adj = adjacency_sets(g)
    n = g.vertex_count
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    points: set[int] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack = [(root, iter(adj[root]))]
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        while stack:
            u, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = u
                    if u == root:
                        root_children += 1
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif w != parent[u]:
                    low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if p != root and low[u] >= disc[p]:
                        points.add(p)
        if root_children >= 2:
            points.add(root)
    return points


def block_decomposition(g: Graph) -> list[tuple[Edge, ...]]:
    """Maximal 2-connected blocks of g, each as its sorted edge tuple.

    Bridges come out as single-edge blocks (two vertices, one edge). Isolated
    vertices belong to no block. The blocks partition the edge set.
    """
    adj = adjacency_sets(g)
    n = g.vertex_count
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    timer = 0
    blocks: list[tuple[Edge, ...]] = []
    edge_stack: list[Edge] = []
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, iter(sorted(adj[root])))]
        while stack:
            u, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = u
                    edge_stack.append(norm_edge(u, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(sorted(adj[w]))))
                    advanced = True
                    break
                elif w != parent[u] and disc[w] < disc[u]:
                    edge_stack.append(norm_edge(u, w))
                    low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] >= disc[p]:
                        cut = norm_edge(p, u)
                        comp = []
                        while edge_stack:
                            e = edge_stack.pop()
                            comp.append(e)
                            if e == cut:
                                break
                        blocks.append(tuple(sorted(comp)))
    return blocks


# ---------------------------------------------------------------------------
# canonical labeling
#
# Strategy: iterated neighborhood color refinement to get an isomorphism
# invariant partition, then a depth-first search over class-respecting
# labelings maximizing the upper-triangle adjacency bitstring, with prefix
# pruning and a twin rule (two unplaced vertices with identical closed or open
# neighborhoods are interchangeable, so only one needs exploring).


def _refine_colors(g: Graph) -> list[int]:
    adj = adjacency_sets(g)
    colors = list(g.degree_sequence())
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(g.vertex_count)]
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if new == colors:
            return colors
        colors = new


def _canonical_order(g: Graph) -> tuple[int, ...]:
    n = g.vertex_count
    if n == 0:
        return ()
    masks = adjacency_masks(g)
    colors = _refine_colors(g)
    # vertices must be placed class by class, classes sorted by refined color
    class_of_position: list[int] = sorted(range(n), key=lambda v: colors[v])
    position_class = [colors[class_of_position[i]] for i in range(n)]

    best_bits: list[int] | None = None
    best_order: tuple[int, ...] | None = None

    def row_bits(v: int, placed: list[int]) -> int:
        # adjacency of v against already placed vertices, as an int with the
        # earliest placed vertex in the highest bit (lexicographic compare)
        bits = 0
        for u in placed:
            bits = (bits << 1) | ((masks[v] >> u) & 1)
        return bits

    order: list[int] = []
    used = [False] * n

    def candidates(depth: int) -> list[int]:
        want = position_class[depth]
        cands = [v for v in range(n) if not used[v] and colors[v] == want]
        # twin rule: identical neighborhoods (ignoring each other) need only
        # one representative
        kept: list[int] = []
        reps: list[tuple[int, int]] = []
        for v in cands:
            m_open = masks[v]
            m_closed = masks[v] | (1 << v)
            dup = False
            for mo, mc in reps:
                if m_open == mo or m_closed == mc:
                    dup = True
                    break
            if not dup:
                reps.append((m_open, m_closed))
                kept.append(v)
        return kept

    def dfs(depth: int, bits: list[int]) -> None:
        nonlocal best_bits, best_order
        if depth == n:
            if best_bits is None or bits > best_bits:
                best_bits = list(bits)
                best_order = tuple(order)
            return
        scored = []
        for v in candidates(depth):
            scored.append((row_bits(v, order), v))
        scored.sort(reverse=True)
        for rb, v in scored:
            prefix = bits + [rb]
            if best_bits is not None and prefix < best_bits[: len(prefix)]:
                break  # scored is descending, every later prefix loses too
            used[v] = True
            order.append(v)
            dfs(depth + 1, prefix)
            order.pop()
            used[v] = False

    dfs(0, [])
    assert best_order is not None
    return best_order


def canonical_form(g: Graph) -> tuple[Graph, tuple[int, ...]]:
    """A canonical representative of g's isomorphism class plus the relabeling.

    Returns (canon, mapping) where mapping[v] is the canonical index of
    original vertex v, and canon == graph(n, [(mapping[u], mapping[v]) ...]).
    Isomorphic inputs produce identical canon graphs.
    """
    order = _canonical_order(g)
    mapping = [0] * g.vertex_count
    for pos, v in enumerate(order):
        mapping[v] = pos
    canon = graph(g.vertex_count, [(mapping[u], mapping[v]) for u, v in g.edges])
    return canon, tuple(mapping)


def canonical_key(g: Graph) -> tuple:
    """Total order key on isomorphism classes: (n, canonical edge tuple)."""
    canon, _ = canonical_form(g)
    return (canon.vertex_count, canon.edges)


# ---------------------------------------------------------------------------
# exhaustive generation of small graphs up to isomorphism


def nonisomorphic_graphs(n: int, keep: Callable[[Graph], bool] | None = None) -> list[Graph]:
    """All non-isomorphic graphs on exactly n vertices (canonical forms).

    `keep` optionally prunes the search: a graph failing keep is dropped and
    never extended, so keep must be monotone under taking supergraphs on more
    vertices (anything violating it keeps violating it when grown). Density
    caps of the form e(G) <= c * v(G) + d qualify via the max-density argument.
    """
    level: dict[tuple, Graph] = {}
    start = graph(0)
    if n == 0:
        return [start] if keep is None or keep(start) else []
    level[canonical_key(start)] = start
    for size in range(1, n + 1):
        nxt: dict[tuple, Graph] = {}
        for g in level.values():
            for mask in range(1 << g.vertex_count):
                edges = list(g.edges) + [
                    (i, g.vertex_count) for i in range(g.vertex_count) if (mask >> i) & 1
                ]
                cand = graph(size, edges)
                if keep is not None and not keep(cand):
                    continue
                canon, _ = canonical_form(cand)
                nxt[(canon.vertex_count, canon.edges)] = canon
        level = nxt
    return sorted(level.values(), key=lambda g: (g.edge_count, g.edges))


def graphs_up_to(n: int, keep: Callable[[Graph], bool] | None = None) -> list[Graph]:
    """Non-isomorphic graphs on 0..n vertices, concatenated by order."""
    out: list[Graph] = []
    for k in range(n + 1):
        out.extend(nonisomorphic_graphs(k, keep))
    return out


# ---------------------------------------------------------------------------
# graph6


class Graph6Error(ValueError):
    """Malformed graph6 input; position is the offending byte offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (byte {position})")
        self.position = position


def emit_graph6(g: Graph) -> str:
    n = g.vertex_count
    if n > 258047:
        raise ValueError("graph6 supports at most 258047 vertices")
    if n <= 62:
        header = chr(n + 63)
    else:
        header = "~" + "".join(chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    mask = adjacency_masks(g)
    bits: list[int] = []
    for j in range(1, n):
        for i in range(j):
            bits.append((mask[i] >> j) & 1)
    while len(bits) % 6:
        bits.append(0)
    body = "".join(
        chr((bits[k] << 5 | bits[k + 1] << 4 | bits[k + 2] << 3 | bits[k + 3] << 2 | bits[k + 4] << 1 | bits[k + 5]) + 63)
        for k in range(0, len(bits), 6)
    )
    return header + body


def parse_graph6(text: str) -> Graph:
    s = text.strip()
    if not s:
        raise Graph6Error("empty graph6 string", 0)
    for pos, ch in enumerate(s):
        if not (63 <= ord(ch) <= 126):
            raise Graph6Error(f"character {ch!r} outside graph6 alphabet", pos)
    if s[0] == "~":
        if len(s) >= 2 and s[1] == "~":
            raise Graph6Error("graph6 long-long form (>258047 vertices) not supported", 1)
        if len(s) < 4:
            raise Graph6Error("truncated long-form vertex count", len(s))
        n = 0
        for ch in s[1:4]:
            n = (n << 6) | (ord(ch) - 63)
        body = s[4:]
        body_start = 4
    else:
        n = ord(s[0]) - 63
        body = s[1:]
        body_start = 1
    pair_count = n * (n - 1) // 2
    need = (pair_count + 5) // 6
    if len(body) < need:
        raise Graph6Error(
            f"body too short for {n} vertices: need {need} bytes, got {len(body)}",
            body_start + len(body),
        )
    if len(body) > need:
        raise Graph6Error(f"trailing bytes after {need}-byte body", body_start + need)
    bits: list[int] = []
    for ch in body:
        val = ord(ch) - 63
        bits.extend(((val >> 5) & 1, (val >> 4) & 1, (val >> 3) & 1, (val >> 2) & 1, (val >> 1) & 1, val & 1))
    for k in range(pair_count, len(bits)):
        if bits[k]:
            raise Graph6Error("nonzero padding bits", body_start + k // 6)
    edges = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                edges.append((i, j))
            k += 1
    return graph(n, edges)


def parse_edge_list(text: str) -> Graph:
    """Parse "u v" pairs, one per line; blank lines and #-comments ignored."""
    edges = []
    top = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer vertex in {raw!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: negative vertex in {raw!r}")
        top = max(top, u, v)
        edges.append((u, v))
    return graph(top + 1, edges)
