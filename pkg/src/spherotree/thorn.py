"""Thorns: finite subtrees with stubbed half-edges, and their canonical codes.

A sub-thorn of the tree is a nonempty connected set of vertices together
with a set of spikes, where a spike is a half-edge sticking out of a thorn
vertex toward a neighbor that is not part of the thorn.  Every spike names a
ball: the branch on the far side of its mid-edge.  Disjoint ball families
correspond to sub-thorns, boundary partitions to perfect sub-thorns (every
vertex uses all n+1 directions), and proper clopen sets to reduced sub-thorns
via their partition into maximal sub-balls.

The orbit of a clopen set under the full automorphism group is captured by
the isomorphism class of its reduced thorn, encoded here as a canonical
center-rooted string (``ThornCode``).
"""

from __future__ import annotations

import binascii
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, InternalError, ValidationError
from .tree import (
    FULL_BOUNDARY,
    Address,
    Ball,
    ClopenSet,
    balls_disjoint,
    check_arity,
    children,
    down,
    format_address,
    is_prefix,
    neighbors,
    tree_path,
    up,
    validate_address,
)

UP = -1

Spike = tuple[Address, int]


def spike_neighbor(spike: Spike) -> Address:
    vertex, direction = spike
    if direction == UP:
        if not vertex:
            raise ValidationError("the root has no upward direction")
        return vertex[:-1]
    return vertex + (direction,)


def spike_midpoint(spike: Spike) -> Address:
    """Mid-edges are keyed by the deeper endpoint of their edge."""
    vertex, direction = spike
    return vertex if direction == UP else vertex + (direction,)


def ball_of_spike(spike: Spike) -> Ball:
    """The ball a spike stands for: the branch away from the thorn vertex."""
    vertex, direction = spike
    if direction == UP:
        return up(vertex)
    return down(vertex + (direction,))


def spike_toward(vertex: Address, target: Address) -> Spike:
    """The spike at ``vertex`` pointing along the edge toward ``target``."""
    if vertex and target == vertex[:-1]:
        return (vertex, UP)
    if len(target) == len(vertex) + 1 and is_prefix(vertex, target):
        return (vertex, target[-1])
    raise InternalError(f"{format_address(target)} is not adjacent to {format_address(vertex)}")


@dataclass(frozen=True)
class SubThorn:
    """An embedded thorn.  The empty thorn has no vertices and no spikes."""

    arity: int
    vertices: frozenset[Address]
    spikes: frozenset[Spike]

    def __post_init__(self) -> None:
        check_arity(self.arity)
        if not self.vertices:
            if self.spikes:
                raise ValidationError("spikes need incident vertices")
            return
        for v in self.vertices:
            validate_address(v, self.arity, "thorn vertex")
        self._check_connected()
        seen_mid = set()
        for spike in self.spikes:
            vertex, direction = spike
            if vertex not in self.vertices:
                raise ValidationError(f"spike at {format_address(vertex)} has no thorn vertex")
            if direction == UP:
                if not vertex:
                    raise ValidationError("the root has no upward spike")
            else:
                bound = self.arity if not vertex else self.arity - 1
                if not 0 <= direction <= bound:
                    raise ValidationError(
                        f"spike direction {direction} is out of range at {format_address(vertex)}"
                    )
            if spike_neighbor(spike) in self.vertices:
                raise ValidationError(
                    f"spike at {format_address(vertex)} lies on an internal edge"
                )
            mid = spike_midpoint(spike)
            if mid in seen_mid:
                raise ValidationError(f"two spikes share the mid-edge {format_address(mid)}")
            seen_mid.add(mid)
        for v in self.vertices:
            if self.valence(v) > self.arity + 1:
                raise ValidationError(f"vertex {format_address(v)} exceeds valence {self.arity + 1}")

    def _check_connected(self) -> None:
        verts = self.vertices
        start = next(iter(verts))
        seen = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for w in neighbors(v, self.arity):
                if w in verts and w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if seen != verts:
            raise ValidationError("thorn vertices are not connected")

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def internal_neighbors(self, v: Address) -> tuple[Address, ...]:
        return tuple(w for w in neighbors(v, self.arity) if w in self.vertices)

    def spikes_at(self, v: Address) -> tuple[Spike, ...]:
        return tuple(sorted(s for s in self.spikes if s[0] == v))

    def valence(self, v: Address) -> int:
        return len(self.internal_neighbors(v)) + len(self.spikes_at(v))

    def internal_edges(self) -> tuple[tuple[Address, Address], ...]:
        out = []
        for v in self.vertices:
            for c in children(v, self.arity):
                if c in self.vertices:
                    out.append((v, c))
        return tuple(sorted(out))

    def midpoint_cells(self) -> frozenset[Address]:
        """Mid-edge 0-cells: spike midpoints and internal edge midpoints."""
        mids = {spike_midpoint(s) for s in self.spikes}
        mids.update(child for _, child in self.internal_edges())
        return frozenset(mids)

    def balls(self) -> tuple[Ball, ...]:
        return tuple(sorted(ball_of_spike(s) for s in self.spikes))

    @property
    def is_perfect(self) -> bool:
        """Every vertex uses all n+1 directions.  Perfect thorns carry boundary partitions."""
        return bool(self.vertices) and all(
            self.valence(v) == self.arity + 1 for v in self.vertices
        )

    @property
    def is_reduced(self) -> bool:
        """No reduction move applies (see ``reduce_subthorn``)."""
        if self.is_empty:
            return True
        return _find_reduction_vertex(self) is None and not (
            len(self.vertices) == 1 and len(self.spikes) == self.arity + 1
        )

    def meets(self, other: "SubThorn") -> bool:
        """Cell-level intersection: shared vertices or shared mid-edge points."""
        if self.vertices & other.vertices:
            return True
        return bool(self.midpoint_cells() & other.midpoint_cells())

    def sort_key(self) -> tuple:
        return (tuple(sorted(self.vertices)), tuple(sorted(self.spikes)))


def empty_subthorn(arity: int) -> SubThorn:
    return SubThorn(arity, frozenset(), frozenset())


def single_spike_subthorn(arity: int, ball: Ball) -> SubThorn:
    """The one-vertex thorn whose only spike stands for the given ball."""
    if ball.up:
        return SubThorn(arity, frozenset({ball.cut}), frozenset({(ball.cut, UP)}))
    v = ball.cut[:-1]
    return SubThorn(arity, frozenset({v}), frozenset({(v, ball.cut[-1])}))


def subthorn_from_balls(balls: Sequence[Ball], arity: int) -> SubThorn:
    """The minimal sub-thorn whose spikes are the mid-edges of the given balls.

    The balls must be pairwise disjoint and must not be a two-ball partition
    of the whole boundary (that degenerate partition has a bare mid-edge and
    no vertex, which the SubThorn type cannot carry).
    """
    check_arity(arity)
    blist = sorted(set(balls))
    if not blist:
        return empty_subthorn(arity)
    for i, a in enumerate(blist):
        validate_address(a.cut, arity, "ball cut")
        for b in blist[i + 1 :]:
            if not balls_disjoint(a, b):
                raise DomainError(f"balls {a.text()} and {b.text()} are not disjoint")
    if len(blist) == 2 and blist[0].cut == blist[1].cut:
        raise DomainError(
            "a two-ball partition of the whole boundary has no thorn vertex"
        )
    anchors = []
    spikes = []
    for b in blist:
        if b.up:
            anchors.append(b.cut)
            spikes.append((b.cut, UP))
        else:
            anchors.append(b.cut[:-1])
            spikes.append((b.cut[:-1], b.cut[-1]))
    verts: set[Address] = set()
    base = anchors[0]
    verts.add(base)
    for a in anchors[1:]:
        verts.update(tree_path(base, a))
    # close up: the spanned set of a vertex family is the union of pairwise
    # paths; paths through the base vertex cover all of them
    thorn = SubThorn(arity, frozenset(verts), frozenset(spikes))
    return thorn


def _find_reduction_vertex(t: SubThorn) -> Address | None:
    """A vertex carrying exactly n spikes with at most one internal edge."""
    for v in sorted(t.vertices):
        if len(t.spikes_at(v)) == t.arity and len(t.internal_neighbors(v)) <= 1:
            return v
    return None


def reduce_subthorn(t: SubThorn) -> SubThorn:
    """Cut mergeable boundary vertices until none remain.

    A vertex whose n spikes exhaust every direction but the one left for the
    rest of the thorn stands for n balls that merge into a single ball one
    edge further out; the cut replaces them by that ball's spike.  A lone
    vertex with all n+1 spikes is a partition of the whole boundary and
    reduces to the empty thorn.
    """
    verts = set(t.vertices)
    spikes = set(t.spikes)
    arity = t.arity

    def spike_count(v: Address) -> int:
        return sum(1 for s in spikes if s[0] == v)

    def internal_nbrs(v: Address) -> list[Address]:
        return [w for w in neighbors(v, arity) if w in verts]

    while True:
        if not verts:
            return empty_subthorn(arity)
        if len(verts) == 1:
            (a,) = verts
            at = sorted(s for s in spikes if s[0] == a)
            if len(at) == arity + 1:
                return empty_subthorn(arity)
            if len(at) == arity:
                # a lone vertex with n spikes stands for a single ball: the
                # complement of its one unused direction
                used = {s[1] for s in at}
                dirs = set(range(arity + 1)) if not a else set(range(arity)) | {UP}
                free = sorted(dirs - used)
                if len(free) != 1:
                    raise InternalError("lone vertex with n spikes must have one free direction")
                d = free[0]
                w = a[:-1] if d == UP else a + (d,)
                verts = {w}
                spikes = {spike_toward(w, a)}
                continue
            break
        cut = None
        for a in sorted(verts):
            if spike_count(a) == arity and len(internal_nbrs(a)) <= 1:
                cut = a
                break
        if cut is None:
            break
        nbrs = internal_nbrs(cut)
        if len(nbrs) != 1:
            raise InternalError("reduction vertex in a multi-vertex thorn must be a skeleton leaf")
        b = nbrs[0]
        verts.remove(cut)
        spikes = {s for s in spikes if s[0] != cut}
        spikes.add(spike_toward(b, cut))
    return SubThorn(arity, frozenset(verts), frozenset(spikes))


def clopen_of_subthorn(t: SubThorn):
    """Union of the spike balls.  Perfect thorns yield the full boundary."""
    if t.is_empty:
        raise DomainError("the empty thorn has no clopen set")
    if t.is_perfect:
        return FULL_BOUNDARY
    if not t.spikes:
        raise DomainError("a thorn with no spikes has an empty clopen set")
    return ClopenSet.from_balls(t.arity, [ball_of_spike(s) for s in t.spikes])


# ---------------------------------------------------------------------------
# abstract thorns and canonical codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbstractThorn:
    """A thorn up to embedding: skeleton adjacency plus spike counts."""

    arity: int
    adjacency: tuple[frozenset[int], ...]
    spike_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        check_arity(self.arity)
        V = len(self.adjacency)
        if len(self.spike_counts) != V:
            raise ValidationError("spike counts and adjacency disagree on size")
        edge_count = sum(len(a) for a in self.adjacency)
        if V and edge_count != 2 * (V - 1):
            raise ValidationError("skeleton is not a tree")
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if not 0 <= j < V or i == j or i not in self.adjacency[j]:
                    raise ValidationError("broken adjacency")
            if len(nbrs) + self.spike_counts[i] > self.arity + 1:
                raise ValidationError(f"vertex {i} exceeds valence {self.arity + 1}")
            if self.spike_counts[i] < 0:
                raise ValidationError("negative spike count")
        if V:
            self._check_tree_connected()

    def _check_tree_connected(self) -> None:
        V = len(self.adjacency)
        seen = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if len(seen) != V:
            raise ValidationError("skeleton is not connected")

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def spike_count(self) -> int:
        return sum(self.spike_counts)

    def skeleton_diameter(self) -> int:
        V = len(self.adjacency)
        if V <= 1:
            return 0
        far, _ = self._farthest(0)
        _, diam = self._farthest(far)
        return diam

    def _farthest(self, start: int) -> tuple[int, int]:
        dist = {start: 0}
        frontier = [start]
        best = (start, 0)
        while frontier:
            v = frontier.pop(0)
            for w in self.adjacency[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    if dist[w] > best[1]:
                        best = (w, dist[w])
                    frontier.append(w)
        return best

    @staticmethod
    def from_subthorn(t: SubThorn) -> "AbstractThorn":
        order = sorted(t.vertices)
        index = {v: i for i, v in enumerate(order)}
        adjacency = tuple(
            frozenset(index[w] for w in t.internal_neighbors(v)) for v in order
        )
        counts = tuple(len(t.spikes_at(v)) for v in order)
        return AbstractThorn(t.arity, adjacency, counts)


EMPTY_CODE_TEXT = "E"


@dataclass(frozen=True)
class ThornCode:
    """Canonical isomorphism-class code of a thorn.

    The text is a center-rooted serialization where every vertex contributes
    ``(k:...)`` with k its spike count and the child blocks sorted; two
    thorns get the same text exactly when they are isomorphic.
    """

    arity: int
    text: str

    def __post_init__(self) -> None:
        check_arity(self.arity)
        _parse_code_text(self.text)  # validates

    @property
    def token(self) -> str:
        return f"{self.arity}x" + binascii.hexlify(self.text.encode("ascii")).decode("ascii")

    @staticmethod
    def from_token(token: str) -> "ThornCode":
        try:
            arity_part, hex_part = token.split("x", 1)
            arity = int(arity_part)
            text = binascii.unhexlify(hex_part.encode("ascii")).decode("ascii")
        except (ValueError, binascii.Error) as err:
            raise ValidationError(f"bad thorn code token {token!r}: {err}") from None
        return ThornCode(arity, text)

    @property
    def is_empty(self) -> bool:
        return self.text == EMPTY_CODE_TEXT

    @cached_property
    def _counts(self) -> tuple[int, int, int]:
        return _parse_code_text(self.text)

    @property
    def vertex_count(self) -> int:
        return self._counts[0]

    @property
    def spike_count(self) -> int:
        return self._counts[1]

    @property
    def diameter(self) -> int:
        """Skeleton diameter in edges (0 for at most one vertex)."""
        return self._counts[2]

    def residue(self) -> int:
        return self.spike_count % (self.arity - 1)


def _parse_code_text(text: str) -> tuple[int, int, int]:
    """Validate a code string; return (vertices, spikes, skeleton diameter)."""
    if text == EMPTY_CODE_TEXT:
        return (0, 0, 0)
    pos = 0

    def parse_vertex() -> tuple[int, int, int, int]:
        # returns (vertices, spikes, height, diameter) of the parsed subtree
        nonlocal pos
        if pos >= len(text) or text[pos] != "(":
            raise ValidationError(f"bad thorn code text {text!r} at {pos}")
        pos += 1
        digits = ""
        while pos < len(text) and text[pos].isdigit():
            digits += text[pos]
            pos += 1
        if not digits or pos >= len(text) or text[pos] != ":":
            raise ValidationError(f"bad thorn code text {text!r} at {pos}")
        pos += 1
        spikes = int(digits)
        verts = 1
        heights = []
        diam = 0
        while pos < len(text) and text[pos] == "(":
            v, s, h, d = parse_vertex()
            verts += v
            spikes += s
            heights.append(h + 1)
            diam = max(diam, d)
        if pos >= len(text) or text[pos] != ")":
            raise ValidationError(f"bad thorn code text {text!r} at {pos}")
        pos += 1
        heights.sort(reverse=True)
        top2 = (heights + [0, 0])[:2]
        diam = max(diam, top2[0] + top2[1])
        return (verts, spikes, top2[0], diam)

    verts, spikes, _, diam = parse_vertex()
    if pos != len(text):
        raise ValidationError(f"trailing junk in thorn code text {text!r}")
    return (verts, spikes, diam)


def canonical_code(t: AbstractThorn | SubThorn) -> ThornCode:
    """Center-rooted canonical code; equal codes mean isomorphic thorns."""
    if isinstance(t, SubThorn):
        if t.is_empty:
            return ThornCode(t.arity, EMPTY_CODE_TEXT)
        t = AbstractThorn.from_subthorn(t)
    return _code_of_abstract(t)


@lru_cache(maxsize=65536)
def _code_of_abstract(t: AbstractThorn) -> ThornCode:
    if t.vertex_count == 0:
        return ThornCode(t.arity, EMPTY_CODE_TEXT)
    centers = _skeleton_centers(t.adjacency)
    text = min(_rooted_text(t, c) for c in centers)
    return ThornCode(t.arity, text)


def _skeleton_centers(adjacency: Sequence[frozenset[int]]) -> list[int]:
    V = len(adjacency)
    if V == 1:
        return [0]
    degree = [len(a) for a in adjacency]
    alive = set(range(V))
    layer = [v for v in alive if degree[v] <= 1]
    while len(alive) > 2:
        nxt = []
        for v in layer:
            alive.discard(v)
        for v in layer:
            for w in adjacency[v]:
                if w in alive:
                    degree[w] -= 1
                    if degree[w] == 1:
                        nxt.append(w)
        layer = nxt
    return sorted(alive)


def _rooted_text(t: AbstractThorn, root: int) -> str:
    def encode(v: int, parent: int | None) -> str:
        kids = sorted(
            (encode(w, v) for w in t.adjacency[v] if w != parent),
        )
        return f"({t.spike_counts[v]}:" + "".join(kids) + ")"

    return encode(root, None)


def abstract_from_code(code: ThornCode) -> AbstractThorn:
    """Rebuild a representative abstract thorn from its code text."""
    if code.is_empty:
        return AbstractThorn(code.arity, (), ())
    text = code.text
    adjacency: list[set[int]] = []
    counts: list[int] = []
    pos = 0

    def parse_vertex(parent: int | None) -> int:
        nonlocal pos
        assert text[pos] == "("
        pos += 1
        digits = ""
        while text[pos].isdigit():
            digits += text[pos]
            pos += 1
        assert text[pos] == ":"
        pos += 1
        me = len(adjacency)
        adjacency.append(set())
        counts.append(int(digits))
        if parent is not None:
            adjacency[me].add(parent)
            adjacency[parent].add(me)
        while text[pos] == "(":
            parse_vertex(me)
        assert text[pos] == ")"
        pos += 1
        return me

    parse_vertex(None)
    return AbstractThorn(code.arity, tuple(frozenset(a) for a in adjacency), tuple(counts))


# ---------------------------------------------------------------------------
# classification of clopen sets
# ---------------------------------------------------------------------------


def maximal_ball_thorn(omega: ClopenSet) -> SubThorn:
    """Reduced sub-thorn of the partition of omega into maximal sub-balls."""
    thorn = subthorn_from_balls([down(leaf) for leaf in omega.marked_leaves()], omega.arity)
    return reduce_subthorn(thorn)


def maximal_balls(omega: ClopenSet) -> tuple[Ball, ...]:
    return maximal_ball_thorn(omega).balls()


def classify_clopen(omega: ClopenSet) -> ThornCode:
    """Orbit invariant of a proper clopen set: the code of its reduced thorn."""
    if not isinstance(omega, ClopenSet):
        raise DomainError("classification needs a proper nonempty clopen set")
    return canonical_code(maximal_ball_thorn(omega))


def class_code_defect(code: ThornCode) -> str | None:
    """Why a code cannot arise from ``classify_clopen``; None if it can.

    Classification outputs are exactly the canonical codes of nonempty,
    non-perfect, reduced thorns whose skeleton leaves all carry a spike:
    maximal-ball thorns have spiked leaves (every leaf anchors a ball) and
    reduction keeps that, while conversely any such thorn embeds so that its
    spike balls are exactly the maximal balls of their union.
    """
    if code.is_empty:
        return "the empty code"
    t = abstract_from_code(code)
    V = t.vertex_count
    degs = tuple(len(nbrs) for nbrs in t.adjacency)
    if t.spike_count == 0:
        return "it has no spikes"
    if all(degs[i] + t.spike_counts[i] == code.arity + 1 for i in range(V)):
        return "it is perfect (a partition of the whole boundary)"
    if any(t.spike_counts[i] == code.arity and degs[i] <= 1 for i in range(V)):
        return "it is not reduced"
    if V >= 2 and any(degs[i] == 1 and t.spike_counts[i] == 0 for i in range(V)):
        return "it has a bare skeleton leaf"
    if _code_of_abstract(t) != code:
        return "the text is not in canonical center-rooted form"
    return None


def is_class_code(code: ThornCode) -> bool:
    """True iff the code occurs as a ``classify_clopen`` output."""
    return class_code_defect(code) is None


def require_class_code(code: ThornCode) -> ThornCode:
    defect = class_code_defect(code)
    if defect is not None:
        raise ValidationError(f"code {code.text!r} is not an orbit class: {defect}")
    return code


@lru_cache(maxsize=None)
def enumerate_class_codes(arity: int, iota: int, max_vertices: int) -> tuple[ThornCode, ...]:
    """All orbit-class codes of the residue sector with at most V vertices.

    Exhaustive: every labeled tree shape (Prüfer decoding) is combined with
    every admissible spike assignment, filtered to classification outputs,
    and deduplicated through the canonical code.  Cost grows quickly with
    ``max_vertices``; intended for small bounds.
    """
    check_arity(arity)
    if not 0 <= iota <= arity - 2:
        raise ValidationError(f"residue {iota} is out of range for arity {arity}")
    if max_vertices < 1:
        raise ValidationError("class enumeration needs at least one vertex")
    found: set[ThornCode] = set()
    for V in range(1, max_vertices + 1):
        for adjacency in _labeled_trees(V):
            degs = tuple(len(nbrs) for nbrs in adjacency)
            slot_ranges = [range(arity + 2 - d) for d in degs]
            for counts in product(*slot_ranges):
                total = sum(counts)
                if total == 0 or total % (arity - 1) != iota:
                    continue
                if all(degs[i] + counts[i] == arity + 1 for i in range(V)):
                    continue
                if any(counts[i] == arity and degs[i] <= 1 for i in range(V)):
                    continue
                if V >= 2 and any(degs[i] == 1 and counts[i] == 0 for i in range(V)):
                    continue
                found.add(_code_of_abstract(AbstractThorn(arity, adjacency, counts)))
    return tuple(sorted(found, key=lambda c: (c.vertex_count, c.spike_count, c.text)))


def _labeled_trees(V: int) -> Iterator[tuple[frozenset[int], ...]]:
    """Adjacency lists of every labeled tree on V vertices (Prüfer decoding)."""
    if V == 1:
        yield (frozenset(),)
        return
    for seq in product(range(V), repeat=V - 2):
        degree = [1] * V
        for x in seq:
            degree[x] += 1
        adj: list[set[int]] = [set() for _ in range(V)]
        for x in seq:
            leaf = min(i for i in range(V) if degree[i] == 1)
            adj[leaf].add(x)
            adj[x].add(leaf)
            degree[leaf] = 0
            degree[x] -= 1
        a, b = (i for i in range(V) if degree[i] == 1)
        adj[a].add(b)
        adj[b].add(a)
        yield tuple(frozenset(s) for s in adj)


# ---------------------------------------------------------------------------
# embedding enumeration
# ---------------------------------------------------------------------------


def enumerate_embeddings(
    pattern: ThornCode, region: SubThorn, radius: int
) -> tuple[SubThorn, ...]:
    """All reduced sub-thorns of the given class having a cell in the region.

    Every returned thorn lies inside the ``radius``-neighborhood of the
    region.  The radius must be at least the pattern diameter so that the
    listing is exhaustive: a connected thorn that touches the region cannot
    reach further out than its own diameter.
    """
    if pattern.arity != region.arity:
        raise DomainError("pattern and region arity differ")
    if region.is_empty:
        return ()
    if pattern.is_empty:
        raise DomainError("cannot embed the empty pattern")
    if radius < pattern.diameter + 1:
        raise DomainError(
            f"radius {radius} is too small for a pattern of diameter {pattern.diameter}"
        )
    arity = pattern.arity
    seeds = set(region.vertices)
    for mid in region.midpoint_cells():
        seeds.add(mid)
        seeds.add(mid[:-1])
    # every universe vertex sits within the radius of a seed, so no candidate
    # can stick out of the promised neighborhood
    universe = _ball_of_vertices(seeds, radius, arity)
    model = abstract_from_code(pattern)
    profile = tuple(
        sorted(zip(model.spike_counts, (len(a) for a in model.adjacency)))
    )
    results = []
    region_verts = region.vertices
    region_mids = region.midpoint_cells()
    for verts in _connected_subsets(universe, model.vertex_count, arity):
        vlist = sorted(verts)
        index = {v: i for i, v in enumerate(vlist)}
        free: list[list[int]] = []
        adjacency = []
        for v in vlist:
            dirs: Iterable[int]
            if v:
                dirs = list(range(arity)) + [UP]
            else:
                dirs = list(range(arity + 1))
            slots = []
            internal = []
            for d in dirs:
                w = v[:-1] if d == UP else v + (d,)
                if w in verts:
                    internal.append(index[w])
                else:
                    slots.append(d)
            free.append(slots)
            adjacency.append(frozenset(internal))
        degs = tuple(len(a) for a in adjacency)
        verts_frozen = frozenset(verts)
        touches = bool(verts & region_verts)
        if not touches:
            internal_mids = {
                w for v in vlist for w in children(v, arity) if w in verts
            }
            touches = bool(internal_mids & region_mids)
        # the spike directions do not change the isomorphism class, so shape
        # and reducedness are settled once per spike-count vector
        for counts in _count_vectors(free, degs, model.spike_count, profile):
            if any(counts[i] == arity and degs[i] <= 1 for i in range(len(vlist))):
                continue  # a reduction move would apply
            if len(vlist) == 1 and counts[0] == arity + 1:
                continue  # a lone full vertex is a boundary partition
            shape = AbstractThorn(arity, tuple(adjacency), counts)
            if _code_of_abstract(shape) != pattern:
                continue
            for spikes in _direction_combos(vlist, free, counts):
                if not touches and not any(
                    spike_midpoint(s) in region_mids for s in spikes
                ):
                    continue
                results.append(_unchecked_subthorn(arity, verts_frozen, frozenset(spikes)))
    results.sort(key=SubThorn.sort_key)
    return tuple(results)


def _unchecked_subthorn(
    arity: int, vertices: frozenset[Address], spikes: frozenset[Spike]
) -> SubThorn:
    """Bypass validation for thorns that are sound by construction."""
    t = object.__new__(SubThorn)
    object.__setattr__(t, "arity", arity)
    object.__setattr__(t, "vertices", vertices)
    object.__setattr__(t, "spikes", spikes)
    return t


def _count_vectors(
    free: Sequence[Sequence[int]],
    degs: tuple[int, ...],
    total: int,
    profile: tuple[tuple[int, int], ...],
) -> Iterator[tuple[int, ...]]:
    """Per-vertex spike counts matching a (spikes, degree) multiset exactly."""
    for counts in product(*(range(len(slots) + 1) for slots in free)):
        if sum(counts) != total:
            continue
        if tuple(sorted(zip(counts, degs))) != profile:
            continue
        yield counts


def _direction_combos(
    vlist: Sequence[Address], free: Sequence[Sequence[int]], counts: tuple[int, ...]
) -> Iterator[tuple[Spike, ...]]:
    pools = [
        tuple(combinations(slots, c)) for slots, c in zip(free, counts)
    ]
    for pick in product(*pools):
        yield tuple(
            (v, d) for v, combo in zip(vlist, pick) for d in combo
        )


def _ball_of_vertices(seeds: set[Address], radius: int, arity: int) -> set[Address]:
    out = set(seeds)
    frontier = set(seeds)
    for _ in range(radius):
        nxt = set()
        for v in frontier:
            for w in neighbors(v, arity):
                if w not in out:
                    out.add(w)
                    nxt.add(w)
        frontier = nxt
    return out


def _connected_subsets(universe: set[Address], size: int, arity: int) -> Iterator[frozenset[Address]]:
    """All connected vertex sets of the given size inside the universe.

    Standard rooted enumeration: each subset is produced exactly once, from
    its smallest element, by growing with neighbors larger than the root.
    """
    if size <= 0:
        return
    order = sorted(universe)
    rank = {v: i for i, v in enumerate(order)}

    def nbrs(v: Address) -> list[Address]:
        return [w for w in neighbors(v, arity) if w in universe]

    for root in order:
        r = rank[root]

        def grow(current: set[Address], frontier: list[Address], banned: set[Address]) -> Iterator[frozenset[Address]]:
            if len(current) == size:
                yield frozenset(current)
                return
            local_banned = set(banned)
            for i, v in enumerate(frontier):
                ext = [
                    w
                    for w in nbrs(v)
                    if rank[w] > r and w not in current and w not in local_banned and w not in frontier[i + 1 :]
                ]
                yield from grow(current | {v}, frontier[i + 1 :] + ext, local_banned)
                local_banned.add(v)

        start = [w for w in nbrs(root) if rank[w] > r]
        yield from grow({root}, start, set())
