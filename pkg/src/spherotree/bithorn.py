"""Two-sided thorn data for table elements, up to tree automorphisms.

A table element g carries a pair of perfect sub-thorns: one spanned by the
interior of its domain code, one by its range code, with spikes matched the
way g matches the corresponding balls.  Multiplying g on either side by an
automorphism can re-route every matched ball internally, so the only
retained structure is which ball goes to which — the pairing.

Cutting "similar" vertex pairs (a boundary vertex whose matched balls all
sit at a single far-side vertex) shrinks the pair without changing the
two-sided coset; the fixpoint is empty exactly when g is induced by a tree
automorphism.  ``CosetCode`` serializes the fixpoint canonically, giving a
computable invariant of the two-sided automorphism coset of g.
"""

from __future__ import annotations

import binascii
import random
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product
from typing import Iterator

from .element import Spheromorphism
from .errors import InternalError, ValidationError
from .thorn import (
    EMPTY_CODE_TEXT,
    Spike,
    SubThorn,
    ThornCode,
    abstract_from_code,
    empty_subthorn,
    spike_toward,
)
from .tree import Address, check_arity, children, format_address, root_code


@dataclass(frozen=True)
class BiThorn:
    """A matched pair of perfect sub-thorns, or the empty pair.

    ``pairing`` lists (domain spike, range spike) pairs, sorted, covering
    every spike on each side exactly once.
    """

    arity: int
    dom: SubThorn
    ran: SubThorn
    pairing: tuple[tuple[Spike, Spike], ...]

    def __post_init__(self) -> None:
        check_arity(self.arity)
        if self.dom.arity != self.arity or self.ran.arity != self.arity:
            raise ValidationError("thorn arity differs from the pair arity")
        if self.dom.is_empty != self.ran.is_empty:
            raise ValidationError("one side is empty and the other is not")
        if self.dom.is_empty:
            if self.pairing:
                raise ValidationError("the empty pair cannot match spikes")
            return
        if not self.dom.is_perfect or not self.ran.is_perfect:
            raise ValidationError("both sides of a nonempty pair must be perfect")
        if len(self.dom.vertices) != len(self.ran.vertices):
            raise ValidationError("the two sides must have the same vertex count")
        if self.pairing != tuple(sorted(self.pairing)):
            raise ValidationError("the pairing must be sorted")
        firsts = [s for s, _ in self.pairing]
        seconds = [q for _, q in self.pairing]
        if len(set(firsts)) != len(firsts) or set(firsts) != set(self.dom.spikes):
            raise ValidationError("pairing does not cover the domain spikes exactly once")
        if len(set(seconds)) != len(seconds) or set(seconds) != set(self.ran.spikes):
            raise ValidationError("pairing does not cover the range spikes exactly once")

    @property
    def is_empty(self) -> bool:
        return self.dom.is_empty

    @property
    def vertex_count(self) -> int:
        return len(self.dom.vertices)

    @cached_property
    def pair_map(self) -> dict[Spike, Spike]:
        return dict(self.pairing)

    def flip(self) -> "BiThorn":
        """The pair of the inverse element: sides swapped, pairing reversed."""
        return BiThorn(
            self.arity,
            self.ran,
            self.dom,
            tuple(sorted((q, s) for s, q in self.pairing)),
        )


def empty_bithorn(arity: int) -> BiThorn:
    return BiThorn(arity, empty_subthorn(arity), empty_subthorn(arity), ())


def _code_thorn(arity: int, leaves) -> SubThorn:
    """Perfect sub-thorn spanned by the interior of a complete prefix code."""
    leaf_list = list(leaves)
    interior = {leaf[:k] for leaf in leaf_list for k in range(len(leaf))}
    spikes = frozenset((leaf[:-1], leaf[-1]) for leaf in leaf_list)
    return SubThorn(arity, frozenset(interior), spikes)


def bithorn_of(g: Spheromorphism) -> BiThorn:
    """The matched thorn pair of a table element.

    Sibling families mapped onto sibling families (in any order) merge into
    their parents first: rearranging the inside of a matched ball is an
    automorphism move, so only the coarsest ball matching is kept.  The
    result is empty exactly when the merged domain code is the root code,
    which happens exactly for elements that permute the root branches.
    """
    table = dict(g.pieces)
    changed = True
    while changed:
        changed = False
        for u in sorted(table, key=len, reverse=True):
            if u not in table or len(u) <= 1:
                continue
            stem = u[:-1]
            family = children(stem, g.arity)
            if not all(c in table for c in family):
                continue
            targets = {table[c] for c in family}
            stems = {t[:-1] for t in targets}
            if len(stems) != 1:
                continue
            (target_stem,) = stems
            if not target_stem:
                continue
            if targets != set(children(target_stem, g.arity)):
                continue
            for c in family:
                del table[c]
            table[stem] = target_stem
            changed = True
    if set(table) == set(root_code(g.arity)):
        return empty_bithorn(g.arity)
    dom = _code_thorn(g.arity, table.keys())
    ran = _code_thorn(g.arity, table.values())
    pairing = tuple(
        sorted(((u[:-1], u[-1]), (v[:-1], v[-1])) for u, v in table.items())
    )
    return BiThorn(g.arity, dom, ran, pairing)


def _cut_leaf(t: SubThorn, a: Address) -> tuple[SubThorn, Spike]:
    """Remove a skeleton leaf; its former edge becomes a spike at the neighbor."""
    nbrs = t.internal_neighbors(a)
    if len(nbrs) != 1:
        raise InternalError(f"{format_address(a)} is not a skeleton leaf")
    (r,) = nbrs
    new_spike = spike_toward(r, a)
    verts = t.vertices - {a}
    spikes = frozenset(s for s in t.spikes if s[0] != a) | {new_spike}
    return SubThorn(t.arity, verts, spikes), new_spike


def _cut_similar_pair(b: BiThorn, a: Address) -> BiThorn:
    pair = b.pair_map
    a_spikes = b.dom.spikes_at(a)
    far_vertices = {pair[s][0] for s in a_spikes}
    if len(a_spikes) != b.arity or len(far_vertices) != 1:
        raise InternalError(f"{format_address(a)} is not half of a similar pair")
    (far,) = far_vertices
    if set(b.ran.spikes_at(far)) != {pair[s] for s in a_spikes}:
        raise InternalError("matched spikes do not exhaust the far vertex")
    new_dom, new_dom_spike = _cut_leaf(b.dom, a)
    new_ran, new_ran_spike = _cut_leaf(b.ran, far)
    pairs = [(s, q) for s, q in b.pairing if s[0] != a]
    pairs.append((new_dom_spike, new_ran_spike))
    return BiThorn(b.arity, new_dom, new_ran, tuple(sorted(pairs)))


def reduce_bithorn(b: BiThorn, rng: random.Random | None = None) -> BiThorn:
    """Cut similar pairs until none remain.  The fixpoint is order-independent.

    A single matched vertex pair matches two full branch stars, which any
    tree automorphism can align, so reaching one vertex means reaching the
    empty pair.  Passing a random generator picks cut candidates at random
    instead of in address order; the result is the same either way.
    """
    current = b
    while not current.is_empty:
        if current.vertex_count == 1:
            return empty_bithorn(current.arity)
        pair = current.pair_map
        candidates = []
        for a in sorted(current.dom.vertices):
            a_spikes = current.dom.spikes_at(a)
            if len(a_spikes) != current.arity:
                continue
            if len({pair[s][0] for s in a_spikes}) == 1:
                candidates.append(a)
        if not candidates:
            return current
        pick = candidates[0] if rng is None else candidates[rng.randrange(len(candidates))]
        current = _cut_similar_pair(current, pick)
    return current


def minimal_bithorn(g: Spheromorphism) -> BiThorn:
    return reduce_bithorn(bithorn_of(g))


def is_automorphism(g: Spheromorphism) -> bool:
    """Whether g is induced by an isomorphism of the tree."""
    return minimal_bithorn(g).is_empty


# ---------------------------------------------------------------------------
# canonical coset codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetCode:
    """Canonical invariant of the two-sided automorphism coset of an element.

    The text is ``E`` for automorphisms and otherwise three ``|``-separated
    parts: the rooted shapes of the two sides and the sorted multiset of
    matched vertex index pairs (``i>j``), minimized over every choice of
    rooting and index assignment on both sides.
    """

    arity: int
    text: str

    def __post_init__(self) -> None:
        check_arity(self.arity)
        _validate_coset_text(self.arity, self.text)

    @property
    def token(self) -> str:
        return f"{self.arity}c" + binascii.hexlify(self.text.encode("ascii")).decode("ascii")

    @staticmethod
    def from_token(token: str) -> "CosetCode":
        try:
            arity_part, hex_part = token.split("c", 1)
            arity = int(arity_part)
            text = binascii.unhexlify(hex_part.encode("ascii")).decode("ascii")
        except (ValueError, binascii.Error) as err:
            raise ValidationError(f"bad coset code token {token!r}: {err}") from None
        return CosetCode(arity, text)

    @property
    def is_empty(self) -> bool:
        return self.text == EMPTY_CODE_TEXT


def _validate_coset_text(arity: int, text: str) -> None:
    if text == EMPTY_CODE_TEXT:
        return
    parts = text.split("|")
    if len(parts) != 3:
        raise ValidationError(f"coset code text needs three parts: {text!r}")
    shape_dom, shape_ran, arc_part = parts
    models = []
    for shape in (shape_dom, shape_ran):
        model = abstract_from_code(ThornCode(arity, shape))
        if model.vertex_count == 0:
            raise ValidationError("a nonempty coset code cannot use the empty shape")
        for i in range(model.vertex_count):
            if len(model.adjacency[i]) + model.spike_counts[i] != arity + 1:
                raise ValidationError(f"shape {shape!r} is not perfect for arity {arity}")
        models.append(model)
    dom_model, ran_model = models
    if dom_model.vertex_count != ran_model.vertex_count:
        raise ValidationError("coset code sides have different vertex counts")
    arcs = []
    for chunk in arc_part.split(","):
        left, sep, right = chunk.partition(">")
        if not sep or not left.isdigit() or not right.isdigit():
            raise ValidationError(f"bad arc {chunk!r} in coset code")
        arcs.append((int(left), int(right)))
    if arcs != sorted(arcs):
        raise ValidationError("coset code arcs must be sorted")
    from_counts = [0] * dom_model.vertex_count
    to_counts = [0] * ran_model.vertex_count
    for i, j in arcs:
        if i >= dom_model.vertex_count or j >= ran_model.vertex_count:
            raise ValidationError(f"arc {i}>{j} points outside the shapes")
        from_counts[i] += 1
        to_counts[j] += 1
    if tuple(from_counts) != dom_model.spike_counts:
        raise ValidationError("arc multiplicities disagree with the domain shape")
    if tuple(to_counts) != ran_model.spike_counts:
        raise ValidationError("arc multiplicities disagree with the range shape")


def _directional_texts(t: SubThorn):
    """Canonical text of each subtree seen from a directed edge (or a root)."""
    memo: dict[tuple[Address, Address | None], str] = {}

    def text(v: Address, parent: Address | None) -> str:
        key = (v, parent)
        if key not in memo:
            kids = sorted(
                text(w, v) for w in t.internal_neighbors(v) if w != parent
            )
            memo[key] = f"({len(t.spikes_at(v))}:" + "".join(kids) + ")"
        return memo[key]

    return text


def _best_rootings(t: SubThorn) -> tuple[str, list[Address]]:
    """The minimal rooted shape text and every vertex achieving it."""
    text = _directional_texts(t)
    scored = [(text(v, None), v) for v in sorted(t.vertices)]
    best = min(shape for shape, _ in scored)
    return best, [v for shape, v in scored if shape == best]


def _canonical_orderings(t: SubThorn, root: Address) -> Iterator[tuple[Address, ...]]:
    """Preorder vertex sequences consistent with the canonical rooted shape.

    Sibling subtrees are laid out in sorted shape order; equal shapes may be
    swapped, so every valid index assignment of the shape is produced.
    """
    text = _directional_texts(t)

    def rec(v: Address, parent: Address | None) -> Iterator[tuple[Address, ...]]:
        kids = [w for w in sorted(t.internal_neighbors(v)) if w != parent]
        if not kids:
            yield (v,)
            return
        groups: dict[str, list[Address]] = {}
        for w in kids:
            groups.setdefault(text(w, v), []).append(w)
        keys = sorted(groups)
        for choice in product(*[list(permutations(groups[k])) for k in keys]):
            ordered = [w for group in choice for w in group]
            for parts in product(*[list(rec(w, v)) for w in ordered]):
                yield (v,) + tuple(x for part in parts for x in part)

    return rec(root, None)


def canonical_coset_code(b: BiThorn) -> CosetCode:
    if b.is_empty:
        return CosetCode(b.arity, EMPTY_CODE_TEXT)
    shape_dom, dom_roots = _best_rootings(b.dom)
    shape_ran, ran_roots = _best_rootings(b.ran)
    dom_orderings = [
        order for root in dom_roots for order in _canonical_orderings(b.dom, root)
    ]
    ran_orderings = [
        order for root in ran_roots for order in _canonical_orderings(b.ran, root)
    ]
    best: list[tuple[int, int]] | None = None
    for dom_order in dom_orderings:
        dom_index = {v: i for i, v in enumerate(dom_order)}
        for ran_order in ran_orderings:
            ran_index = {v: i for i, v in enumerate(ran_order)}
            arcs = sorted(
                (dom_index[s[0]], ran_index[q[0]]) for s, q in b.pairing
            )
            if best is None or arcs < best:
                best = arcs
    arc_text = ",".join(f"{i}>{j}" for i, j in best)
    return CosetCode(b.arity, f"{shape_dom}|{shape_ran}|{arc_text}")


def coset_code(g: Spheromorphism) -> CosetCode:
    """Canonical code of the two-sided automorphism coset of g."""
    return canonical_coset_code(minimal_bithorn(g))
