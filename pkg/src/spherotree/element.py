"""Tail-rigid boundary transformations given by finite prefix-exchange tables.

An element is a bijection between the leaves of two complete prefix codes;
the pair (u -> v) moves every boundary end u.w to v.w, copying the tail w
verbatim.  These elements form a dense subgroup of the full spheromorphism
group of the tree.  The library works with this subgroup only: the missing
elements differ from tail-rigid ones by branch automorphisms, which never
change a coset of the automorphism subgroup, an orbit of a clopen set, or
any of the statistics computed downstream.

Tables are kept in a canonical reduced form (maximal literal pieces), so
structural equality coincides with equality of boundary maps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, ValidationError
from .tree import (
    Address,
    Ball,
    ClopenSet,
    children,
    check_arity,
    down,
    format_address,
    is_prefix,
    refine,
    require_prefix_code,
    root_code,
    up,
    validate_address,
)

Piece = tuple[Address, Address]


@dataclass(frozen=True)
class Spheromorphism:
    """A tail-rigid element in canonical reduced table form."""

    arity: int
    pieces: tuple[Piece, ...]

    def __post_init__(self) -> None:
        check_arity(self.arity)
        if not self.pieces:
            raise ValidationError("a table needs at least one piece")
        seen_src = set()
        seen_dst = set()
        for u, v in self.pieces:
            validate_address(u, self.arity, "table source")
            validate_address(v, self.arity, "table target")
            if not u or not v:
                raise ValidationError("table pieces cannot use the root address")
            if u in seen_src:
                raise ValidationError(f"source {format_address(u)} appears twice")
            if v in seen_dst:
                raise ValidationError(f"target {format_address(v)} appears twice")
            seen_src.add(u)
            seen_dst.add(v)
        require_prefix_code(seen_src, self.arity, "domain code")
        require_prefix_code(seen_dst, self.arity, "range code")
        if self.pieces != _canonical_pieces(self.arity, self.pieces):
            raise ValidationError("table is not in canonical reduced form")

    @cached_property
    def sources(self) -> tuple[Address, ...]:
        return tuple(u for u, _ in self.pieces)

    @cached_property
    def targets(self) -> tuple[Address, ...]:
        return tuple(v for _, v in self.pieces)

    def depth(self) -> int:
        """Largest leaf length over both codes."""
        return max(max(len(u), len(v)) for u, v in self.pieces)

    def piece_for_source(self, word: Address) -> Piece:
        for u, v in self.pieces:
            if is_prefix(u, word):
                return (u, v)
        raise DomainError(
            f"word {format_address(word)} does not reach the domain code"
        )

    def piece_for_target(self, word: Address) -> Piece:
        for u, v in self.pieces:
            if is_prefix(v, word):
                return (u, v)
        raise DomainError(
            f"word {format_address(word)} does not reach the range code"
        )

    def apply_word(self, word: Address) -> Address:
        """Image of a finite word that reaches the domain code."""
        u, v = self.piece_for_source(word)
        return v + word[len(u) :]

    def sort_key(self) -> tuple:
        return (self.arity, self.pieces)


def _canonical_pieces(arity: int, pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    """Merge literal sibling families to a fixpoint; unique coarsest table."""
    table = dict(pieces)
    changed = True
    while changed:
        changed = False
        for u in sorted(table, key=len, reverse=True):
            if u not in table or len(u) <= 1:
                continue
            stem = u[:-1]
            family = children(stem, arity)
            if not all(c in table for c in family):
                continue
            target_stem = table[family[0]][:-1]
            if not target_stem:
                continue
            if all(table[c] == target_stem + (c[-1],) for c in family):
                for c in family:
                    del table[c]
                table[stem] = target_stem
                changed = True
    return tuple(sorted(table.items()))


def from_pieces(arity: int, pieces: Iterable[tuple[Iterable[int], Iterable[int]]]) -> Spheromorphism:
    """Build an element from raw (source, target) pairs, canonicalizing."""
    check_arity(arity)
    raw = [
        (validate_address(u, arity, "table source"), validate_address(v, arity, "table target"))
        for u, v in pieces
    ]
    if len({u for u, _ in raw}) != len(raw):
        raise ValidationError("duplicate source in table")
    if len({v for _, v in raw}) != len(raw):
        raise ValidationError("duplicate target in table")
    for u, v in raw:
        if not u or not v:
            raise ValidationError("table pieces cannot use the root address")
    require_prefix_code((u for u, _ in raw), arity, "domain code")
    require_prefix_code((v for _, v in raw), arity, "range code")
    return Spheromorphism(arity, _canonical_pieces(arity, raw))


def identity(arity: int) -> Spheromorphism:
    return from_pieces(arity, [(leaf, leaf) for leaf in root_code(arity)])


def is_identity(g: Spheromorphism) -> bool:
    return all(u == v for u, v in g.pieces)


def compose(g: Spheromorphism, h: Spheromorphism) -> Spheromorphism:
    """The element acting as h first, then g."""
    if g.arity != h.arity:
        raise DomainError(f"arity mismatch: {g.arity} vs {h.arity}")
    mid = refine(h.targets, g.sources, g.arity)
    pieces = []
    for m in mid:
        hu, hv = h.piece_for_target(m)
        gs, gt = g.piece_for_source(m)
        pieces.append((hu + m[len(hv) :], gt + m[len(gs) :]))
    return from_pieces(g.arity, pieces)


def invert(g: Spheromorphism) -> Spheromorphism:
    return from_pieces(g.arity, [(v, u) for u, v in g.pieces])


def equals(g: Spheromorphism, h: Spheromorphism) -> bool:
    """Equality as boundary maps; canonical tables make this structural."""
    if g.arity != h.arity:
        raise DomainError(f"arity mismatch: {g.arity} vs {h.arity}")
    return g.pieces == h.pieces


def power(g: Spheromorphism, k: int) -> Spheromorphism:
    if k < 0:
        return power(invert(g), -k)
    acc = identity(g.arity)
    for _ in range(k):
        acc = compose(g, acc)
    return acc


def conjugate(g: Spheromorphism, h: Spheromorphism) -> Spheromorphism:
    """h g h^-1."""
    return compose(h, compose(g, invert(h)))


def act_on_clopen(g: Spheromorphism, omega: ClopenSet) -> ClopenSet:
    if g.arity != omega.arity:
        raise DomainError(f"arity mismatch: {g.arity} vs {omega.arity}")
    code = refine(omega.carrier, g.sources, g.arity)
    flags = {}
    for leaf in code:
        u, v = g.piece_for_source(leaf)
        flags[v + leaf[len(u) :]] = omega.contains_word(leaf)
    return ClopenSet.from_marks(g.arity, flags)


def act_on_ball(g: Spheromorphism, ball: Ball) -> tuple[Ball, ...]:
    """Image of a ball as a tuple of pairwise disjoint balls.

    A single ball comes back whenever the cut is at or below the domain
    code; shallow cuts map to one ball per covered piece.
    """
    if not isinstance(ball, Ball):
        raise DomainError("act_on_ball expects a ball")
    u = ball.cut
    for s, t in g.pieces:
        if is_prefix(s, u):
            image_cut = t + u[len(s) :]
            return (down(image_cut) if not ball.up else up(image_cut),)
    # the cut is a proper prefix of several domain leaves
    inside = tuple(t for s, t in g.pieces if is_prefix(u, s))
    outside = tuple(t for s, t in g.pieces if not is_prefix(u, s))
    return tuple(down(t) for t in (outside if ball.up else inside))


def truncated_action(g: Spheromorphism, depth: int) -> dict[Address, Address]:
    """The induced map on all depth-`depth` words.  Universal test oracle."""
    if depth < g.depth():
        raise DomainError(
            f"depth {depth} is below the table depth {g.depth()}"
        )
    out = {}
    for u, v in g.pieces:
        for tail in _tails(g.arity, depth - len(u)):
            out[u + tail] = v + tail
    return out


def _tails(arity: int, length: int):
    if length == 0:
        yield ()
        return
    for tail in _tails(arity, length - 1):
        for c in range(arity):
            yield tail + (c,)


def displacement_parity(g: Spheromorphism) -> int | None:
    """Common parity of the depth displacement len(v) - len(u), if constant.

    Parity 0 plays the role of the color-preserving (index-two) subgroup of
    the automorphism group; the identification is a tested hypothesis, not a
    structural guarantee.  None means the parity differs between pieces.
    """
    parities = {(len(v) - len(u)) % 2 for u, v in g.pieces}
    if len(parities) == 1:
        return parities.pop()
    return None


def preserves_all_balls(g: Spheromorphism, extra_depth: int = 2) -> bool:
    """Independent automorphism oracle: every ball maps to a ball, both ways.

    Cuts deeper than the table act literally, so checking every cut down to
    table depth plus the margin decides the property for all balls.  A map
    sending balls to balls bijectively is induced by a tree isomorphism
    (balls are mid-edges; inclusion recovers adjacency), so this is the
    extendability test, built only from table/refinement primitives.
    """
    for element in (g, invert(g)):
        bound = element.depth() + extra_depth
        for depth in range(1, bound + 1):
            for word in _all_cuts(element.arity, depth):
                balls = act_on_ball(element, down(word))
                if len(balls) == 1:
                    continue
                image = ClopenSet.from_balls(element.arity, list(balls))
                if not image.is_single_ball():
                    return False
    return True


def _all_cuts(arity: int, depth: int):
    for first in range(arity + 1):
        for tail in _tails(arity, depth - 1):
            yield (first,) + tail


# ---------------------------------------------------------------------------
# constructors for notable elements
# ---------------------------------------------------------------------------


def finitary_automorphism(
    arity: int,
    root_perm: Sequence[int] | None = None,
    child_perms: Mapping[Address, Sequence[int]] | None = None,
) -> Spheromorphism:
    """Automorphism moving only a finite neighborhood of the root.

    `root_perm` permutes the n+1 root children; `child_perms[v]` permutes
    the n children of the non-root vertex v (keyed by the source vertex).
    All omitted permutations are trivial.
    """
    check_arity(arity)
    rp = tuple(root_perm) if root_perm is not None else tuple(range(arity + 1))
    if sorted(rp) != list(range(arity + 1)):
        raise ValidationError(f"root permutation {rp!r} is not a permutation of 0..{arity}")
    perms: dict[Address, tuple[int, ...]] = {}
    for vertex, perm in (child_perms or {}).items():
        addr = validate_address(vertex, arity, "permutation vertex")
        if not addr:
            raise ValidationError("use root_perm for the root vertex")
        p = tuple(perm)
        if sorted(p) != list(range(arity)):
            raise ValidationError(
                f"child permutation {p!r} at {format_address(addr)} is invalid"
            )
        if p != tuple(range(arity)):
            perms[addr] = p
    depth = 1 + max((len(v) for v in perms), default=0)
    pieces = []
    for word in _all_cuts(arity, depth):
        image = [rp[word[0]]]
        for k in range(1, len(word)):
            perm = perms.get(word[:k])
            image.append(perm[word[k]] if perm else word[k])
        pieces.append((word, tuple(image)))
    return from_pieces(arity, pieces)


def witness_nonautomorphism() -> Spheromorphism:
    """A 4-piece element of arity 2 outside the automorphism subgroup.

    It tears the ball under 0 apart: the image of Down(0) is the union of
    Down(0) and Down(20), which is not a ball.
    """
    return from_pieces(
        2,
        [((0, 0), (0,)), ((0, 1), (2, 0)), ((1,), (1,)), ((2,), (2, 1))],
    )


def witness_translation() -> Spheromorphism:
    """A hyperbolic translation of arity 2: an automorphism moving the root.

    The table has pieces of unequal depth displacement, so it is not
    finitary, yet every ball still maps to a ball.
    """
    return from_pieces(
        2,
        [
            ((0, 0), (0, 0, 0)),
            ((0, 1), (0, 0, 1)),
            ((1, 0), (2,)),
            ((1, 1, 0), (1, 0)),
            ((1, 1, 1), (1, 1)),
            ((2,), (0, 1)),
        ],
    )


def thompson_generators() -> tuple[Spheromorphism, Spheromorphism, Spheromorphism]:
    """Tree-pair generators of Thompson's circle group inside arity 2.

    Returns (rotation, a, b): the order-3 rotation of the root star plus the
    two standard interval-subdivision generators, written on the coding with
    three top-level arcs.  The rotation is an automorphism; a and b are not.
    """
    rotation = from_pieces(2, [((0,), (1,)), ((1,), (2,)), ((2,), (0,))])
    a = from_pieces(
        2,
        [
            ((0, 0), (0, 0, 0)),
            ((0, 1, 0), (0, 0, 1)),
            ((0, 1, 1), (0, 1)),
            ((1,), (1,)),
            ((2,), (2,)),
        ],
    )
    b = from_pieces(
        2,
        [
            ((0, 0), (0, 0)),
            ((0, 1, 0), (0, 1, 0, 0)),
            ((0, 1, 1, 0), (0, 1, 0, 1)),
            ((0, 1, 1, 1), (0, 1, 1)),
            ((1,), (1,)),
            ((2,), (2,)),
        ],
    )
    return (rotation, a, b)


def random_element(arity: int, budget: int, seed: int) -> Spheromorphism:
    """Deterministic pseudo-random element with at most `budget` leaves.

    Draws a finitary automorphism about a quarter of the time and a random
    leaf pairing otherwise, so both automorphisms and proper spheromorphisms
    occur in any long seed sweep.
    """
    check_arity(arity)
    if budget < arity + 1:
        raise DomainError(f"budget {budget} is below the minimal table size {arity + 1}")
    rng = random.Random(f"element:{arity}:{budget}:{seed}")
    if rng.random() < 0.25:
        return _random_finitary(rng, arity, budget)
    splits = 0
    max_splits = (budget - (arity + 1)) // (arity - 1)
    if max_splits > 0:
        splits = rng.randint(0, max_splits)
    source = _random_code(rng, arity, splits)
    target = _random_code(rng, arity, splits)
    target_list = sorted(target)
    rng.shuffle(target_list)
    return from_pieces(arity, list(zip(sorted(source), target_list)))


def _random_code(rng: random.Random, arity: int, splits: int) -> list[Address]:
    code = list(root_code(arity))
    for _ in range(splits):
        leaf = code.pop(rng.randrange(len(code)))
        code.extend(children(leaf, arity))
    return code


def _random_finitary(rng: random.Random, arity: int, budget: int) -> Spheromorphism:
    while True:
        rp = list(range(arity + 1))
        rng.shuffle(rp)
        perms = {}
        for _ in range(rng.randint(0, 2)):
            depth = rng.randint(1, 2)
            vertex = (rng.randrange(arity + 1),) + tuple(
                rng.randrange(arity) for _ in range(depth - 1)
            )
            perm = list(range(arity))
            rng.shuffle(perm)
            perms[vertex] = perm
        g = finitary_automorphism(arity, rp, perms)
        if len(g.pieces) <= budget:
            return g
