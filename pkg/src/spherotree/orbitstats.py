"""Orbit transition statistics: how an element moves clopen sets between classes.

A class table fixes a residue sector and a finite list of tracked orbit
classes (thorn codes); every other class of that residue is lumped into a
single background class ``P``.  For a table element g, only finitely many
clopen sets change class: their reduced thorns must touch the minimal
matched thorn pair of g.  ``moved_sets`` lists them exactly, ``theta``
tabulates the counts, and ``theta_bruteforce`` recomputes the same counts by
sweeping every tracked-class set of bounded carrier depth, as an
independent (much slower) oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import chain

from .bithorn import minimal_bithorn
from .element import Spheromorphism, act_on_ball, invert
from .errors import DomainError, InternalError, ValidationError
from .thorn import (
    ThornCode,
    canonical_code,
    clopen_of_subthorn,
    enumerate_embeddings,
    reduce_subthorn,
    require_class_code,
    subthorn_from_balls,
)
from .tree import Ball, ClopenSet, balls_disjoint, check_arity, down, up

LUMP_LABEL = "P"


@dataclass(frozen=True)
class ClassTable:
    """A residue sector and the orbit classes tracked individually within it."""

    arity: int
    iota: int
    tracked: tuple[ThornCode, ...]

    def __post_init__(self) -> None:
        check_arity(self.arity)
        if not 0 <= self.iota <= self.arity - 2:
            raise ValidationError(
                f"residue {self.iota} is out of range for arity {self.arity}"
            )
        if not self.tracked:
            raise ValidationError("a class table needs at least one tracked class")
        seen = set()
        for code in self.tracked:
            if code.arity != self.arity:
                raise ValidationError(f"class {code.token} has the wrong arity")
            require_class_code(code)
            if code.residue() != self.iota:
                raise ValidationError(
                    f"class {code.token} has residue {code.residue()}, table wants {self.iota}"
                )
            if code in seen:
                raise ValidationError(f"class {code.token} is tracked twice")
            seen.add(code)

    @property
    def labels(self) -> tuple[str, ...]:
        return (LUMP_LABEL,) + tuple(code.token for code in self.tracked)

    def index_of(self, code: ThornCode) -> int:
        """Matrix index of a class code: 0 for lumped, 1.. for tracked."""
        for i, tracked in enumerate(self.tracked):
            if tracked == code:
                return i + 1
        return 0


@dataclass(frozen=True)
class MovedSet:
    """One clopen set whose class changes, with its image and both classes."""

    omega: ClopenSet
    before: ThornCode
    image: ClopenSet
    after: ThornCode


@dataclass(frozen=True)
class TransitionCounts:
    """Class-to-class transition counts; the infinite diagonal is omitted."""

    table: ClassTable
    matrix: tuple[tuple[int | None, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.table.tracked) + 1
        if len(self.matrix) != size or any(len(row) != size for row in self.matrix):
            raise ValidationError("transition matrix size disagrees with the table")
        for i, row in enumerate(self.matrix):
            for j, value in enumerate(row):
                if i == j:
                    if value is not None:
                        raise ValidationError("diagonal transition counts are not finite")
                elif not isinstance(value, int) or value < 0:
                    raise ValidationError(f"bad count {value!r} at ({i},{j})")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.table.labels

    def entry(self, source_label: str, target_label: str) -> int | None:
        labels = self.labels
        try:
            i = labels.index(source_label)
            j = labels.index(target_label)
        except ValueError:
            raise DomainError(f"unknown class label among {labels}") from None
        return self.matrix[i][j]

    def transpose(self) -> "TransitionCounts":
        size = len(self.matrix)
        flipped = tuple(
            tuple(self.matrix[j][i] for j in range(size)) for i in range(size)
        )
        return TransitionCounts(self.table, flipped)


@lru_cache(maxsize=1024)
def moved_sets(g: Spheromorphism, table: ClassTable) -> tuple[MovedSet, ...]:
    """Every clopen set involving a tracked class whose class changes under g.

    Covers both directions: tracked sets leaving their class, and lumped
    sets entering a tracked class.  A set whose class changes must have its
    reduced thorn touch the minimal matched pair of the element (sets whose
    thorns avoid it sit inside one matched ball and keep their class), so
    enumerating embeddings around the pair is exhaustive.

    Classification goes through ball images directly; the clopen normal
    forms are only built for the sets that actually change class.  Both
    arguments are immutable, so results are cached.
    """
    if g.arity != table.arity:
        raise DomainError(f"arity mismatch: {g.arity} vs {table.arity}")
    pair = minimal_bithorn(g)
    if pair.is_empty:
        return ()
    arity = g.arity
    inverse = invert(g)
    tracked = set(table.tracked)
    records: dict[tuple, MovedSet] = {}
    for pattern in table.tracked:
        radius = pattern.diameter + 1
        for thorn in enumerate_embeddings(pattern, pair.dom, radius):
            balls = thorn.balls()
            image_balls = tuple(
                sorted(chain.from_iterable(act_on_ball(g, b) for b in balls))
            )
            if image_balls == balls:
                continue  # the set itself is fixed
            after = _classify_balls(image_balls, arity)
            if after != pattern:
                omega = clopen_of_subthorn(thorn)
                image = ClopenSet.from_balls(arity, image_balls)
                records[omega.leaf_flags()] = MovedSet(omega, pattern, image, after)
        for thorn in enumerate_embeddings(pattern, pair.ran, radius):
            balls = thorn.balls()
            source_balls = tuple(
                sorted(chain.from_iterable(act_on_ball(inverse, b) for b in balls))
            )
            if source_balls == balls:
                continue
            before = _classify_balls(source_balls, arity)
            if before not in tracked:
                omega = ClopenSet.from_balls(arity, source_balls)
                image = clopen_of_subthorn(thorn)
                records[omega.leaf_flags()] = MovedSet(omega, before, image, pattern)
    return tuple(records[key] for key in sorted(records))


def _tabulate(table: ClassTable, transitions) -> TransitionCounts:
    size = len(table.tracked) + 1
    counts = [[0] * size for _ in range(size)]
    for i, j in transitions:
        if i == j:
            raise InternalError("a class transition cannot sit on the diagonal")
        counts[i][j] += 1
    matrix = tuple(
        tuple(None if i == j else counts[i][j] for j in range(size))
        for i in range(size)
    )
    return TransitionCounts(table, matrix)


def theta(g: Spheromorphism, table: ClassTable) -> TransitionCounts:
    """Transition counts of g over the table, from the exact moved-set listing."""
    return _tabulate(
        table,
        (
            (table.index_of(rec.before), table.index_of(rec.after))
            for rec in moved_sets(g, table)
        ),
    )


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


def _all_balls(arity: int, depth: int) -> tuple[Ball, ...]:
    cuts = [(c,) for c in range(arity + 1)]
    balls = []
    for _ in range(depth):
        balls.extend(chain.from_iterable((down(u), up(u)) for u in cuts))
        cuts = [u + (c,) for u in cuts for c in range(arity)]
    return tuple(balls)


@lru_cache(maxsize=32)
def _classified_unions(
    arity: int, depth: int, count: int
) -> tuple[tuple[tuple[Ball, ...], ThornCode], ...]:
    """All unions of ``count`` disjoint balls of cut depth <= depth, classified.

    Each entry is (maximal balls of the set, class code); distinct entries
    are distinct sets.  Unions covering the whole boundary are dropped.
    """
    balls = _all_balls(arity, depth)
    results: dict[tuple[Ball, ...], ThornCode] = {}

    def extend(start: int, chosen: list[Ball]) -> None:
        if len(chosen) == count:
            if count == 2 and chosen[0].cut == chosen[1].cut:
                return  # the two halves of one mid-edge cover everything
            thorn = reduce_subthorn(subthorn_from_balls(chosen, arity))
            if thorn.is_empty or thorn.is_perfect:
                return  # the union is the whole boundary
            key = thorn.balls()
            if key not in results:
                results[key] = canonical_code(thorn)
            return
        for i in range(start, len(balls)):
            candidate = balls[i]
            if all(balls_disjoint(candidate, b) for b in chosen):
                chosen.append(candidate)
                extend(i + 1, chosen)
                chosen.pop()

    extend(0, [])
    return tuple(sorted(results.items(), key=lambda item: item[0]))


def _classify_balls(balls: tuple[Ball, ...], arity: int) -> ThornCode:
    return canonical_code(reduce_subthorn(subthorn_from_balls(balls, arity)))


def theta_bruteforce(g: Spheromorphism, table: ClassTable, depth: int) -> TransitionCounts:
    """Transition counts recomputed by sweeping all bounded-depth candidates.

    The pool holds every set of a tracked class whose carrier reaches at
    most ``depth``; the depth must exceed the table depth of g plus the
    largest tracked diameter, so that every set that can change class (in
    either direction) is inside the pool.
    """
    if g.arity != table.arity:
        raise DomainError(f"arity mismatch: {g.arity} vs {table.arity}")
    max_diameter = max(code.diameter for code in table.tracked)
    needed = g.depth() + max_diameter + 1
    if depth < needed:
        raise DomainError(
            f"depth {depth} cannot certify this element; it needs at least {needed}"
        )
    tracked = {code: i + 1 for i, code in enumerate(table.tracked)}
    pool: dict[tuple[Ball, ...], ThornCode] = {}
    for count in sorted({code.spike_count for code in table.tracked}):
        for key, code in _classified_unions(g.arity, depth, count):
            if code in tracked:
                pool[key] = code
    inverse = invert(g)
    transitions = []
    for balls, code in pool.items():
        i = tracked[code]
        image = tuple(sorted(chain.from_iterable(act_on_ball(g, b) for b in balls)))
        if image != balls:
            after = _classify_balls(image, g.arity)
            if after != code:
                transitions.append((i, tracked.get(after, 0)))
        source = tuple(
            sorted(chain.from_iterable(act_on_ball(inverse, b) for b in balls))
        )
        if source != balls:
            before = _classify_balls(source, g.arity)
            if before not in tracked:
                transitions.append((0, i))
    return _tabulate(table, transitions)
