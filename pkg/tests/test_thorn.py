import random

import pytest

from spherotree.errors import DomainError, ValidationError
from spherotree.thorn import (
    UP,
    AbstractThorn,
    SubThorn,
    ThornCode,
    abstract_from_code,
    ball_of_spike,
    canonical_code,
    classify_clopen,
    clopen_of_subthorn,
    empty_subthorn,
    enumerate_embeddings,
    maximal_balls,
    reduce_subthorn,
    single_spike_subthorn,
    subthorn_from_balls,
)
from spherotree.tree import (
    FULL_BOUNDARY,
    ROOT,
    ClopenSet,
    all_words,
    ball_relation,
    depth_members,
    down,
    parse_address,
    up,
    upsilon,
)


def A(text, arity=2):
    return parse_address(text, arity)


def _random_clopen(rng, arity, max_depth=3):
    while True:
        leaves = [(c,) for c in range(arity + 1)]
        for _ in range(rng.randint(0, 4)):
            i = rng.randrange(len(leaves))
            leaf = leaves.pop(i)
            if len(leaf) >= max_depth:
                leaves.append(leaf)
                continue
            leaves.extend(leaf + (c,) for c in range(arity))
        flags = {leaf: rng.random() < 0.5 for leaf in leaves}
        if any(flags.values()) and not all(flags.values()):
            return ClopenSet.from_marks(arity, flags)


def _random_subthorn(rng, arity, max_v=4, allow_empty_spikes=True):
    verts = {ROOT if rng.random() < 0.4 else (rng.randrange(arity + 1),)}
    for _ in range(rng.randrange(max_v)):
        v = rng.choice(sorted(verts))
        opts = [w for w in _nbrs(v, arity) if w not in verts]
        if opts:
            verts.add(rng.choice(opts))
    spikes = set()
    for v in verts:
        for d in ([UP] if v else []) + list(range(arity + (0 if v else 1))):
            w = v[:-1] if d == UP else v + (d,)
            if w not in verts and rng.random() < 0.45:
                spikes.add((v, d))
    if not spikes and not allow_empty_spikes:
        v = sorted(verts)[0]
        for d in ([UP] if v else []) + list(range(arity + (0 if v else 1))):
            w = v[:-1] if d == UP else v + (d,)
            if w not in verts:
                spikes.add((v, d))
                break
    return SubThorn(arity, frozenset(verts), frozenset(spikes))


def _nbrs(v, arity):
    out = [v + (c,) for c in range(arity + 1 if not v else arity)]
    if v:
        out.append(v[:-1])
    return out


# ---------------------------------------------------------------------------
# construction and reduction
# ---------------------------------------------------------------------------


def test_sibling_pair_reduces_to_single_ball():
    t = subthorn_from_balls([down(A("00")), down(A("01"))], 2)
    r = reduce_subthorn(t)
    assert r.vertices == frozenset({ROOT})
    assert r.spikes == frozenset({(ROOT, 0)})
    assert clopen_of_subthorn(r) == ClopenSet.from_balls(2, [down(A("0"))])


def test_two_ball_set_has_two_vertex_thorn():
    t = reduce_subthorn(subthorn_from_balls([down(A("0")), down(A("20"))], 2))
    assert len(t.vertices) == 2
    assert t.balls() == (down(A("0")), down(A("20")))
    code = canonical_code(t)
    assert code.text == "(1:(1:))"
    assert code.vertex_count == 2
    assert code.spike_count == 2
    assert code.diameter == 1


def test_root_star_is_perfect_and_reduces_to_empty():
    t = subthorn_from_balls([down((c,)) for c in range(3)], 2)
    assert t.is_perfect
    assert clopen_of_subthorn(t) is FULL_BOUNDARY
    assert reduce_subthorn(t).is_empty
    assert canonical_code(reduce_subthorn(t)).is_empty


def test_lone_vertex_relocation():
    # two root children form the complement of the third: one ball one edge out
    t = subthorn_from_balls([down(A("0")), down(A("1"))], 2)
    r = reduce_subthorn(t)
    assert r.vertices == frozenset({(2,)})
    assert r.spikes == frozenset({((2,), UP)})
    assert r.balls() == (up(A("2")),)


def test_complement_pair_rejected():
    with pytest.raises(DomainError):
        subthorn_from_balls([down(A("01")), up(A("01"))], 2)


def test_overlapping_balls_rejected():
    with pytest.raises(DomainError):
        subthorn_from_balls([down(A("0")), down(A("01"))], 2)


def test_subthorn_validation():
    with pytest.raises(ValidationError):
        SubThorn(2, frozenset({ROOT, (0, 0)}), frozenset())  # not connected
    with pytest.raises(ValidationError):
        SubThorn(2, frozenset({ROOT, (0,)}), frozenset({(ROOT, 0)}))  # internal spike
    with pytest.raises(ValidationError):
        SubThorn(2, frozenset({(0,)}), frozenset({((1,), 0)}))  # spike off thorn
    with pytest.raises(ValidationError):
        SubThorn(2, frozenset(), frozenset({(ROOT, 0)}))  # spike without vertex
    assert empty_subthorn(2).is_empty


def test_single_spike_round_trip():
    for ball in [down(A("01")), up(A("2")), down(A("0")), up(A("120", 3), )]:
        arity = 3 if max(ball.cut) > 1 or len(ball.cut) > 2 else 2
        t = single_spike_subthorn(arity, ball)
        assert t.balls() == (ball,)
        assert t.is_reduced
        omega = clopen_of_subthorn(t)
        assert omega.is_single_ball()


def test_reduction_preserves_clopen_set(rng=None):
    rng = random.Random(4205)
    for _ in range(220):
        arity = rng.choice([2, 3])
        t = _random_subthorn(rng, arity, allow_empty_spikes=False)
        r = reduce_subthorn(t)
        assert r.is_reduced
        assert reduce_subthorn(r) == r
        before = clopen_of_subthorn(t)
        if r.is_empty:
            assert before is FULL_BOUNDARY
        else:
            after = clopen_of_subthorn(r)
            assert before == after


def _random_order_reduce(t, rng):
    """Reference reducer applying moves in random order."""
    arity = t.arity
    verts = set(t.vertices)
    spikes = set(t.spikes)

    def spikes_at(v):
        return [s for s in spikes if s[0] == v]

    def internal(v):
        return [w for w in _nbrs(v, arity) if w in verts]

    def toward(v, w):
        return (v, UP) if v and w == v[:-1] else (v, w[-1])

    while True:
        if len(verts) == 1:
            (a,) = verts
            at = spikes_at(a)
            if len(at) == arity + 1:
                return empty_subthorn(arity)
            if len(at) == arity:
                used = {d for _, d in at}
                dirs = set(range(arity + 1)) if not a else set(range(arity)) | {UP}
                (d,) = dirs - used
                w = a[:-1] if d == UP else a + (d,)
                verts = {w}
                spikes = {toward(w, a)}
                continue
            break
        movable = [v for v in verts if len(spikes_at(v)) == arity]
        if not movable:
            break
        a = rng.choice(movable)
        (b,) = internal(a)
        verts.remove(a)
        spikes = {s for s in spikes if s[0] != a}
        spikes.add(toward(b, a))
    return SubThorn(arity, frozenset(verts), frozenset(spikes))


def test_reduction_is_confluent():
    rng = random.Random(977)
    for _ in range(200):
        arity = rng.choice([2, 3])
        t = _random_subthorn(rng, arity, allow_empty_spikes=False)
        expected = reduce_subthorn(t)
        for _ in range(3):
            assert _random_order_reduce(t, rng) == expected


# ---------------------------------------------------------------------------
# canonical codes
# ---------------------------------------------------------------------------


def _rooted_iso(a, ra, pa, b, rb, pb):
    if a.spike_counts[ra] != b.spike_counts[rb]:
        return False
    ka = [v for v in a.adjacency[ra] if v != pa]
    kb = [w for w in b.adjacency[rb] if w != pb]
    if len(ka) != len(kb):
        return False

    def match(i, used):
        if i == len(ka):
            return True
        for j in range(len(kb)):
            if j not in used and _rooted_iso(a, ka[i], ra, b, kb[j], rb):
                used.add(j)
                if match(i + 1, used):
                    return True
                used.discard(j)
        return False

    return match(0, set())


def _isomorphic(a: AbstractThorn, b: AbstractThorn) -> bool:
    if a.vertex_count != b.vertex_count:
        return False
    if sorted(a.spike_counts) != sorted(b.spike_counts):
        return False
    if a.vertex_count == 0:
        return True
    return any(_rooted_iso(a, 0, None, b, w, None) for w in range(b.vertex_count))


def _random_abstract(rng, arity, max_v=5):
    V = rng.randint(1, max_v)
    adj = [set() for _ in range(V)]
    for v in range(1, V):
        opts = [u for u in range(v) if len(adj[u]) < arity + 1]
        u = rng.choice(opts)
        adj[u].add(v)
        adj[v].add(u)
    counts = [rng.randint(0, arity + 1 - len(adj[v])) for v in range(V)]
    return AbstractThorn(arity, tuple(frozenset(s) for s in adj), tuple(counts))


def _relabel(t: AbstractThorn, rng) -> AbstractThorn:
    perm = list(range(t.vertex_count))
    rng.shuffle(perm)
    adj = [frozenset()] * t.vertex_count
    counts = [0] * t.vertex_count
    for v in range(t.vertex_count):
        adj[perm[v]] = frozenset(perm[w] for w in t.adjacency[v])
        counts[perm[v]] = t.spike_counts[v]
    return AbstractThorn(t.arity, tuple(adj), tuple(counts))


def test_code_equality_matches_isomorphism():
    rng = random.Random(15101)
    for _ in range(150):
        arity = rng.choice([2, 3])
        a = _random_abstract(rng, arity)
        b = _relabel(a, rng)
        assert canonical_code(a) == canonical_code(b)
        c = _random_abstract(rng, arity)
        assert (canonical_code(a) == canonical_code(c)) == _isomorphic(a, c)


def test_code_round_trip():
    rng = random.Random(88)
    for _ in range(60):
        t = _random_abstract(rng, rng.choice([2, 3]))
        code = canonical_code(t)
        again = abstract_from_code(code)
        assert canonical_code(again) == code
        assert again.vertex_count == code.vertex_count
        assert again.spike_count == code.spike_count
        assert again.skeleton_diameter() == code.diameter
        assert ThornCode.from_token(code.token) == code


def test_code_text_validation():
    for bad in ["", "(", "(1", "(1:", "(1:))", "((:))", "(1:)x", "(:)", "E(1:)"]:
        with pytest.raises(ValidationError):
            ThornCode(2, bad)
    with pytest.raises(ValidationError):
        ThornCode.from_token("zzz")
    assert ThornCode(2, "E").is_empty


def test_star_code_counts():
    t = subthorn_from_balls(
        [down(A("00")), down(A("10")), down(A("20"))], 2
    )
    code = canonical_code(reduce_subthorn(t))
    assert code.vertex_count == 4
    assert code.spike_count == 3
    assert code.diameter == 2
    assert code.text == "(0:(1:)(1:)(1:))"


# ---------------------------------------------------------------------------
# classification of clopen sets
# ---------------------------------------------------------------------------


def test_classify_simple_cases():
    ball = ClopenSet.from_balls(2, [down(A("01"))])
    assert classify_clopen(ball).text == "(1:)"
    pair = ClopenSet.from_marks(2, {A("0"): True, A("10"): True, A("11"): False, A("2"): False})
    assert classify_clopen(pair).text == "(1:(1:))"
    # sibling marks merge first: this is just a ball again
    merged = ClopenSet.from_marks(2, {A("00"): True, A("01"): True, A("1"): False, A("2"): False})
    assert classify_clopen(merged).text == "(1:)"


def test_classify_up_ball():
    omega = ClopenSet.from_marks(2, {A("0"): False, A("1"): True, A("2"): True})
    assert omega.is_single_ball()
    assert maximal_balls(omega) == (up(A("0")),)
    assert classify_clopen(omega).text == "(1:)"


def test_single_ball_iff_one_spike_class():
    rng = random.Random(315)
    for _ in range(200):
        arity = rng.choice([2, 3])
        omega = _random_clopen(rng, arity)
        code = classify_clopen(omega)
        is_ball_class = code.vertex_count == 1 and code.spike_count == 1
        assert omega.is_single_ball() == is_ball_class


def test_classify_residue_matches_upsilon():
    rng = random.Random(316)
    for _ in range(150):
        arity = rng.choice([2, 3, 4])
        omega = _random_clopen(rng, arity)
        assert classify_clopen(omega).residue() == upsilon(omega)


def _ball_members(ball, arity, depth):
    return frozenset(w for w in all_words(arity, depth) if ball.contains_word(w))


def test_maximal_balls_against_exhaustive_search():
    rng = random.Random(317)
    for _ in range(40):
        arity = rng.choice([2, 3])
        omega = _random_clopen(rng, arity, max_depth=2)
        depth = omega.depth() + 1
        k = depth + 1
        members = depth_members(omega, k)
        inside = []
        for cut_depth in range(1, depth + 1):
            for w in all_words(arity, cut_depth):
                for ball in (down(w), up(w)):
                    if _ball_members(ball, arity, k) <= members:
                        inside.append(ball)
        expected = {
            b
            for b in inside
            if not any(ball_relation(b, c) == "subset" for c in inside if c != b)
        }
        got = maximal_balls(omega)
        assert set(got) == expected
        # the maximal balls partition the set
        union = set()
        for b in got:
            part = _ball_members(b, arity, k)
            assert not union & part
            union |= part
        assert union == members


def test_classify_presentation_independent():
    rng = random.Random(318)
    for _ in range(120):
        arity = rng.choice([2, 3])
        omega = _random_clopen(rng, arity)
        rebuilt = ClopenSet.from_balls(arity, maximal_balls(omega))
        assert rebuilt == omega
        assert classify_clopen(rebuilt) == classify_clopen(omega)


# ---------------------------------------------------------------------------
# embedding enumeration
# ---------------------------------------------------------------------------


def test_enumerate_single_spike_around_edge():
    region = SubThorn(2, frozenset({ROOT, (0,)}), frozenset())
    pattern = ThornCode(2, "(1:)")
    found = enumerate_embeddings(pattern, region, radius=2)
    assert len(found) == 6
    for t in found:
        assert canonical_code(t) == pattern
        assert t.meets(region)


def test_enumerate_two_vertex_class_at_root():
    region = SubThorn(2, frozenset({ROOT}), frozenset())
    pattern = ThornCode(2, "(1:(1:))")
    found = enumerate_embeddings(pattern, region, radius=2)
    assert len(found) == 12
    for t in found:
        assert ROOT in t.vertices
        assert canonical_code(t) == pattern


def test_enumerate_rejects_small_radius():
    region = SubThorn(2, frozenset({ROOT}), frozenset())
    with pytest.raises(DomainError):
        enumerate_embeddings(ThornCode(2, "(1:(1:))"), region, radius=1)


def test_enumerate_is_exhaustive_by_random_probe():
    # every reduced thorn of the class that meets the region must be listed
    rng = random.Random(4242)
    region = SubThorn(2, frozenset({(0,)}), frozenset({((0,), 0)}))
    pattern = ThornCode(2, "(1:(1:))")
    found = set(enumerate_embeddings(pattern, region, radius=3))
    hits = 0
    for _ in range(400):
        t = _random_subthorn(rng, 2, max_v=3, allow_empty_spikes=False)
        if canonical_code(t) != pattern or not t.is_reduced:
            continue
        if t.meets(region):
            assert t in found
            hits += 1
        else:
            assert t not in found
    assert hits > 0


# ---------------------------------------------------------------------------
# orbit-class codes
# ---------------------------------------------------------------------------


def test_class_code_acceptance_and_defects():
    from spherotree.thorn import is_class_code, require_class_code

    for text in ["(1:)", "(1:(1:))", "(0:(1:)(1:))", "(1:(1:)(1:))"]:
        assert is_class_code(require_class_code(ThornCode(2, text)))
    rejected = {
        "E": "empty",
        "(0:)": "no spikes",
        "(3:)": "perfect",
        "(2:)": "not reduced",
        "(1:(2:))": "not reduced",
        "(0:(1:))": "bare skeleton leaf",
        "(1:(0:(1:)))": "canonical",
    }
    for text, hint in rejected.items():
        assert not is_class_code(ThornCode(2, text))
        with pytest.raises(ValidationError, match=hint):
            require_class_code(ThornCode(2, text))


def test_enumerate_class_codes_small():
    from spherotree.thorn import enumerate_class_codes, is_class_code

    assert [c.text for c in enumerate_class_codes(2, 0, 2)] == ["(1:)", "(1:(1:))"]
    assert [c.text for c in enumerate_class_codes(2, 0, 3)] == [
        "(1:)",
        "(1:(1:))",
        "(0:(1:)(1:))",
        "(1:(1:)(1:))",
    ]
    for arity, iota in [(3, 0), (3, 1), (4, 2)]:
        codes = enumerate_class_codes(arity, iota, 3)
        assert codes
        assert len(set(codes)) == len(codes)
        for code in codes:
            assert is_class_code(code)
            assert code.residue() == iota
            assert code.vertex_count <= 3
    with pytest.raises(ValidationError):
        enumerate_class_codes(2, 1, 3)
    with pytest.raises(ValidationError):
        enumerate_class_codes(2, 0, 0)


def test_enumerated_codes_are_realized_by_clopen_sets():
    from spherotree.thorn import enumerate_class_codes

    region = SubThorn(2, frozenset({ROOT}), frozenset())
    for code in enumerate_class_codes(2, 0, 4):
        found = enumerate_embeddings(code, region, code.diameter + 1)
        assert found, code.text
        omega = clopen_of_subthorn(found[0])
        assert classify_clopen(omega) == code


def test_random_classifications_appear_in_enumeration():
    from spherotree.thorn import enumerate_class_codes, is_class_code

    rng = random.Random("classification-census")
    for arity, bound in ((2, 6), (3, 5)):
        universe = {c.text for c in enumerate_class_codes(arity, 0, bound)}
        if arity > 2:
            universe |= {c.text for c in enumerate_class_codes(arity, 1, bound)}
        for _ in range(120):
            omega = _random_clopen(rng, arity)
            code = classify_clopen(omega)
            assert is_class_code(code)
            assert code.residue() == upsilon(omega)
            if code.vertex_count <= bound:
                assert code.text in universe
