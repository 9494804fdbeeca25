import pytest
from hypothesis import given, strategies as st

import oracles
from divlab import (DefiningGraph, GroupError, build_ball, make_cyclic_amalgam,
                    make_direct_product, make_free, make_free_product, make_gersten,
                    make_group, make_raag, make_zn, path_raag)
from divlab.groups import invert_word


def words(ngens, max_len):
    return st.lists(st.integers(0, ngens - 1), max_size=max_len)


def pairs_of(ngens, max_len):
    return st.tuples(words(ngens, max_len), words(ngens, max_len))


def letters(word):
    """Package symbol ids -> oracle letters (generator, sign)."""
    return [(s // 2, -1 if s % 2 else 1) for s in word]


# ---------------------------------------------------------------- ZN

def test_zn_examples():
    Z2 = make_zn(2)
    assert Z2.element("e1 e2 e1^-1") == (0, 1)
    Z1 = make_zn(1)
    assert Z1.element("") == (0,)
    assert make_zn(3).element("e1 e1 e3^-1") == (2, 0, -1)
    assert Z2.mul((3, 1), 3) == (3, 0)


def test_zn_rejects_zero_rank():
    with pytest.raises(GroupError):
        make_zn(0)


@given(pairs_of(4, 8))
def test_zn_keys_match_oracle(pair):
    G = make_zn(2)
    w1, w2 = pair
    same = oracles.zn_value(letters(w1), 2) == oracles.zn_value(letters(w2), 2)
    assert (G.key(G.evaluate(w1)) == G.key(G.evaluate(w2))) == same


# ---------------------------------------------------------------- free

def test_free_examples():
    F = make_free(2)
    assert F.format(F.element("a b b^-1 a")) == "a a"
    assert F.is_identity(F.element("a a^-1"))
    assert F.format(F.element("b a^-1 a b")) == "b b"
    assert F.format(F.inv(F.element("a b"))) == "b^-1 a^-1"


@given(pairs_of(4, 8))
def test_free_keys_match_oracle(pair):
    F = make_free(2)
    w1, w2 = pair
    trivial = not oracles.free_reduce(letters(w1) + oracles.invert(letters(w2)))
    assert (F.key(F.evaluate(w1)) == F.key(F.evaluate(w2))) == trivial


# ---------------------------------------------------------------- RAAG

def test_raag_shortlex_example_matches_oracle():
    P3 = path_raag(3)
    got = P3.word_of(P3.element("c b a"))
    want = oracles.raag_shortlex(letters(P3.parse_word("c b a")), oracles.path_commute(3))
    assert letters(got) == list(want)


def test_raag_trivial_examples():
    P3 = path_raag(3)
    assert P3.is_identity(P3.element("a a^-1"))
    assert P3.format(P3.element("a c")) == "a c"
    assert P3.format(P3.element("b a")) == "a b"


@given(words(6, 6))
def test_raag_normal_form_is_shortlex_least(w):
    P3 = path_raag(3)
    want = oracles.raag_shortlex(letters(w), oracles.path_commute(3))
    assert letters(P3.word_of(P3.evaluate(w))) == list(want)


@given(pairs_of(8, 8))
def test_raag_keys_match_oracle(pair):
    P4 = path_raag(4)
    w1, w2 = pair
    trivial = oracles.raag_trivial(letters(w1) + oracles.invert(letters(w2)),
                                   oracles.path_commute(4))
    assert (P4.key(P4.evaluate(w1)) == P4.key(P4.evaluate(w2))) == trivial


def test_defining_graph_rejects_loops_and_duplicates():
    with pytest.raises(GroupError):
        DefiningGraph(3, ((0, 0),))
    with pytest.raises(GroupError):
        DefiningGraph(3, ((0, 1), (1, 0)))


def test_raag_square_is_z2_squared():
    G = make_raag(DefiningGraph(2, ((0, 1),)))
    assert G.equal(G.element("a b"), G.element("b a"))


# ---------------------------------------------------------------- products

def test_direct_product_bijects_with_z2():
    D = make_direct_product(make_zn(1), make_zn(1))
    Z = make_zn(2)
    bd, bz = build_ball(D, 4), build_ball(Z, 4)
    assert len(bd) == len(bz)
    # words over the matching generators land on matching keys
    pairs = {}
    for _k, x, _d, _p in bz.entries():
        w = Z.word_of(x)
        kd = D.key(D.evaluate(w))
        assert pairs.setdefault(kd, Z.key(x)) == Z.key(x)
    assert len(pairs) == len(bz)
    assert D.is_identity(D.product(D.identity, D.identity))


def test_free_product_sphere_sizes_match_free_group():
    FP = make_free_product(make_zn(1), make_zn(1))
    assert build_ball(FP, 6).sphere_sizes() == build_ball(make_free(2), 6).sphere_sizes()


# ---------------------------------------------------------------- Gersten

def test_gersten_examples():
    G = make_gersten()
    assert G.element("t a t^-1") == G.element("a b")
    assert G.element("t a t^-1") == (G.element("a b")[0], 0)
    assert G.element("t b t^-1") == G.element("b")
    assert G.is_identity(G.element("a a^-1"))
    assert G.is_identity(G.element("t a t^-1 b^-1 a^-1"))


@given(pairs_of(6, 8))
def test_gersten_keys_match_oracle(pair):
    G = make_gersten()
    w1, w2 = pair
    same = oracles.gersten_value(letters(w1)) == oracles.gersten_value(letters(w2))
    assert (G.key(G.evaluate(w1)) == G.key(G.evaluate(w2))) == same


def test_gersten_b_t_commute():
    G = make_gersten()
    for i in range(-3, 4):
        for j in range(-3, 4):
            bi = G.element(" ".join(["b" if i > 0 else "b^-1"] * abs(i)))
            tj = G.element(" ".join(["t" if j > 0 else "t^-1"] * abs(j)))
            comm = G.product(G.product(bi, tj), G.product(G.inv(bi), G.inv(tj)))
            assert G.is_identity(comm)


# ---------------------------------------------------------------- amalgams

def _z2_amalgam():
    a, b = make_zn(2), make_zn(2)
    return make_cyclic_amalgam(a, b, a.element("e1"), b.element("e1"))


def test_amalgam_matches_p3_raag():
    # Z^2 *_Z Z^2 along e1 is the RAAG on the path x - e - y
    A = _z2_amalgam()
    P3 = make_raag(DefiningGraph(3, ((0, 1), (1, 2))), ["x", "e", "y"])
    # A-letters: e1_1 -> e, e2_1 -> x, e1_2 -> e, e2_2 -> y
    to_p3 = {0: 2, 1: 3, 2: 0, 3: 1, 4: 2, 5: 3, 6: 4, 7: 5}
    ball = build_ball(A, 4)
    classes = {}
    for _k, x, _d, _p in ball.entries():
        kp = P3.key(P3.evaluate([to_p3[s] for s in A.word_of(x)]))
        assert kp not in classes
        classes[kp] = x
    assert len(classes) == len(build_ball(P3, 4))


def test_amalgam_edge_identification():
    A = _z2_amalgam()
    assert A.equal(A.element("e1_1 e1_1"), A.element("e1_2 e1_2"))
    assert A.is_identity(A.element(""))


@given(pairs_of(8, 6))
def test_amalgam_equality_matches_raag_oracle(pair):
    A = _z2_amalgam()
    to_p3 = {0: 2, 1: 3, 2: 0, 3: 1, 4: 2, 5: 3, 6: 4, 7: 5}
    w1, w2 = pair
    # P3 on x - e - y: x=0, e=1, y=2
    word = letters([to_p3[s] for s in w1]) + oracles.invert(letters([to_p3[s] for s in w2]))
    trivial = oracles.raag_trivial(word, oracles.path_commute(3))
    assert A.equal(A.evaluate(w1), A.evaluate(w2)) == trivial


# ---------------------------------------------------------------- generic invariants

MODELS = [make_zn(2), make_free(2), path_raag(4), make_gersten(),
          make_direct_product(make_free(2), make_zn(1)), _z2_amalgam()]


@pytest.mark.parametrize("G", MODELS, ids=lambda G: G.family)
def test_mul_then_inverse_symbol_is_identity_map(G):
    R = 4 if G.family == "amalgam" else 6 if G.family in ("zn",) else 5
    for _k, x, _d, _p in build_ball(G, R).entries():
        for s in range(G.ngens):
            assert G.equal(G.mul(G.mul(x, s), s ^ 1), x)


@pytest.mark.parametrize("G", MODELS, ids=lambda G: G.family)
@given(data=st.data())
def test_word_times_inverse_is_identity(G, data):
    w = data.draw(words(G.ngens, 10))
    assert G.is_identity(G.evaluate(w + invert_word(w)))
    assert G.evaluate([]) == G.identity or G.is_identity(G.evaluate([]))
    assert G.word_of(G.identity) == []


@pytest.mark.parametrize("G", MODELS[:4], ids=lambda G: G.family)
@given(data=st.data())
def test_canon_is_idempotent(G, data):
    x = G.evaluate(data.draw(words(G.ngens, 8)))
    assert G.canon(G.canon(x)) == G.canon(x)
    assert G.evaluate(G.word_of(x)) == x


def test_make_group_round_trip():
    assert make_group({"family": "raag", "path": 4}).describe() == path_raag(4).describe()
    with pytest.raises(GroupError):
        make_group({"family": "nope"})
    with pytest.raises(GroupError):
        make_group({"n": 2})


def test_inverse_symbols_are_an_involution():
    for G in MODELS:
        labels = [G.label(s) for s in range(G.ngens)]
        assert len(set(labels)) == len(labels)
        for s in range(G.ngens):
            assert G.check_symbol(s ^ 1) ^ 1 == s
