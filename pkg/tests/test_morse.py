import pytest

import oracles
from divlab import (DivergenceParams, axis_divergence, build_ball, contraction_profile,
                    make_axis, make_free, make_zn, morse_witness, quadratic_lower_audit)
from divlab.cayley import Censored, Finite
from divlab.divergence import DivergenceSample, DivergenceTable
from divlab.morse import is_quasi_geodesic, sample_centers
from divlab.order import NOT_PRECEQ, PRECEQ, UNDETERMINED


def lt(word):
    return tuple((s // 2, -1 if s % 2 else 1) for s in word)


@pytest.fixture(scope="module")
def f2():
    F = make_free(2)
    return F, build_ball(F, 9)


@pytest.fixture(scope="module")
def z2():
    Z = make_zn(2)
    return Z, build_ball(Z, 10)


def test_axis_points(z2):
    Z, ball = z2
    ax = make_axis(Z, (1, 0), 3)
    assert ax.points == [(k, 0) for k in range(-3, 4)]
    assert ax.norms == [3, 2, 1, 0, 1, 2, 3]


def test_axis_rejects_identity_and_bad_span(z2):
    Z, _ = z2
    with pytest.raises(ValueError):
        make_axis(Z, (0, 0), 3)
    with pytest.raises(ValueError):
        make_axis(Z, (1, 0), 0)


@pytest.mark.parametrize("word", ["a", "a b", "a a b", "a b^-1", "a b a^-1", "a a b b"])
def test_free_axes_contract(f2, word):
    F, ball = f2
    ax = make_axis(F, F.element(word), 3, ball)
    cs = sample_centers(F, ax, ball, 12, seed=2, max_offset=3)
    rep = contraction_profile(F, ax, cs, ball)
    assert rep.D_estimate <= 1 and rep.scale_limited
    axis = [lt(F.word_of(p)) for p in ax.points]
    for s in rep.samples:
        assert s.sampled == s.total
        assert s.diameter == oracles.f2_projection_diameter(lt(F.word_of(s.center)), axis, s.radius)


def test_z2_axis_projection_grows(z2):
    Z, ball = z2
    ax = make_axis(Z, (1, 0), 10)
    cs = [(0, k) for k in range(3, 9)]
    rep = contraction_profile(Z, ax, cs, ball)
    diams = [s.diameter for s in rep.samples]
    assert diams == [oracles.z2_projection_diameter((0, k), ax.points, k - 1) for k in range(3, 9)]
    assert all(d >= k - 1 for d, k in zip(diams, range(3, 9)))
    assert all(b > a for a, b in zip(diams, diams[1:]))


def test_zero_radius_ball(z2):
    Z, ball = z2
    rep = contraction_profile(Z, make_axis(Z, (1, 0), 4), [(2, 1)], ball)
    assert rep.samples[0].radius == 0 and rep.samples[0].diameter == 0


def test_center_on_axis_rejected(z2):
    Z, ball = z2
    with pytest.raises(ValueError):
        contraction_profile(Z, make_axis(Z, (1, 0), 4), [(2, 0)], ball)


def test_contraction_sampling_is_seeded(z2):
    Z, ball = z2
    ax = make_axis(Z, (1, 0), 10)
    a = contraction_profile(Z, ax, [(0, 8)], ball, sample_cap=20, seed=5)
    b = contraction_profile(Z, ax, [(0, 8)], ball, sample_cap=20, seed=5)
    assert a.samples[0].sampled == 20 and a.samples == b.samples


# ---------------------------------------------------------------- Morse

def test_free_axis_geodesics_stay_on_axis(f2):
    F, ball = f2
    ax = make_axis(F, F.element("a"), 3, ball)
    w = morse_witness(F, ax, 1, 0, pairs=[(0, 6)], ball=ball)
    assert w.max_deviation == 0 and w.accepted >= 1


def test_z2_l_shaped_path_deviates(z2):
    Z, ball = z2
    ax = make_axis(Z, (1, 0), 8)
    up, right, down = [2] * 3, [0] * 5, [3] * 3
    w = morse_witness(Z, ax, 1, 6, pairs=[], ball=ball, paths=[((0, 0), up + right + down)])
    assert w.max_deviation == 3 and w.scale_limited
    assert all(d >= 0 for d in w.deviations)


def test_quasi_geodesic_check():
    d = lambda x, y: abs(x - y)
    assert is_quasi_geodesic(d, [0, 1, 2, 3], 1, 0)
    assert not is_quasi_geodesic(d, [0, 1, 0, 1], 1, 0)


# ---------------------------------------------------------------- quadratic audit

def _table(ys, xs, censored_at=None):
    samples = []
    for x, y in zip(xs, ys):
        v = Censored(int(y)) if x == censored_at else Finite(int(y))
        samples.append(DivergenceSample(x, v))
    return DivergenceTable("synthetic", "axis", DivergenceParams(), samples)


def test_quadratic_audit_examples():
    xs = list(range(4, 33))
    assert quadratic_lower_audit(_table([r * r + r for r in xs], xs)).relation == PRECEQ
    v = quadratic_lower_audit(_table([3 * r for r in xs], xs))
    assert v.relation == NOT_PRECEQ and v.C == 64
    v = quadratic_lower_audit(_table([r * r for r in xs], xs, censored_at=10))
    assert v.relation == UNDETERMINED and "censored" in v.detail


def test_quadratic_audit_needs_four_points():
    with pytest.raises(ValueError):
        quadratic_lower_audit(_table([1, 4, 9], [1, 2, 3]))


def test_contraction_implies_audit_not_refuted(f2, z2):
    # a small projection diameter with a finite axis table must not refute x^2
    for G, ball, g in ((f2[0], f2[1], f2[0].element("a")), (z2[0], z2[1], (1, 0))):
        ax = make_axis(G, g, 3, ball)
        rep = contraction_profile(G, ax, sample_centers(G, ax, ball, 8, 1, 3), ball)
        tab = axis_divergence(G, g, range(3, 9), DivergenceParams(0.5, 2.0))
        if rep.D_estimate <= 1 and tab.all_finite():
            assert quadratic_lower_audit(tab).relation != NOT_PRECEQ
