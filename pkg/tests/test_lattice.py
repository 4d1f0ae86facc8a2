import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varlab.errors import ValidationError
from varlab.lattice import (
    LatticeFamily,
    LatticeFunction,
    MeasureSpace,
    lattice_maximal_norm,
    lattice_variation_norm,
    mixed_norm,
)
from varlab.variation import vq_norm_oracle


def _fn(values, om=None, sg=None):
    values = np.asarray(values, dtype=float)
    om = om or MeasureSpace.counting(values.shape[0])
    sg = sg or MeasureSpace.counting(values.shape[1])
    return LatticeFunction(om, sg, values)


def test_measure_rejects_nonpositive():
    with pytest.raises(ValidationError):
        MeasureSpace([1.0, -0.5])
    with pytest.raises(ValidationError):
        MeasureSpace([1.0, 0.0])


def test_mixed_norm_trivial_cases():
    assert mixed_norm(_fn(np.zeros((3, 2))), 2, 2) == 0.0
    om, sg = MeasureSpace.probability(4), MeasureSpace.probability(3)
    one = LatticeFunction(om, sg, np.ones((4, 3)))
    for p in (1.5, 2, 7):
        for r in (1, 2, 3.5):
            assert mixed_norm(one, p, r) == pytest.approx(1.0, rel=1e-14)
    spike = np.zeros((3, 4))
    spike[1, 2] = 1.0
    for p, r in [(2, 1), (3, 2), (1.1, 4)]:
        assert mixed_norm(_fn(spike), p, r) == pytest.approx(1.0, rel=1e-15)


def test_mixed_norm_hand_computed():
    om, sg = MeasureSpace([0.5, 2.0]), MeasureSpace([1.0, 3.0])
    f = LatticeFunction(om, sg, [[1.0, -2.0], [0.0, 1.0]])
    # rows: (1 + 3*8)^(2/3)... with r = 3, p = 2
    row0 = (1.0 + 3.0 * 8.0) ** (1 / 3)
    row1 = (3.0) ** (1 / 3)
    want = (0.5 * row0 ** 2 + 2.0 * row1 ** 2) ** 0.5
    assert mixed_norm(f, 2, 3) == pytest.approx(want, rel=1e-14)


def test_mismatched_dimensions():
    with pytest.raises(ValidationError):
        LatticeFunction(MeasureSpace.counting(3), MeasureSpace.counting(2), np.zeros((2, 3)))


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31), st.sampled_from([1.5, 2.0, 4.0]), st.sampled_from([1.0, 2.0, 3.0]),
       st.floats(-5, 5))
def test_mixed_norm_axioms(seed, p, r, c):
    rng = np.random.default_rng(seed)
    om, sg = MeasureSpace(rng.uniform(0.1, 2, 4)), MeasureSpace(rng.uniform(0.1, 2, 3))
    f = LatticeFunction(om, sg, rng.standard_normal((4, 3)))
    g = LatticeFunction(om, sg, rng.standard_normal((4, 3)))
    nf, ng = mixed_norm(f, p, r), mixed_norm(g, p, r)
    assert mixed_norm(f.with_values(c * f.values), p, r) == pytest.approx(abs(c) * nf, rel=1e-10, abs=1e-10)
    assert mixed_norm(f.with_values(f.values + g.values), p, r) <= nf + ng + 1e-10


def _hand_variation(fam, p, q, r):
    pts = np.zeros(fam.values.shape[1:])
    for i in range(pts.shape[0]):
        for j in range(pts.shape[1]):
            pts[i, j] = vq_norm_oracle(fam.values[:, i, j], q).norm
    inner = (pts ** r) @ fam.sigma.weights
    return (fam.omega.weights @ inner ** (p / r)) ** (1 / p)


def test_variation_norm_constant_and_two_member():
    rng = np.random.default_rng(1)
    g = _fn(rng.standard_normal((3, 2)))
    const = LatticeFamily.from_members([0, 1, 2], [g, g, g])
    assert lattice_variation_norm(const, 2, 3, 2) == pytest.approx(mixed_norm(g, 2, 2), rel=1e-13)
    zero = g.with_values(np.zeros((3, 2)))
    two = LatticeFamily.from_members([0, 1], [zero, g])
    assert lattice_variation_norm(two, 2, 3, 2) == pytest.approx(mixed_norm(g, 2, 2), rel=1e-13)
    assert lattice_maximal_norm(const, 2, 2) == pytest.approx(mixed_norm(g, 2, 2), rel=1e-13)


def test_variation_norm_oracle_composition():
    rng = np.random.default_rng(2)
    om, sg = MeasureSpace([0.3, 1.0, 2.5]), MeasureSpace([1.0, 0.25])
    fam = LatticeFamily(np.arange(5.0), om, sg, rng.standard_normal((5, 3, 2)))
    for p, q, r in [(2, 3, 2), (1.5, 2.5, 3), (4, 2.1, 1.2)]:
        assert lattice_variation_norm(fam, p, q, r) == pytest.approx(_hand_variation(fam, p, q, r), rel=1e-12)


def test_maximal_oracle_composition():
    rng = np.random.default_rng(4)
    om, sg = MeasureSpace([0.3, 1.0, 2.5]), MeasureSpace([1.0, 0.25])
    fam = LatticeFamily(np.arange(6.0), om, sg, rng.standard_normal((6, 3, 2)))
    pts = np.abs(fam.values).max(axis=0)
    want = (om.weights @ ((pts ** 3) @ sg.weights) ** (2 / 3)) ** 0.5
    assert lattice_maximal_norm(fam, 2, 3) == pytest.approx(want, rel=1e-13)


def test_composition_order_is_not_permuted():
    # asymmetric fixture: swapping the roles of omega and sigma changes the value
    om, sg = MeasureSpace([1.0, 4.0]), MeasureSpace([0.5, 0.5, 2.0])
    rng = np.random.default_rng(11)
    vals = rng.standard_normal((4, 2, 3))
    fam = LatticeFamily(np.arange(4.0), om, sg, vals)
    swapped = LatticeFamily(np.arange(4.0), sg, om, vals.transpose(0, 2, 1))
    p, q, r = 3.0, 2.5, 1.5
    value = lattice_variation_norm(fam, p, q, r)
    assert value == pytest.approx(_hand_variation(fam, p, q, r), rel=1e-12)
    assert abs(value - lattice_variation_norm(swapped, p, q, r)) > 1e-3


@settings(max_examples=30)
@given(st.integers(0, 2 ** 31))
def test_maximal_below_variation_and_monotone_in_q(seed):
    rng = np.random.default_rng(seed)
    om, sg = MeasureSpace(rng.uniform(0.5, 2, 3)), MeasureSpace(rng.uniform(0.5, 2, 2))
    fam = LatticeFamily(np.arange(7.0), om, sg, rng.standard_normal((7, 3, 2)))
    mx = lattice_maximal_norm(fam, 2, 2)
    prev = np.inf
    for q in (1.0, 2.0, 2.5, 3.0, 6.0):
        v = lattice_variation_norm(fam, 2, q, 2)
        assert mx <= v * (1 + 1e-12)
        assert v <= prev * (1 + 1e-12)
        prev = v


def test_family_rejects_mixed_spaces():
    a = _fn(np.zeros((2, 2)))
    b = LatticeFunction(MeasureSpace([1.0, 2.0]), MeasureSpace.counting(2), np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        LatticeFamily.from_members([0, 1], [a, b])
