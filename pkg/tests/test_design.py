from itertools import product
from math import comb

import numpy as np
import pytest

from eudesign.construct import (
    antipodal_five_design_r2,
    cross_polytope_three_design,
    regular_simplex,
    tight_four_design_r2,
    tight_two_design_from_radii,
)
from eudesign.design import (
    AmbiguousShellError,
    WeightedPointSet,
    antipodal_half,
    classify_tightness,
    decompose_shells,
    design_dimension_bound,
    design_matrix_M,
    euclidean_dimension,
    inner_product_set_profile,
    is_antipodal,
    moment_equation_count,
    moment_residuals,
    tight_identity_check,
    verify_design_integral,
    weight_moment,
    weighted_gram_schmidt,
)
from eudesign.poly import monomial_exponents


def hexagon():
    ang = np.arange(6) * np.pi / 3
    return WeightedPointSet(np.c_[np.cos(ang), np.sin(ang)])


# point sets


def test_point_set_validation():
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 0], [1, 0]], [1, -1])
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        WeightedPointSet([[0, np.nan]])
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 1]], [1, 2])
    X = WeightedPointSet([[1.0, 2.0]])
    assert X.weights.tolist() == [1.0]
    with pytest.raises(ValueError):
        X.points[0, 0] = 3


def test_shell_decomposition():
    X = tight_four_design_r2(2)
    sh = decompose_shells(X)
    assert sh.p == 2 and sh.epsilon_S == 0
    assert sh.radii == pytest.approx((1.0, 2.0))
    assert sh.members(0) == [0, 1, 2]
    Y = WeightedPointSet([[0, 0], [1, 0], [0, 1]])
    sh = decompose_shells(Y)
    assert sh.p == 2 and sh.epsilon_S == 1 and sh.radii[0] == 0


def test_ambiguous_shells_raise():
    X = WeightedPointSet([[1, 0], [0, 1 + 0.6e-8], [-(1 + 1.2e-8), 0]])
    with pytest.raises(AmbiguousShellError):
        decompose_shells(X, 1e-8)


def test_antipodal():
    X = antipodal_five_design_r2(2)
    assert is_antipodal(X)
    assert antipodal_half(X).N == 4
    assert not is_antipodal(regular_simplex(3))
    O = WeightedPointSet([[0.0, 0.0]])
    assert is_antipodal(O) and antipodal_half(O).N == 1
    with pytest.raises(ValueError):
        antipodal_half(regular_simplex(2))


# verification


@pytest.mark.parametrize("n", range(2, 9))
def test_simplex_two_design(n):
    X = regular_simplex(n)
    rep = moment_residuals(X, 2)
    assert rep.equation_count == (n * n + 3 * n - 2) // 2 == moment_equation_count(n, 2)
    assert rep.max_abs_residual <= 1e-10
    assert verify_design_integral(X, 2) <= 1e-10
    assert not moment_residuals(X, 3).is_design


def test_both_routes_agree_on_families():
    cases = [
        (tight_four_design_r2(0.5), 4),
        (antipodal_five_design_r2(2), 5),
        (cross_polytope_three_design([1, 2, 3]), 3),
        (tight_two_design_from_radii([2, 3]), 2),
    ]
    for X, t in cases:
        assert moment_residuals(X, t).is_design
        assert verify_design_integral(X, t) <= 1e-9
        assert not moment_residuals(X, t + 1).is_design
        assert verify_design_integral(X, t + 1) > 1e-6


def test_negative_control():
    pts = regular_simplex(3).points.copy()
    pts[0, 0] += 1e-3
    rep = moment_residuals(WeightedPointSet(pts), 2)
    assert rep.max_abs_residual > 1e-5 and not rep.is_design


def test_scaling_and_reweighting_preserve_designs():
    from eudesign.construct import reweight_design, scale_design

    X = antipodal_five_design_r2(0.5)
    assert moment_residuals(scale_design(X, 3.7), 5).is_design
    assert moment_residuals(reweight_design(X, 0.2), 5).is_design


# dimension formulas


def test_dimension_examples():
    assert design_dimension_bound(2, 2, 2) == 6
    assert design_dimension_bound(2, 2, 2, parity="even") == 4
    assert design_dimension_bound(5, 1, 1) == 6
    assert design_dimension_bound(2, 2, 1) == 5
    assert euclidean_dimension(3, 2) == comb(5, 2)


def brute_force_dim(n, e, p, eps, parity, rng):
    pts = []
    npts = comb(n + e, e) + 5
    radii = rng.uniform(0.5, 2.0, p - eps) + np.arange(p - eps)
    for r in radii:
        v = rng.standard_normal((npts, n))
        pts.append(r * v / np.linalg.norm(v, axis=1, keepdims=True))
    if eps:
        pts.append(np.zeros((1, n)))
    P = np.vstack(pts)
    degs = range(e + 1) if parity == "full" else range(e % 2, e + 1, 2)
    mons = [a for d in degs for a in monomial_exponents(n, d)]
    M = np.array([np.prod(P ** np.array(a), axis=1) for a in mons]).T
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0]))


@pytest.mark.parametrize("parity", ["full", "even"])
def test_dimension_formula_brute_force(parity):
    rng = np.random.default_rng(7)
    for n, e, p, eps in product(range(1, 5), range(0, 5), range(1, 4), (0, 1)):
        if eps and p == 1:
            continue
        expect = brute_force_dim(n, e, p, eps, parity, rng)
        assert design_dimension_bound(n, e, p, eps, parity) == expect, (n, e, p, eps)


def test_dimension_bound_rejects_bad_input():
    with pytest.raises(ValueError):
        design_dimension_bound(2, 2, 0)
    with pytest.raises(ValueError):
        design_dimension_bound(2, 2, 2, parity="odd")


# tightness


@pytest.mark.parametrize("r", [0.5, 2, 3])
def test_four_design_tight(r):
    tr = classify_tightness(tight_four_design_r2(r), 4)
    assert (tr.classification, tr.cardinality, tr.bound) == ("tight-Euclidean", 6, 6)
    assert tr.weight_spread < 1e-12


def test_five_design_tight():
    tr = classify_tightness(antipodal_five_design_r2(2), 5)
    assert (tr.classification, tr.cardinality, tr.bound) == ("antipodal-tight-Euclidean", 4, 4)


def test_hexagon_not_tight():
    tr = classify_tightness(hexagon(), 4)
    assert tr.classification == "not-tight"
    assert tr.reason == "6 > 5"


def test_cross_polytope_antipodal_tight():
    tr = classify_tightness(cross_polytope_three_design([1, 1]), 3)
    assert tr.classification.startswith("antipodal-tight")


def test_non_antipodal_odd_strength_not_tight():
    tr = classify_tightness(regular_simplex(2), 3)
    assert tr.classification == "not-tight"


# Gram-Schmidt and identities


def test_gram_schmidt_theorem_design_constants():
    X = tight_two_design_from_radii([2, 3])
    assert weight_moment(X, 0) == pytest.approx(1, abs=1e-12)
    assert weight_moment(X, 1) == pytest.approx(2, abs=1e-12)
    C = weighted_gram_schmidt(X, 0, 1)
    assert C[0, 0] == pytest.approx(1 / np.sqrt(weight_moment(X, 0)))


def test_gram_schmidt_orthonormal():
    X = tight_four_design_r2(2).with_weights([1, 2, 3, 0.5, 0.25, 1])
    Y = WeightedPointSet(np.vstack([X.points, 3 * X.points[:1]]), np.r_[X.weights, 1.0])
    C = weighted_gram_schmidt(Y, 1, 3)
    s = np.sum(Y.points**2, axis=1)
    G = (s[:, None] ** np.arange(3)) @ C
    gram = (G * (Y.weights * s)[:, None]).T @ G
    assert np.allclose(gram, np.eye(3), atol=1e-10)
    with pytest.raises(np.linalg.LinAlgError):
        weighted_gram_schmidt(regular_simplex(3), 0, 2)


@pytest.mark.parametrize(
    "X,e",
    [
        (regular_simplex(3), 1),
        (tight_two_design_from_radii([2, 3]), 1),
        (tight_four_design_r2(2), 2),
        (tight_four_design_r2(0.5), 2),
        (antipodal_five_design_r2(2), 2),
        (antipodal_five_design_r2(0.5), 2),
        (cross_polytope_three_design([1, 1]), 1),
        (cross_polytope_three_design([1, 2, 0.5]), 1),
    ],
)
def test_tight_identities_and_matrix(X, e):
    odd = X.metadata["family"] in ("five-design-r2", "crosspoly3")
    diag, off = tight_identity_check(X, e, antipodal=odd)
    assert diag <= 1e-9 and off <= 1e-9
    mc = design_matrix_M(X, e, antipodal=odd)
    assert mc.gram_residual <= 1e-9
    if mc.is_square:
        assert mc.outer_residual <= 1e-9


def test_identity_pointwise_value_for_theorem_design():
    X = tight_two_design_from_radii([2, 3])
    assert np.allclose(1 / X.weights, np.sum(X.points**2, axis=1) + 1)


def test_matrix_not_square_for_non_tight_design():
    S = regular_simplex(3)
    X = WeightedPointSet(np.vstack([S.points, -S.points]))
    mc = design_matrix_M(X, 1)
    assert not mc.is_square and mc.outer_residual is None
    assert mc.gram_residual <= 1e-10


def test_inner_product_profile():
    prof = inner_product_set_profile(tight_two_design_from_radii([2, 3, 1.5]))
    assert prof.e == 1 and prof.values[0] == pytest.approx(-1, abs=1e-9)
    assert not prof.violates_bound


def test_one_dimensional_designs():
    X = WeightedPointSet([[1.0], [-1.0]])
    rep = moment_residuals(X, 5)
    assert rep.is_design and rep.equation_count == moment_equation_count(1, 5)
    assert verify_design_integral(X, 5) <= 1e-12
    Y = WeightedPointSet([[1.0], [-2.0]])
    assert not moment_residuals(Y, 2).is_design and verify_design_integral(Y, 2) > 1e-3
