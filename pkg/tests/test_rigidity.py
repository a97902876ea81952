import time

import numpy as np
import pytest

from eudesign.construct import (
    antipodal_five_design_r2,
    cross_polytope_three_design,
    regular_simplex,
    simplex_coefficients,
    tight_four_design_r2,
)
from eudesign.design import WeightedPointSet, classify_tightness, decompose_shells, moment_residuals
from eudesign.poly import evaluate
from eudesign.rigidity import (
    DeformationError,
    SingularJacobianError,
    build_design_system,
    coordinate_quadratic_basis,
    newton_deform,
    rank_analysis,
    same_shell_pair,
    search_free_sets,
    simplex_dependent_columns,
    strong_nonrigidity_certificate,
    submatrix_analysis,
)

SYSTEMS = [(2, 3, 2, False), (4, 5, 2, False), (2, 6, 4, False), (2, 8, 5, False), (2, 8, 5, True)]


def random_xi(system, rng):
    xi = rng.standard_normal(system.V)
    xi[system.weight_slice()] = rng.uniform(0.2, 2, system.n_var_points)
    return xi


# the system


def test_system_sizes():
    s = build_design_system(4, 5, 2)
    assert s.K == (16 + 12 - 2) // 2 == 13 and s.V == 25
    assert s.names[:5] == ("x1.1", "x1.2", "x1.3", "x1.4", "x2.1")
    assert s.names[-5:] == ("w1", "w2", "w3", "w4", "w5")
    a = build_design_system(2, 8, 5, antipodal=True)
    assert a.K == 6 and a.names == ("x1.1", "x1.2", "x3.1", "x3.2", "x5.1", "x5.2", "x7.1", "x7.2", "w1", "w3", "w5", "w7")
    with pytest.raises(ValueError):
        build_design_system(2, 3, 5, antipodal=True)


def test_parse_names_and_patterns():
    s = build_design_system(2, 3, 2)
    assert s.parse("w*") == [6, 7, 8]
    assert s.parse("x2.*, w1") == [2, 3, 6]
    with pytest.raises(KeyError):
        s.parse("x9.1")
    with pytest.raises(ValueError):
        s.parse("w1,w1")


def test_pack_unpack_roundtrip():
    X = antipodal_five_design_r2(2)
    s = build_design_system(2, 8, 5, antipodal=True)
    P, w = s.unpack_arrays(s.pack(X))
    assert np.array_equal(P, X.points) and np.array_equal(w, X.weights)
    with pytest.raises(ValueError):
        s.pack(tight_four_design_r2(2))


@pytest.mark.parametrize("n,N,t,antipodal", SYSTEMS)
def test_jacobian_matches_finite_differences(n, N, t, antipodal):
    s = build_design_system(n, N, t, antipodal)
    rng = np.random.default_rng(N + t)
    h = 1e-6
    for _ in range(20):
        xi = random_xi(s, rng)
        J = s.jacobian(xi)
        fd = np.empty_like(J)
        for k in range(s.V):
            e = np.zeros(s.V)
            e[k] = h
            fd[:, k] = (s.evaluate(xi + e) - s.evaluate(xi - e)) / (2 * h)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - fd)) <= 1e-6 * scale


def test_explicit_polynomials_match_evaluation():
    s = build_design_system(2, 3, 3)
    polys = s.as_polynomials()
    assert len(polys) == s.K
    rng = np.random.default_rng(0)
    xi = random_xi(s, rng)
    vals = [float(evaluate(p.to_float(), xi)) for p in polys]
    assert np.allclose(vals, s.evaluate(xi), atol=1e-12)


def test_design_is_a_zero():
    for X, t, anti in [
        (regular_simplex(3), 2, False),
        (tight_four_design_r2(2), 4, False),
        (antipodal_five_design_r2(2), 5, True),
    ]:
        s = build_design_system(X.n, X.N, t, anti)
        assert np.max(np.abs(s.evaluate(s.pack(X)))) <= 1e-12


# ranks


def test_simplex_n4_block_entries():
    a, b = simplex_coefficients(4)
    X = regular_simplex(4)
    s = build_design_system(4, 5, 2, basis=coordinate_quadratic_basis(4))
    ja = submatrix_analysis(s, s.pack(X), columns=simplex_dependent_columns(4))
    z = 0
    expect = np.array([
        [1, 1, 1, 1, z, z, z, z, z, z, z, z, z],
        [z, z, z, z, 1, 1, 1, z, z, z, z, z, z],
        [z, z, z, z, z, z, z, 1, 1, z, z, z, z],
        [z, z, z, z, z, z, z, z, z, 1, 1, 1, 1],
        [b, a, b, b, b, b, b, z, z, z, z, z, z],
        [b, b, a, b, z, z, z, b, b, z, z, z, z],
        [b, b, b, a, z, z, z, z, z, a, b, b, b],
        [z, z, z, z, b, a, b, b, b, z, z, z, z],
        [z, z, z, z, b, b, a, z, z, b, a, b, b],
        [z, z, z, z, z, z, z, b, a, b, b, a, b],
        [2 * a, 2 * b, 2 * b, 2 * b, -2 * a, -2 * b, -2 * b, z, z, z, z, z, z],
        [2 * a, 2 * b, 2 * b, 2 * b, z, z, z, -2 * a, -2 * b, z, z, z, z],
        [2 * a, 2 * b, 2 * b, 2 * b, z, z, z, z, z, -2 * b, -2 * b, -2 * b, -2 * a],
    ])
    assert ja.matrix.shape == (13, 13)
    assert np.allclose(ja.matrix, expect, atol=1e-14)
    assert ja.rank == 13


@pytest.mark.parametrize("n", range(2, 8))
def test_simplex_block_rank(n):
    X = regular_simplex(n)
    for basis in (None, coordinate_quadratic_basis(n)):
        s = build_design_system(n, n + 1, 2, basis=basis)
        ja = submatrix_analysis(s, s.pack(X), columns=simplex_dependent_columns(n))
        assert ja.matrix.shape[0] == ja.matrix.shape[1] == ja.rank == (n * n + 3 * n - 2) // 2


def test_four_design_rank():
    s = build_design_system(2, 6, 4)
    for r, expect in [(3, 12), (1.7, 12), (2.1, 12), (2, 11), (0.5, 11)]:
        ja = submatrix_analysis(s, s.pack(tight_four_design_r2(r)), free="w1,w2,w4,w5")
        assert ja.rank == expect, r


def test_four_design_rank_drop_is_exact():
    sympy = pytest.importorskip("sympy")
    from sympy.polys.matrices import DomainMatrix

    r = sympy.Integer(2)
    h = sympy.sqrt(3) / 2
    pts = [(1, 0), (-sympy.Rational(1, 2), h), (-sympy.Rational(1, 2), -h), (-r, 0), (r / 2, h * r), (r / 2, -h * r)]
    x1, x2 = sympy.symbols("x1 x2", real=True)
    z = x1 + sympy.I * x2
    phis = {l: [sympy.re(sympy.expand(z**l)), sympy.im(sympy.expand(z**l))] for l in range(1, 5)}
    X = sympy.symbols("X1:7", real=True)
    Y = sympy.symbols("Y1:7", real=True)
    W = sympy.symbols("W1:7")
    eqs = []
    for l in range(1, 5):
        for j in range((4 - l) // 2 + 1):
            for phi in phis[l]:
                eqs.append(sum(
                    W[k] * (X[k] ** 2 + Y[k] ** 2) ** j * phi.subs({x1: X[k], x2: Y[k]}, simultaneous=True)
                    for k in range(6)
                ))
    dep = [v for k in range(6) for v in (X[k], Y[k])] + [W[2], W[5]]
    subs = {X[k]: pts[k][0] for k in range(6)} | {Y[k]: pts[k][1] for k in range(6)}
    subs |= {W[k]: (1 if k < 3 else 1 / r**3) for k in range(6)}
    J = sympy.Matrix([[sympy.expand(sympy.diff(f, v).subs(subs)) for v in dep] for f in eqs])
    field = sympy.QQ.algebraic_field(sympy.sqrt(3))
    assert J.shape == (12, 14)
    assert DomainMatrix.from_Matrix(J).convert_to(field).rank() == 11


def test_antipodal_ranks():
    s = build_design_system(2, 8, 5, antipodal=True)
    xi = s.pack(antipodal_five_design_r2(2))
    assert submatrix_analysis(s, xi, free="x1.1,x1.2,x3.1,x3.2").rank == 6
    assert submatrix_analysis(s, xi, free="w1,w3,w5,w7").rank == 6
    s3 = build_design_system(2, 4, 3, antipodal=True)
    xi3 = s3.pack(cross_polytope_three_design([1, 1]))
    assert s3.K == 2
    assert submatrix_analysis(s3, xi3, columns="x1.1,x1.2,x3.1,x3.2").rank == 2
    assert submatrix_analysis(s3, xi3, free="x1.1,x1.2,x3.1,x3.2").rank == 1


def test_rank_analysis_tolerance():
    J = np.diag([1.0, 1e-6, 1e-10])
    assert rank_analysis(J).rank == 2
    assert rank_analysis(J, tol=1e-12).rank == 3
    assert rank_analysis(np.zeros((2, 3))).rank == 0


# free-set search


def test_search_five_design_nonempty():
    X = antipodal_five_design_r2(2)
    s = build_design_system(2, 8, 5)
    xi = s.pack(X)
    start = time.perf_counter()
    res = search_free_sets(s, xi, 4, same_shell_pair(s, xi))
    assert time.perf_counter() - start < 60
    assert res.complete and res.free_sets
    anti = search_free_sets(s, xi, 4, same_shell_pair(s, xi, antipodal_pair=True))
    assert anti.free_sets == ()


def test_search_three_design_empty():
    X = cross_polytope_three_design([1, 1])
    s = build_design_system(2, 4, 3)
    xi = s.pack(X)
    res = search_free_sets(s, xi, 4, same_shell_pair(s, xi))
    assert res.complete and res.free_sets == ()


def test_search_budget():
    s = build_design_system(2, 3, 2)
    X = regular_simplex(2)
    res = search_free_sets(s, s.pack(X), 2, budget=3)
    assert not res.complete and res.rank_tests == 3


# deformation


def test_simplex_deformation_certificate():
    cert = strong_nonrigidity_certificate(regular_simplex(3), 2, scale=1e-2, seed=0)
    d = cert.deformation
    assert d.iterations <= 20 and d.residual <= 1e-11
    assert cert.shells_after == 4 and cert.shells_before == 1
    assert cert.verification.max_abs_residual <= 1e-9
    assert np.all(d.deformed.weights > 0)
    info = cert.to_dict()
    i, j = info["witness"]
    assert info["norms_before"][0] == pytest.approx(info["norms_before"][1])
    assert abs(info["norms_after"][0] - info["norms_after"][1]) > 1e-8
    assert cert.orbit_displacement <= cert.max_displacement + 1e-15


def test_deformation_is_deterministic():
    a = strong_nonrigidity_certificate(regular_simplex(3), 2, seed=4)
    b = strong_nonrigidity_certificate(regular_simplex(3), 2, seed=4)
    assert np.array_equal(a.deformation.xi, b.deformation.xi)


def test_zero_perturbation_is_identity():
    X = regular_simplex(3)
    s = build_design_system(3, 4, 2)
    eta = s.pack(X)
    res = newton_deform(s, eta, "w*", eta[s.parse("w*")])
    assert res.iterations == 0
    assert np.max(np.abs(res.deformed.points - X.points)) <= 1e-12


def test_continuity_dyadic():
    # displacement is |a s + b s^2|: the halving ratio is 1/2 + O(s), above 1/2
    # in one direction and below it in the other
    X = regular_simplex(3)
    s = build_design_system(3, 4, 2)
    eta = s.pack(X)
    free = s.parse("w*")
    for sign in (1, -1):
        offsets = sign * np.array([0.0, 0.01, 0.02, 0.03])
        disp = [np.max(newton_deform(s, eta, free, eta[free] + offsets / 2**k).displacement) for k in range(6)]
        dev = [abs(disp[k + 1] / disp[k] - 0.5) for k in range(5)]
        assert dev[0] < 0.01
        for k in range(4):
            assert dev[k + 1] <= 0.55 * dev[k]


def test_weight_positivity_under_large_steps():
    X = regular_simplex(2)
    s = build_design_system(2, 3, 2)
    eta = s.pack(X)
    res = newton_deform(s, eta, "w1,w2", [0.05, 3.0], max_iter=200)
    assert np.all(res.deformed.weights > 0)
    assert moment_residuals(res.deformed, 2).max_abs_residual <= 1e-9


def test_singular_start_raises():
    X = tight_four_design_r2(2)
    with pytest.raises(SingularJacobianError):
        strong_nonrigidity_certificate(X, 4, free="w1,w2,w4,w5")


def test_global_rescaling_does_not_certify():
    X = tight_four_design_r2(3)
    with pytest.raises(DeformationError):
        strong_nonrigidity_certificate(X, 4, free="w1,w2,w4,w5", offsets=[0.01] * 4)


def test_target_count_and_trust_radius():
    s = build_design_system(3, 4, 2)
    eta = s.pack(regular_simplex(3))
    with pytest.raises(ValueError):
        newton_deform(s, eta, "w*", [1, 1])
    with pytest.raises(ValueError):
        newton_deform(s, eta, "w1", [1.5], trust_radius=0.1)


def test_four_design_four_shells():
    X = tight_four_design_r2(3)
    cert = strong_nonrigidity_certificate(X, 4, free="w1,w2,w4,w5", offsets=[0, 0, 0.01, -0.01])
    assert cert.shells_after == 4
    assert cert.verification.max_abs_residual <= 1e-9
    assert classify_tightness(cert.deformation.deformed, 4).classification == "tight-Euclidean"


def test_four_design_three_shells_from_branch_point():
    X = tight_four_design_r2(2)
    cert = strong_nonrigidity_certificate(
        X, 4, free="w4,w5", offsets=[0.01, 0], cospherical=[(0, 1, 2), (4, 5)]
    )
    assert cert.shells_after == 3
    assert cert.verification.max_abs_residual <= 1e-9
    assert cert.max_displacement < 0.05


def test_four_design_generic_r_has_no_nearby_three_shells():
    X = tight_four_design_r2(3)
    with pytest.raises(DeformationError):
        strong_nonrigidity_certificate(
            X, 4, free="w4,w5", offsets=[0.001, 0], cospherical=[(0, 1, 2), (4, 5)]
        )


def test_five_design_three_shells():
    X = antipodal_five_design_r2(2)
    cert = strong_nonrigidity_certificate(
        X, 5, free="x1.1,x1.2,x3.1,x3.2", antipodal=True, offsets=[0.01, 0, 0, -0.01]
    )
    assert cert.shells_after == 3
    assert cert.verification.max_abs_residual <= 1e-9
    Y = cert.deformation.deformed
    assert np.allclose(Y.points[0::2], -Y.points[1::2])
    assert classify_tightness(Y, 5).classification == "antipodal-tight-Euclidean"


def test_cross_polytope_certificate():
    cert = strong_nonrigidity_certificate(cross_polytope_three_design([1, 1, 1]), 3, antipodal=True)
    assert cert.shells_after == 3
    assert moment_residuals(cert.deformation.deformed, 3).is_design


def test_cospherical_groups_are_checked():
    s = build_design_system(2, 6, 4)
    eta = s.pack(tight_four_design_r2(2))
    with pytest.raises(ValueError):
        newton_deform(s, eta, "w4,w5", eta[s.parse("w4,w5")], cospherical=[(0, 9)])


def test_shell_decomposition_after_deformation_matches_norms():
    cert = strong_nonrigidity_certificate(regular_simplex(4), 2, seed=1)
    Y = cert.deformation.deformed
    assert decompose_shells(Y).p == len(np.unique(np.round(Y.norms, 6)))
    assert isinstance(Y, WeightedPointSet)
