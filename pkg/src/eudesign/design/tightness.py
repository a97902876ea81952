"""Dimension bounds, tightness classification and the tight-design identities."""

from dataclasses import dataclass
from math import comb

import numpy as np

from eudesign.design.pointset import (
    WeightedPointSet,
    antipodal_half,
    decompose_shells,
    is_antipodal,
)
from eudesign.design.verify import DEFAULT_TOL, moment_residuals
from eudesign.poly import gegenbauer, harmonic_basis, orthonormalize_sphere

__all__ = [
    "TightnessReport",
    "MatrixCheck",
    "InnerProductProfile",
    "design_dimension_bound",
    "euclidean_dimension",
    "classify_tightness",
    "weighted_gram_schmidt",
    "weight_moment",
    "tight_identity_check",
    "design_matrix_M",
    "inner_product_set_profile",
]

CLASSES = (
    "tight-on-S",
    "tight-Euclidean",
    "antipodal-tight-on-S",
    "antipodal-tight-Euclidean",
    "not-tight",
)


def _hom_dim(n, k):
    return comb(n + k - 1, n - 1) if k >= 0 else 0


def euclidean_dimension(n, e, parity="full"):
    """dim Pol_e(R^n) (``full``) or dim Pol_e^*(R^n) (``even``)."""
    if parity == "full":
        return comb(n + e, e)
    return sum(_hom_dim(n, e - 2 * i) for i in range(e // 2 + 1))


def design_dimension_bound(n, e, p, epsilon_S=0, parity="full"):
    """dim Pol_e(S) or dim Pol_e^*(S) for S a union of p concentric spheres.

    ``epsilon_S`` is 1 when one of the p spheres is the origin. For the even
    parity with odd e the origin shell carries no odd polynomial, so only the
    p - epsilon_S nonzero shells count.
    """
    if n < 1 or e < 0 or p < 1:
        raise ValueError("need n >= 1, e >= 0, p >= 1")
    if epsilon_S not in (0, 1):
        raise ValueError("epsilon_S must be 0 or 1")
    if parity == "full":
        if p <= (e + epsilon_S) // 2:
            return epsilon_S + sum(
                _hom_dim(n, e - i) for i in range(2 * (p - epsilon_S))
            )
        return comb(n + e, e)
    if parity not in ("even", "even-only"):
        raise ValueError(f"unknown parity {parity!r}")
    if e % 2 == 1 and epsilon_S:
        q = p - 1
        return sum(_hom_dim(n, e - 2 * i) for i in range(min(q, e // 2 + 1)))
    if p <= e // 2:
        if epsilon_S and e % 2 == 0:
            return 1 + sum(_hom_dim(n, e - 2 * i) for i in range(p - 1))
        return sum(_hom_dim(n, e - 2 * i) for i in range(p))
    return euclidean_dimension(n, e, "even")


@dataclass(frozen=True)
class TightnessReport:
    strength: int
    cardinality: int
    bound: int
    euclidean_bound: int
    classification: str
    weight_spread: float
    p: int
    epsilon_S: int
    reason: str = ""

    def to_dict(self):
        return dict(self.__dict__)


def _weight_spread(X, shells):
    spread = 0.0
    for k in range(shells.p):
        w = X.weights[shells.members(k)]
        spread = max(spread, float(w.max() - w.min()))
    return spread


def classify_tightness(X, t, tol=DEFAULT_TOL, group_tol=1e-8, antipodal_tol=1e-9):
    """Compare |X| (or |X*| for odd t) with dim Pol_e(S) and dim Pol_e(R^n)."""
    shells = decompose_shells(X, group_tol)
    e = t // 2
    spread = _weight_spread(X, shells)
    common = dict(strength=t, weight_spread=spread, p=shells.p, epsilon_S=shells.epsilon_S)
    report = moment_residuals(X, t, tol)
    if t % 2 == 0:
        card = X.N
        bound = design_dimension_bound(X.n, e, shells.p, shells.epsilon_S, "full")
        euclid = euclidean_dimension(X.n, e, "full")
        prefix = ""
    else:
        bound = design_dimension_bound(X.n, e, shells.p, shells.epsilon_S, "even")
        euclid = euclidean_dimension(X.n, e, "even")
        prefix = "antipodal-"
        if not is_antipodal(X, antipodal_tol):
            return TightnessReport(
                cardinality=X.N, bound=bound, euclidean_bound=euclid,
                classification="not-tight", reason="not antipodal with symmetric weights",
                **common,
            )
        card = antipodal_half(X, antipodal_tol).N
    if not report.is_design:
        cls, reason = "not-tight", f"not a {t}-design (residual {report.max_abs_residual:.3e})"
    elif card == bound:
        cls = prefix + ("tight-Euclidean" if bound == euclid else "tight-on-S")
        reason = ""
    elif card > bound:
        cls, reason = "not-tight", f"{card} > {bound}"
    else:
        cls, reason = "not-tight", f"{card} < {bound}: below the lower bound"
    return TightnessReport(
        cardinality=card, bound=bound, euclidean_bound=euclid,
        classification=cls, reason=reason, **common,
    )


def weight_moment(X, l):
    """a_l = sum_x w(x) |x|^{2l}; g_{l,0} is the constant 1 / sqrt(a_l)."""
    s = np.sum(X.points**2, axis=1)
    return float(np.sum(X.weights * s**l))


def weighted_gram_schmidt(X, l, count):
    """Orthonormalise 1, |x|^2, ..., |x|^{2(count-1)} under <f,g>_l.

    <f, g>_l = sum_x w(x) |x|^{2l} f(x) g(x). Returns a ``(count, count)``
    upper-triangular array whose column j holds the coefficients of g_{l,j}
    in ascending powers of |x|^2.
    """
    s = np.sum(X.points**2, axis=1)
    V = s[:, None] ** np.arange(count)[None, :]
    scale = np.sqrt(X.weights * s**l)
    _, R = np.linalg.qr(scale[:, None] * V)
    d = np.abs(np.diag(R))
    if count and (d.min() <= 1e-12 * max(d.max(), 1e-300)):
        raise np.linalg.LinAlgError(
            f"Gram matrix of <.,.>_{l} is singular: fewer than {count} weighted radii"
        )
    R = R * np.sign(np.diag(R))[:, None]
    return np.linalg.inv(R)


def _g_values(coefs, s):
    # rows: j, columns: points
    return (s[None, :] ** np.arange(coefs.shape[0])[:, None]).T @ coefs


def _basis_layout(X, e, group_tol, antipodal=False):
    shells = decompose_shells(X, group_tol)
    p, eps = shells.p, shells.epsilon_S
    jmax = {0: min(p - 1, e // 2)}
    for l in range(1, e + 1):
        jmax[l] = min(p - eps - 1, (e - l) // 2)
    if antipodal:
        # Pol_e^*(S): only harmonic degrees of the parity of e
        jmax = {l: j for l, j in jmax.items() if l % 2 == e % 2}
    return shells, jmax


def _prepare(X, antipodal):
    """For antipodal designs work on X* with doubled weights."""
    if not antipodal:
        return X
    half = antipodal_half(X)
    return WeightedPointSet(half.points, 2 * half.weights, dict(X.metadata))


def _homogenized_gegenbauer(n, l, u, v):
    """|u|^l |v|^l Q_l(<u,v>/(|u||v|)) as a polynomial expression in u, v."""
    Q = gegenbauer(n, l)
    ip = float(np.dot(u, v))
    nn = float(np.dot(u, u) * np.dot(v, v))
    total = 0.0
    for k, c in enumerate(Q.coefficients):
        if c:
            total += float(c) * ip**k * nn ** ((l - k) // 2)
    return total


def tight_identity_check(X, e, group_tol=1e-8, antipodal=False):
    """Residuals of the diagonal and off-diagonal tight-design identities.

    Returns ``(max_u |lhs(u) - 1/w(u)|, max_{u != v} |lhs(u, v)|)``. With
    ``antipodal`` the (2e+1)-design ``X`` is replaced by X* carrying weights
    2w and only harmonic degrees l = e (mod 2) enter.
    """
    X = _prepare(X, antipodal)
    shells, jmax = _basis_layout(X, e, group_tol, antipodal)
    s = np.sum(X.points**2, axis=1)
    g = {}
    for l, jm in jmax.items():
        if jm >= 0:
            g[l] = _g_values(weighted_gram_schmidt(X, l, jm + 1), s)  # (N, jm+1)
    diag = np.zeros(X.N)
    for l, vals in g.items():
        q1 = float(gegenbauer(X.n, l).exact_value(1)) if l else 1.0
        diag += (s**l) * q1 * np.sum(vals**2, axis=1)
    diag_res = float(np.max(np.abs(diag - 1.0 / X.weights)))
    off_res = 0.0
    for a in range(X.N):
        for b in range(a + 1, X.N):
            total = 0.0
            for l, vals in g.items():
                kern = _homogenized_gegenbauer(X.n, l, X.points[a], X.points[b]) if l else 1.0
                total += kern * float(np.dot(vals[a], vals[b]))
            off_res = max(off_res, abs(total))
    return diag_res, off_res


@dataclass(frozen=True)
class MatrixCheck:
    matrix: np.ndarray
    gram_residual: float
    outer_residual: float | None

    @property
    def is_square(self):
        return self.matrix.shape[0] == self.matrix.shape[1]


def design_matrix_M(X, e, group_tol=1e-8, antipodal=False):
    """M(u, g_{l,j} phi_{l,i}) = sqrt(w(u)) g_{l,j}(u) phi_{l,i}(u).

    ``antipodal`` builds the matrix on X* with weights 2w over Pol_e^*(S).
    """
    X = _prepare(X, antipodal)
    shells, jmax = _basis_layout(X, e, group_tol, antipodal)
    s = np.sum(X.points**2, axis=1)
    cols = []
    for l, jm in jmax.items():
        if jm < 0:
            continue
        gv = _g_values(weighted_gram_schmidt(X, l, jm + 1), s)
        phis = orthonormalize_sphere(harmonic_basis(X.n, l))
        phiv = [phi.evaluate_many(X.points) for phi in phis]
        for j in range(jm + 1):
            for pv in phiv:
                cols.append(gv[:, j] * pv)
    M = np.sqrt(X.weights)[:, None] * np.array(cols).T
    gram = float(np.max(np.abs(M.T @ M - np.eye(M.shape[1]))))
    outer = None
    if M.shape[0] == M.shape[1]:
        outer = float(np.max(np.abs(M @ M.T - np.eye(M.shape[0]))))
    return MatrixCheck(M, gram, outer)


@dataclass(frozen=True)
class InnerProductProfile:
    values: tuple
    e: int
    bound: int
    violates_bound: bool


def inner_product_set_profile(X, tol=1e-9):
    """Distinct values of <x, y> over pairs x != y, clustered within ``tol``."""
    if X.N < 2:
        raise ValueError("need at least two points")
    G = X.points @ X.points.T
    iu = np.triu_indices(X.N, 1)
    vals = np.sort(G[iu])
    clusters = [[vals[0]]]
    for v in vals[1:]:
        if v - clusters[-1][-1] <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    values = tuple(float(np.mean(c)) for c in clusters)
    e = len(values)
    bound = comb(X.n + e, e)
    return InnerProductProfile(values, e, bound, X.N > bound)
