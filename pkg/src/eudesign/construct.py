"""Closed-form constructors for known design families, plus scaling/reweighting."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from eudesign.design.pointset import WeightedPointSet

__all__ = [
    "InfeasibleError",
    "FeasibilityReport",
    "f_recurrence",
    "tight_two_design_from_radii",
    "regular_simplex",
    "simplex_coefficients",
    "tight_four_design_r2",
    "antipodal_five_design_r2",
    "bajnok_three_design",
    "cross_polytope_three_design",
    "scale_design",
    "reweight_design",
    "shell_count_radii",
    "random_feasible_radii",
]


class InfeasibleError(ValueError):
    """Construction parameters violate a stated condition."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition or message


@dataclass(frozen=True)
class FeasibilityReport:
    radii: tuple
    f: tuple
    feasible: bool
    next_radius: object = None
    violated: str = ""


def f_recurrence(R):
    """f_0 = 1, f_1 = R_1, f_k = f_{k-1}(R_k + 1) - prod_{i<k}(R_i + 1).

    Works on Fractions or floats. Feasible iff f_k > 0 for k >= 1 and
    f_n < prod(R_i + 1); then R_{n+1} = prod(R_i + 1) / f_n - 1.
    """
    R = tuple(R)
    if not R:
        raise ValueError("need at least one radius")
    if any(r <= 0 for r in R):
        raise ValueError("squared norms must be positive")
    f = [1, R[0]]
    running = R[0] + 1
    for k in range(1, len(R)):
        f.append(f[-1] * (R[k] + 1) - running)
        running = running * (R[k] + 1)
    for k in range(1, len(f)):
        if f[k] <= 0:
            return FeasibilityReport(R, tuple(f), False, None, f"f_{k} = {f[k]} is not positive")
    if not f[-1] < running:
        return FeasibilityReport(
            R, tuple(f), False, None, f"f_{len(R)} = {f[-1]} is not below prod(R_i + 1) = {running}"
        )
    nxt = running / f[-1] - 1
    return FeasibilityReport(R, tuple(f), True, nxt)


def tight_two_design_from_radii(R, weighted=True):
    """(n+1)-point set in R^n with |x_k|^2 = R_k and all inner products -1.

    Points are in the lower-triangular frame x_{k,l} = 0 for k < l,
    x_{k,k} > 0. With ``weighted`` the weights are 1 / (1 + |x|^2), which makes
    the set a tight Euclidean 2-design; otherwise unit weights.
    """
    R = [float(r) for r in R]
    rep = f_recurrence(R)
    if not rep.feasible:
        raise InfeasibleError(f"infeasible radii {tuple(R)}: {rep.violated}", rep.violated)
    n = len(R)
    f = rep.f
    partial = np.cumprod([1.0] + [r + 1 for r in R])  # partial[k] = prod_{i<=k}(R_i+1)
    diag = np.array([np.sqrt(f[k] / f[k - 1]) for k in range(1, n + 1)])
    b = np.array([-partial[k - 1] / np.sqrt(f[k - 1] * f[k]) for k in range(1, n + 1)])
    pts = np.zeros((n + 1, n))
    for k in range(n):
        pts[k, :k] = b[:k]
        pts[k, k] = diag[k]
    pts[n] = b
    sq = np.sum(pts**2, axis=1)
    w = 1.0 / (1.0 + sq) if weighted else np.ones(n + 1)
    meta = {"family": "two-design-radii", "radii": list(R), "weighted": weighted}
    return WeightedPointSet(pts, w, meta)


def simplex_coefficients(n):
    """(a, b) of the regular simplex frame: diagonal a, off-diagonal b."""
    a = -(1 + (n - 1) * np.sqrt(n + 1)) / (n * np.sqrt(n))
    b = (-1 + np.sqrt(n + 1)) / (n * np.sqrt(n))
    return a, b


def regular_simplex(n):
    """Unit regular simplex: u_i = b(1,..,1) + (a-b)e_i, u_{n+1} = (1,..,1)/sqrt(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = simplex_coefficients(n)
    pts = np.full((n + 1, n), b)
    pts[np.arange(n), np.arange(n)] = a
    pts[n] = 1 / np.sqrt(n)
    return WeightedPointSet(pts, np.ones(n + 1), {"family": "simplex", "n": n})


def _check_r(r, name):
    if r <= 0:
        raise InfeasibleError(f"{name}: r must be positive", "r > 0")
    if r == 1:
        raise InfeasibleError(
            f"{name}: r = 1 collapses the two orbits; the family requires r != 1", "r != 1"
        )


def tight_four_design_r2(r):
    """Unit triangle plus the opposite triangle at radius r; weights 1 and 1/r^3."""
    _check_r(r, "four-design-r2")
    h = np.sqrt(3) / 2
    pts = np.array(
        [[1, 0], [-0.5, h], [-0.5, -h], [-r, 0], [r / 2, h * r], [r / 2, -h * r]], dtype=float
    )
    w = np.array([1, 1, 1] + [r**-3] * 3, dtype=float)
    return WeightedPointSet(pts, w, {"family": "four-design-r2", "r": r})


def antipodal_five_design_r2(r):
    """Square {(+-1,0),(0,+-1)} plus diagonal square at radius r; weights 1 and 1/r^4.

    Points are ordered so that point 2k is the negative of point 2k-1.
    """
    _check_r(r, "five-design-r2")
    c = r / np.sqrt(2)
    pts = np.array(
        [[1, 0], [-1, 0], [0, 1], [0, -1], [c, c], [-c, -c], [c, -c], [-c, c]], dtype=float
    )
    w = np.array([1] * 4 + [r**-4] * 4, dtype=float)
    return WeightedPointSet(pts, w, {"family": "five-design-r2", "r": r})


def bajnok_three_design(radii):
    """m = 6 - 2p points per shell at angles (2j + k)pi/m, weight 1/r_k^2."""
    radii = [float(r) for r in radii]
    p = len(radii)
    if p not in (1, 2):
        raise ValueError("bajnok3 needs p in {1, 2} radii")
    if any(r <= 0 for r in radii):
        raise InfeasibleError("radii must be positive", "r_k > 0")
    if p == 2 and radii[0] == radii[1]:
        raise InfeasibleError("radii must be distinct", "r_1 != r_2")
    m = 6 - 2 * p
    pts, w = [], []
    for k, r in enumerate(radii, start=1):
        for j in range(1, m + 1):
            ang = (2 * j + k) * np.pi / m
            pts.append([r * np.cos(ang), r * np.sin(ang)])
            w.append(1 / r**2)
    return WeightedPointSet(np.array(pts), np.array(w), {"family": "bajnok3", "radii": radii})


def cross_polytope_three_design(radii):
    """{+-r_i e_i} with w(+-r_i e_i) = 1/(n r_i^2), ordered +r_1e_1, -r_1e_1, ..."""
    radii = [float(r) for r in radii]
    n = len(radii)
    if n < 1 or any(r <= 0 for r in radii):
        raise InfeasibleError("radii must be positive", "r_i > 0")
    pts = np.zeros((2 * n, n))
    w = np.empty(2 * n)
    for i, r in enumerate(radii):
        pts[2 * i, i], pts[2 * i + 1, i] = r, -r
        w[2 * i] = w[2 * i + 1] = 1 / (n * r**2)
    return WeightedPointSet(pts, w, {"family": "crosspoly3", "radii": radii})


def scale_design(X, lam):
    """x -> lam x, weights kept."""
    if lam <= 0:
        raise ValueError("scale must be positive")
    return WeightedPointSet(lam * X.points, X.weights, dict(X.metadata))


def reweight_design(X, mu):
    """w -> mu w, points kept."""
    if mu <= 0:
        raise ValueError("weight factor must be positive")
    return WeightedPointSet(X.points, mu * X.weights, dict(X.metadata))


def shell_count_radii(n, p, delta=0.05, rng=None):
    """Squared norms near (n, ..., n) giving an (n+1)-point set on exactly p shells.

    The first n values take p - 1 distinct perturbed values (p = 1: all n);
    the determined (n+1)-th value then supplies the last shell.
    """
    if not 1 <= p <= n + 1:
        raise ValueError("need 1 <= p <= n + 1")
    if p == 1:
        return [float(n)] * n
    rng = np.random.default_rng(rng)
    offsets = delta * (np.arange(1, p) + 0.5 * rng.random(p - 1)) / p
    vals = [n + o for o in offsets]
    R = [vals[k] if k < p - 1 else vals[rng.integers(p - 1)] for k in range(n)]
    return [float(r) for r in R]


def random_feasible_radii(n, rng, low=0.5, high=5.0, max_tries=10000):
    """Random R in (low, high)^n satisfying the feasibility conditions.

    Dividing the recurrence by prod(R_i + 1) gives f_k / prod_{i<=k}(R_i + 1)
    = 1 - sum_{i<=k} 1/(R_i + 1), so R is feasible iff sum 1/(R_k + 1) < 1.
    Samples t_k = 1/(R_k + 1) uniformly on that region of the box.
    """
    t_lo, t_hi = 1 / (1 + high), 1 / (1 + low)
    budget = 1 - n * t_lo
    if budget <= 0:
        raise InfeasibleError(
            f"no feasible radii in ({low}, {high})^{n}: sum 1/(R_k + 1) > {n * t_lo:g} >= 1",
            "sum 1/(R_k + 1) < 1",
        )
    for _ in range(max_tries):
        e = rng.exponential(size=n + 1)
        u = budget * e[:n] / e.sum()
        if np.all(u < t_hi - t_lo):
            R = 1 / (t_lo + u) - 1
            if f_recurrence(R).feasible:
                return [float(r) for r in R]
    raise RuntimeError("no feasible radii found")


def exact_f_recurrence(R):
    """``f_recurrence`` over Fractions."""
    return f_recurrence([Fraction(r) for r in R])

