"""Design equation systems, Jacobian rank analysis and Newton deformation.

A design with N points in R^n is a zero of the polynomial system

    f_{l,j,k}(x, w) = sum_m w_m |x_m|^{2j} phi_{l,k}(x_m),

1 <= l <= t, 0 <= j <= floor((t-l)/2), phi_{l,k} running over a basis of
Harm_l. Variables are ordered coordinates first (row-major by point), then
weights. In antipodal mode the set is assumed ordered so that point 2k is the
negative of point 2k-1 with the same weight; only the odd-numbered points
carry variables and only even-l equations are kept (odd-l sums vanish).
"""

import re
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize_scalar

from eudesign.design.pointset import WeightedPointSet, decompose_shells
from eudesign.design.verify import moment_residuals
from eudesign.poly import Polynomial, harmonic_basis

__all__ = [
    "DesignSystem",
    "JacobianAnalysis",
    "DeformationResult",
    "SearchResult",
    "Certificate",
    "DeformationError",
    "SingularJacobianError",
    "build_design_system",
    "evaluate_system",
    "jacobian",
    "rank_analysis",
    "submatrix_analysis",
    "search_free_sets",
    "newton_deform",
    "strong_nonrigidity_certificate",
    "same_shell_pair",
    "coordinate_quadratic_basis",
    "simplex_dependent_columns",
]

RANK_TOL = 1e-8


class DeformationError(RuntimeError):
    pass


class SingularJacobianError(DeformationError):
    pass


class DesignSystem:
    """The moment equations of strength ``t`` for ``N`` points in R^n."""

    def __init__(self, n, N, t, antipodal=False, basis=None):
        if N < 1 or t < 1 or n < 1:
            raise ValueError("need n, N, t >= 1")
        if antipodal and N % 2:
            raise ValueError("antipodal mode needs an even number of points")
        self.n, self.N, self.t, self.antipodal = n, N, t, antipodal
        basis = basis or {}
        self.basis = {}
        for l in range(1, t + 1):
            if antipodal and l % 2:
                continue
            phis = tuple(basis.get(l, harmonic_basis(n, l)))
            if phis:
                self.basis[l] = phis
        self.equations = tuple(
            (l, j, k)
            for l, phis in self.basis.items()
            for j in range((t - l) // 2 + 1)
            for k in range(len(phis))
        )
        self.point_index = tuple(range(0, N, 2)) if antipodal else tuple(range(N))
        M = len(self.point_index)
        self.names = tuple(
            [f"x{i + 1}.{c + 1}" for i in self.point_index for c in range(n)]
            + [f"w{i + 1}" for i in self.point_index]
        )
        self._lookup = {name: k for k, name in enumerate(self.names)}
        self._grads = {
            l: tuple(tuple(phi.derivative(c).to_float() for c in range(n)) for phi in phis)
            for l, phis in self.basis.items()
        }
        self.n_var_points = M

    def __repr__(self):
        mode = ", antipodal" if self.antipodal else ""
        return f"DesignSystem(n={self.n}, N={self.N}, t={self.t}{mode}: K={self.K}, V={self.V})"

    @property
    def K(self):
        return len(self.equations)

    @property
    def V(self):
        return len(self.names)

    def coordinate_slice(self):
        return slice(0, self.n_var_points * self.n)

    def weight_slice(self):
        return slice(self.n_var_points * self.n, self.V)

    # variable naming

    def index(self, name):
        try:
            return self._lookup[name.strip()]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def parse(self, spec):
        """Comma-separated names; ``w*`` expands to all weights, ``x3.*`` to a point."""
        if isinstance(spec, str):
            spec = [s for s in spec.split(",") if s.strip()]
        out = []
        for item in spec:
            if isinstance(item, (int, np.integer)):
                out.append(int(item))
                continue
            item = item.strip()
            if "*" in item:
                pattern = re.compile("^" + re.escape(item).replace(r"\*", r"[0-9.]+") + "$")
                hits = [k for k, nm in enumerate(self.names) if pattern.match(nm)]
                if not hits:
                    raise KeyError(f"pattern {item!r} matches no variable")
                out.extend(hits)
            else:
                out.append(self.index(item))
        if len(set(out)) != len(out):
            raise ValueError("repeated variable in specification")
        return out

    # packing

    def pack(self, X, tol=1e-9):
        if X.n != self.n or X.N != self.N:
            raise ValueError(f"point set is {X.N} x {X.n}, system expects {self.N} x {self.n}")
        if self.antipodal:
            P, w = X.points, X.weights
            if np.max(np.abs(P[0::2] + P[1::2])) > tol or np.max(np.abs(w[0::2] - w[1::2])) > tol:
                raise ValueError("antipodal mode expects point 2k = -point 2k-1 with equal weight")
        idx = list(self.point_index)
        return np.concatenate([X.points[idx].ravel(), X.weights[idx]])

    def unpack_arrays(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.V,):
            raise ValueError(f"expected {self.V} values, got {xi.shape}")
        M = self.n_var_points
        P = xi[: M * self.n].reshape(M, self.n)
        w = xi[M * self.n:]
        if self.antipodal:
            full = np.empty((self.N, self.n))
            full[0::2], full[1::2] = P, -P
            return full, np.repeat(w, 2)
        return P.copy(), w.copy()

    def unpack(self, xi, metadata=None):
        P, w = self.unpack_arrays(xi)
        return WeightedPointSet(P, w, dict(metadata or {}))

    # evaluation

    def _split(self, xi):
        xi = np.asarray(xi, dtype=float)
        M = self.n_var_points
        return xi[: M * self.n].reshape(M, self.n), xi[M * self.n:]

    def evaluate(self, xi):
        P, w = self._split(xi)
        s = np.sum(P**2, axis=1)
        out = []
        for l, phis in self.basis.items():
            vals = np.array([phi.evaluate_many(P) for phi in phis])
            for j in range((self.t - l) // 2 + 1):
                out.append(vals @ (w * s**j))
        return np.concatenate(out) if out else np.zeros(0)

    def jacobian(self, xi):
        P, w = self._split(xi)
        M, n = P.shape
        s = np.sum(P**2, axis=1)
        rows = []
        for l, phis in self.basis.items():
            vals = np.array([phi.evaluate_many(P) for phi in phis])  # (h, M)
            grads = np.array(
                [[g.evaluate_many(P) for g in gs] for gs in self._grads[l]]
            )  # (h, n, M)
            for j in range((self.t - l) // 2 + 1):
                sj = s**j
                dsj = 2 * j * s ** (j - 1) if j else np.zeros(M)
                # d/dP_{m,c}: w_m (dsj_m P_{m,c} phi_m + sj_m dphi_c,m)
                dP = w[None, :, None] * (
                    (dsj[:, None] * P)[None, :, :] * vals[:, :, None]
                    + sj[None, :, None] * np.transpose(grads, (0, 2, 1))
                )
                dw = vals * sj[None, :]
                rows.append(np.hstack([dP.reshape(len(phis), M * n), dw]))
        return np.vstack(rows) if rows else np.zeros((0, self.V))

    def as_polynomials(self):
        """The equations as explicit exact polynomials in the V variables."""
        M, n, V = self.n_var_points, self.n, self.V
        coords = [[Polynomial.variable(m * n + c, V) for c in range(n)] for m in range(M)]
        weights = [Polynomial.variable(M * n + m, V) for m in range(M)]
        sq = [sum((x * x for x in pt), Polynomial.zero(V)) for pt in coords]
        polys = []
        for l, phis in self.basis.items():
            subs = []
            for phi in phis:
                per_point = []
                for m in range(M):
                    val = Polynomial.zero(V, phi.exact)
                    for alpha, c in phi.terms.items():
                        term = Polynomial.constant(c, V, phi.exact)
                        for x, a in zip(coords[m], alpha):
                            if a:
                                term = term * x**a
                        val = val + term
                    per_point.append(val)
                subs.append(per_point)
            for j in range((self.t - l) // 2 + 1):
                for per_point in subs:
                    f = Polynomial.zero(V)
                    for m in range(M):
                        f = f + weights[m] * sq[m] ** j * per_point[m]
                    polys.append(f)
        return polys


def build_design_system(n, N, t, antipodal=False, basis=None):
    return DesignSystem(n, N, t, antipodal, basis)


def evaluate_system(system, xi):
    return system.evaluate(xi)


def jacobian(system, xi):
    return system.jacobian(xi)


@dataclass(frozen=True)
class JacobianAnalysis:
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    tol: float
    columns: tuple = ()

    @property
    def full_row_rank(self):
        return self.rank == self.matrix.shape[0]

    def to_dict(self):
        return {
            "shape": list(self.matrix.shape),
            "rank": self.rank,
            "tol": self.tol,
            "full_row_rank": self.full_row_rank,
            "columns": list(self.columns),
            "singular_values": [float(x) for x in self.singular_values],
        }


def rank_analysis(J, tol=RANK_TOL, columns=()):
    """Numerical rank: count of singular values above tol * sigma_max."""
    J = np.asarray(J, dtype=float)
    if J.size == 0:
        raise ValueError("empty matrix")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0
    return JacobianAnalysis(J, sv, rank, tol, tuple(columns))


def submatrix_analysis(system, xi, free=None, columns=None, tol=RANK_TOL):
    """Rank of J' = J restricted to ``columns`` (or to the complement of ``free``)."""
    J = system.jacobian(xi)
    if columns is not None:
        cols = system.parse(columns)
    else:
        fixed = set(system.parse(free or []))
        cols = [k for k in range(system.V) if k not in fixed]
    return rank_analysis(J[:, cols], tol, tuple(system.names[k] for k in cols))


# free-set search


def same_shell_pair(system, xi, antipodal_pair=False, tol=1e-8):
    """Predicate: the set is all coordinates of two points on one shell.

    With ``antipodal_pair`` False the two points must not be negatives of
    each other; with True they must be.
    """
    P, _ = system._split(xi)
    norms = np.sqrt(np.sum(P**2, axis=1))
    n = system.n

    def predicate(idx):
        if len(idx) != 2 * n or any(k >= system.n_var_points * n for k in idx):
            return False
        pts = sorted({k // n for k in idx})
        if len(pts) != 2:
            return False
        a, b = pts
        if sorted(idx) != list(range(a * n, a * n + n)) + list(range(b * n, b * n + n)):
            return False
        if abs(norms[a] - norms[b]) > tol:
            return False
        opposite = np.max(np.abs(P[a] + P[b])) <= tol
        return opposite if antipodal_pair else not opposite

    return predicate


@dataclass(frozen=True)
class SearchResult:
    free_sets: tuple
    rank_tests: int
    complete: bool


def search_free_sets(system, xi, size, predicate=None, tol=RANK_TOL, budget=10**6):
    """Enumerate free sets I' of ``size`` whose complement J' has full row rank."""
    J = system.jacobian(xi)
    K = system.K
    found, tests = [], 0
    for idx in combinations(range(system.V), size):
        if predicate is not None and not predicate(idx):
            continue
        if tests >= budget:
            return SearchResult(tuple(found), tests, False)
        tests += 1
        keep = [k for k in range(system.V) if k not in idx]
        if len(keep) < K:
            continue
        if rank_analysis(J[:, keep], tol).rank == K:
            found.append(tuple(system.names[k] for k in idx))
    return SearchResult(tuple(found), tests, True)


# Newton deformation


@dataclass(frozen=True)
class DeformationResult:
    original: WeightedPointSet
    deformed: WeightedPointSet
    xi: np.ndarray
    residual: float
    iterations: int
    free: tuple
    displacement: np.ndarray = field(repr=False)
    weight_delta: np.ndarray = field(repr=False)
    norms_before: np.ndarray = field(repr=False)
    norms_after: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "residual": self.residual,
            "iterations": self.iterations,
            "free": list(self.free),
            "max_displacement": float(np.max(self.displacement)),
            "max_weight_delta": float(np.max(np.abs(self.weight_delta))),
            "norms_before": [float(x) for x in self.norms_before],
            "norms_after": [float(x) for x in self.norms_after],
        }


def newton_deform(
    system,
    eta,
    free,
    targets,
    tol=1e-11,
    max_iter=50,
    max_halvings=30,
    trust_radius=None,
    rank_tol=RANK_TOL,
    cospherical=(),
):
    """Solve for the dependent variables after moving the free ones to ``targets``.

    The iteration matrix is J' (columns outside ``free``). When J' has more
    columns than rows the minimum-norm Newton step is used. Steps are halved
    while the residual does not decrease or a weight would become non-positive.

    ``cospherical`` lists groups of point indices (0-based) whose norms are
    held equal by appending |x_a|^2 - |x_b|^2 = 0 to the system.
    """
    eta = np.asarray(eta, dtype=float)
    free_idx = system.parse(free)
    targets = np.asarray(targets, dtype=float).ravel()
    if len(targets) != len(free_idx):
        raise ValueError(f"{len(free_idx)} free variables but {len(targets)} targets")
    if trust_radius is not None and np.max(np.abs(targets - eta[free_idx]), initial=0) > trust_radius:
        raise ValueError("targets lie outside the trust radius")
    dep = np.array([k for k in range(system.V) if k not in set(free_idx)])
    wsl = system.weight_slice()
    J0 = system.jacobian(eta)[:, dep]
    if rank_analysis(J0, rank_tol).rank < system.K:
        raise SingularJacobianError("J' is not of full row rank at the starting design")
    evaluate, jac = _with_norm_constraints(system, cospherical)

    xi = eta.copy()
    xi[free_idx] = targets
    F = evaluate(xi)
    res = np.max(np.abs(F))
    it = 0
    while res > tol:
        if it >= max_iter:
            raise DeformationError(f"no convergence after {max_iter} iterations (residual {res:.3e})")
        it += 1
        Jd = jac(xi)[:, dep]
        step = np.linalg.lstsq(Jd, -F, rcond=None)[0]
        alpha = 1.0
        for _ in range(max_halvings + 1):
            trial = xi.copy()
            trial[dep] += alpha * step
            if np.all(trial[wsl] > 0):
                Ft = evaluate(trial)
                rt = np.max(np.abs(Ft))
                if rt < res or rt <= tol:
                    break
            alpha /= 2
        else:
            raise DeformationError(f"damping exhausted at iteration {it} (residual {res:.3e})")
        xi, F, res = trial, Ft, rt

    P0, w0 = system.unpack_arrays(eta)
    P1, w1 = system.unpack_arrays(xi)
    original = WeightedPointSet(P0, w0)
    deformed = WeightedPointSet(P1, w1)
    return DeformationResult(
        original=original,
        deformed=deformed,
        xi=xi,
        residual=float(res),
        iterations=it,
        free=tuple(system.names[k] for k in free_idx),
        displacement=np.sqrt(np.sum((P1 - P0) ** 2, axis=1)),
        weight_delta=w1 - w0,
        norms_before=original.norms,
        norms_after=deformed.norms,
    )


def _with_norm_constraints(system, groups):
    pairs = []
    for group in groups:
        reps = [i // 2 if system.antipodal else i for i in group]
        if any(not 0 <= r < system.n_var_points for r in reps):
            raise ValueError(f"point index out of range in {group}")
        pairs.extend(zip(reps, reps[1:]))
    if not pairs:
        return system.evaluate, system.jacobian
    n = system.n

    def evaluate(xi):
        P, _ = system._split(xi)
        extra = [P[a] @ P[a] - P[b] @ P[b] for a, b in pairs]
        return np.concatenate([system.evaluate(xi), extra])

    def jac(xi):
        P, _ = system._split(xi)
        rows = np.zeros((len(pairs), system.V))
        for r, (a, b) in enumerate(pairs):
            rows[r, a * n:(a + 1) * n] += 2 * P[a]
            rows[r, b * n:(b + 1) * n] -= 2 * P[b]
        return np.vstack([system.jacobian(xi), rows])

    return evaluate, jac


@dataclass(frozen=True)
class Certificate:
    """Evidence that a design deforms with two co-spherical points separating."""

    deformation: DeformationResult
    witness: tuple  # (i, j), 0-based
    norms_before: tuple
    norms_after: tuple
    max_displacement: float
    max_weight_delta: float
    orbit_displacement: float
    orbit_weight_delta: float
    shells_before: int
    shells_after: int
    verification: object

    def to_dict(self):
        i, j = self.witness
        return {
            "witness": [i + 1, j + 1],
            "norms_before": list(self.norms_before),
            "norms_after": list(self.norms_after),
            "max_displacement": self.max_displacement,
            "max_weight_delta": self.max_weight_delta,
            "orbit_displacement": self.orbit_displacement,
            "orbit_weight_delta": self.orbit_weight_delta,
            "shells_before": self.shells_before,
            "shells_after": self.shells_after,
            "verification": self.verification.to_dict(),
            "deformation": self.deformation.to_dict(),
        }


def _orbit_distance(a, b, vector):
    """min over positive c of max_i |a_i - c b_i| (rows are vectors if ``vector``)."""

    def cost(c):
        d = a - c * b
        return float(np.max(np.sqrt(np.sum(d**2, axis=1)) if vector else np.abs(d)))

    res = minimize_scalar(cost, bounds=(0.25, 4.0), method="bounded", options={"xatol": 1e-12})
    return min(res.fun, cost(1.0))


def strong_nonrigidity_certificate(
    X,
    t,
    scale=1e-2,
    seed=0,
    free="w*",
    antipodal=False,
    offsets=None,
    tol=1e-11,
    verify_tol=1e-9,
    group_tol=1e-8,
    separation=1e-8,
    cospherical=(),
):
    """Deform ``X`` by moving the ``free`` variables and look for a split shell.

    ``offsets`` (default: uniform in [-scale, scale] from ``seed``) are added
    to the free variables; ``cospherical`` is passed to ``newton_deform``. The certificate names a pair of points that shared a
    sphere before and are separated by more than ``separation`` afterwards.
    """
    system = build_design_system(X.n, X.N, t, antipodal)
    eta = system.pack(X)
    free_idx = system.parse(free)
    if offsets is None:
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(-scale, scale, len(free_idx))
    offsets = np.asarray(offsets, dtype=float)
    result = newton_deform(
        system, eta, free_idx, eta[free_idx] + offsets, tol=tol, cospherical=cospherical
    )
    before = decompose_shells(X, group_tol)
    after = decompose_shells(result.deformed, group_tol)
    nb, na = X.norms, result.deformed.norms
    best, witness = separation, None
    for k in range(before.p):
        members = before.members(k)
        for a, i in enumerate(members):
            for j in members[a + 1:]:
                gap = abs(na[i] - na[j])
                if gap > best:
                    best, witness = gap, (i, j)
    if witness is None:
        raise DeformationError("deformation did not separate any co-spherical pair")
    report = moment_residuals(result.deformed, t, verify_tol)
    i, j = witness
    return Certificate(
        deformation=result,
        witness=witness,
        norms_before=(float(nb[i]), float(nb[j])),
        norms_after=(float(na[i]), float(na[j])),
        max_displacement=float(np.max(result.displacement)),
        max_weight_delta=float(np.max(np.abs(result.weight_delta))),
        orbit_displacement=_orbit_distance(X.points, result.deformed.points, True),
        orbit_weight_delta=_orbit_distance(X.weights, result.deformed.weights, False),
        shells_before=before.p,
        shells_after=after.p,
        verification=report,
    )


# explicit bases and column sets used for the regular simplex


def coordinate_quadratic_basis(n):
    """Harm_1 = {x_k}; Harm_2 = {x_i x_k (i < k)} u {x_1^2 - x_k^2 (k >= 2)}."""
    x = [Polynomial.variable(i, n) for i in range(n)]
    quad = [x[i] * x[k] for i in range(n - 1) for k in range(i + 1, n)]
    quad += [x[0] * x[0] - x[k] * x[k] for k in range(1, n)]
    return {1: x, 2: quad}


def simplex_dependent_columns(n):
    """Column names I_1 u ... u I_n whose Jacobian block is regular at the simplex.

    I_i = {x_{j,i} : i <= j <= n} for i < n, and I_n = {x_{1,n}, ..., x_{n,n}}.
    """
    cols = []
    for i in range(1, n):
        cols += [f"x{j}.{i}" for j in range(i, n + 1)]
    cols += [f"x{j}.{n}" for j in range(1, n + 1)]
    return cols
