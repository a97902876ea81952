"""Weighted point sets, shell decomposition and antipodal structure."""

from dataclasses import dataclass, field

import numpy as np
from sklearn.utils import check_array

__all__ = [
    "WeightedPointSet",
    "ShellDecomposition",
    "AmbiguousShellError",
    "check_weighted_points",
    "decompose_shells",
    "is_antipodal",
    "antipodal_half",
    "antipodal_pairs",
]

DISTINCT_TOL = 1e-12


class AmbiguousShellError(ValueError):
    """Norms chain together across more than the grouping tolerance."""


def check_weighted_points(points, weights=None, *, allow_nonpositive=False):
    """Validate an ``(N, n)`` point array and its weights.

    Returns float arrays ``(points, weights)``; weights default to ones.
    """
    points = check_array(points, ensure_2d=True, dtype=np.float64, ensure_min_samples=1)
    if weights is None:
        weights = np.ones(points.shape[0])
    weights = check_array(
        np.asarray(weights, dtype=float).reshape(1, -1), ensure_2d=True, dtype=np.float64
    ).ravel()
    if weights.shape[0] != points.shape[0]:
        raise ValueError(f"{points.shape[0]} points but {weights.shape[0]} weights")
    if not allow_nonpositive and np.any(weights <= 0):
        raise ValueError("weights must be positive")
    return points, weights


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """A finite set X in R^n with a positive weight function w."""

    points: np.ndarray
    weights: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        points, weights = check_weighted_points(self.points, self.weights)
        N = points.shape[0]
        if N > 1:
            diff = points[:, None, :] - points[None, :, :]
            dist = np.sqrt(np.sum(diff**2, axis=2))
            dist[np.diag_indices(N)] = np.inf
            if np.min(dist) <= DISTINCT_TOL:
                i, j = np.unravel_index(np.argmin(dist), dist.shape)
                raise ValueError(f"points {i} and {j} coincide")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self):
        return self.points.shape[1]

    @property
    def N(self):
        return self.points.shape[0]

    def __len__(self):
        return self.N

    @property
    def norms(self):
        return np.sqrt(np.sum(self.points**2, axis=1))

    def with_weights(self, weights):
        return WeightedPointSet(self.points, weights, dict(self.metadata))


@dataclass(frozen=True)
class ShellDecomposition:
    """Concentric spheres S_1..S_p supporting a point set (radii ascending)."""

    radii: tuple
    membership: tuple
    epsilon_S: int
    shell_weights: tuple

    @property
    def p(self):
        return len(self.radii)

    def members(self, k):
        return [i for i, s in enumerate(self.membership) if s == k]


def decompose_shells(X, group_tol=1e-8):
    """Group the points of ``X`` by norm.

    Consecutive sorted norms closer than ``group_tol`` share a shell. A shell
    whose norms spread over more than ``group_tol`` is ambiguous and raises.
    A shell with radius below ``group_tol`` is the origin shell.
    """
    if group_tol <= 0:
        raise ValueError("group_tol must be positive")
    norms = X.norms
    order = np.argsort(norms, kind="stable")
    groups = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if norms[cur] - norms[prev] <= group_tol:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    membership = [0] * X.N
    radii, shell_weights = [], []
    for k, g in enumerate(groups):
        vals = norms[g]
        if vals.max() - vals.min() > group_tol:
            raise AmbiguousShellError(
                f"norms {vals.min():.3e}..{vals.max():.3e} chain across more than {group_tol:g}"
            )
        r = float(np.mean(vals))
        if r <= group_tol:
            r = 0.0
        radii.append(r)
        shell_weights.append(float(np.sum(X.weights[g])))
        for i in g:
            membership[i] = k
    eps = 1 if radii[0] == 0.0 else 0
    return ShellDecomposition(tuple(radii), tuple(membership), eps, tuple(shell_weights))


def antipodal_pairs(X, tol=1e-9):
    """Index pairs (i, j) with x_j = -x_i, or None if X is not antipodal.

    The origin is paired with itself. Weights must agree within ``tol``.
    """
    P, w = X.points, X.weights
    partner = [-1] * X.N
    for i in range(X.N):
        if partner[i] >= 0:
            continue
        d = np.max(np.abs(P + P[i]), axis=1)
        j = int(np.argmin(d))
        if d[j] > tol or partner[j] >= 0 and partner[j] != i:
            return None
        if abs(w[i] - w[j]) > tol:
            return None
        partner[i], partner[j] = j, i
    return [(i, partner[i]) for i in range(X.N) if i <= partner[i]]


def is_antipodal(X, tol=1e-9):
    return antipodal_pairs(X, tol) is not None


def antipodal_half(X, tol=1e-9):
    """X* with X* u (-X*) = X, keeping the lower index of each pair."""
    pairs = antipodal_pairs(X, tol)
    if pairs is None:
        raise ValueError("point set is not antipodal")
    idx = [i for i, _ in pairs]
    return WeightedPointSet(X.points[idx], X.weights[idx], dict(X.metadata))
