"""Design-strength verification by two independent routes.

``moment_residuals`` checks the harmonic moment conditions
sum_u w(u) |u|^{2j} phi(u) = 0; ``verify_design_integral`` compares weighted
sums of monomials against shell averages directly.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from eudesign.design.pointset import decompose_shells
from eudesign.poly import harmonic_basis, monomial_exponents, sphere_monomial_average

__all__ = [
    "StrengthReport",
    "moment_residuals",
    "moment_equation_count",
    "verify_design_integral",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class StrengthReport:
    strength: int
    labels: tuple  # (l, j, k) per residual
    residuals: np.ndarray
    tol: float

    @property
    def max_abs_residual(self):
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    @property
    def is_design(self):
        return self.max_abs_residual <= self.tol

    @property
    def equation_count(self):
        return len(self.residuals)

    def to_dict(self):
        return {
            "strength": self.strength,
            "equation_count": self.equation_count,
            "max_abs_residual": self.max_abs_residual,
            "tol": self.tol,
            "is_design": self.is_design,
        }


def moment_equation_count(n, t):
    return sum((((t - l) // 2) + 1) * len(harmonic_basis(n, l)) for l in range(1, t + 1))


def moment_residuals(X, t, tol=DEFAULT_TOL):
    """Harmonic moment sums for 1 <= l <= t, 0 <= j <= floor((t-l)/2)."""
    if t < 1:
        raise ValueError("strength must be >= 1")
    sq = np.sum(X.points**2, axis=1)
    labels, values = [], []
    for l in range(1, t + 1):
        basis = harmonic_basis(X.n, l)
        if not len(basis):  # Harm_l(R^1) = 0 for l >= 2
            continue
        phis = np.array([phi.evaluate_many(X.points) for phi in basis])
        for j in range((t - l) // 2 + 1):
            sums = phis @ (X.weights * sq**j)
            for k, v in enumerate(sums):
                labels.append((l, j, k))
                values.append(v)
    return StrengthReport(t, tuple(labels), np.array(values), tol)


def verify_design_integral(X, t, group_tol=1e-8):
    """Max over monomials f of degree <= t of |shell-average side - weighted sum|.

    The shell side is sum_i w(X_i) r_i^{deg f} avg_{S^{n-1}}(f); an origin
    shell contributes w(X_i) f(0).
    """
    if t < 1:
        raise ValueError("strength must be >= 1")
    shells = decompose_shells(X, group_tol)
    radii = np.array(shells.radii)
    sw = np.array(shells.shell_weights)
    worst = 0.0
    for d in range(t + 1):
        for alpha in monomial_exponents(X.n, d):
            avg = sphere_monomial_average(alpha, X.n)
            if d == 0:
                lhs = float(np.sum(sw))
            elif avg == Fraction(0):
                lhs = 0.0
            else:
                lhs = float(avg) * float(np.sum(sw * radii**d))
            rhs = float(np.sum(X.weights * np.prod(X.points**np.array(alpha), axis=1)))
            worst = max(worst, abs(lhs - rhs))
    return worst
