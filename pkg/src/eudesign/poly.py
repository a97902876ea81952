"""Sparse multivariate polynomials, harmonic bases and Gegenbauer polynomials.

Polynomials are stored as a mapping from exponent tuples to coefficients.
Coefficients are either exact (``fractions.Fraction``) or ``float``; the mode
is fixed at construction and propagates through arithmetic (exact op float
gives float).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, gcd, lcm

import numpy as np

__all__ = [
    "Polynomial",
    "HarmonicBasis",
    "GegenbauerPoly",
    "monomial_exponents",
    "harmonic_dimension",
    "sphere_monomial_average",
    "laplacian",
    "evaluate",
    "harmonic_basis",
    "orthonormalize_sphere",
    "gegenbauer",
]


def monomial_exponents(n, degree):
    """Exponent tuples of all degree-``degree`` monomials in ``n`` variables.

    Graded lexicographic order within the degree: ``x1^d`` first.
    """
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return out


def harmonic_dimension(n, l):
    """h_l = dim Harm_l(R^n) = C(n+l-1, l) - C(n+l-3, l-2)."""
    if l < 0:
        return 0
    if l < 2:
        return 1 if l == 0 else n
    return comb(n + l - 1, l) - comb(n + l - 3, l - 2)


class Polynomial:
    """Sparse polynomial in ``n`` variables.

    Parameters
    ----------
    terms : dict
        ``{exponent tuple: coefficient}``. Zero coefficients are dropped.
    n : int
        Number of variables.
    exact : bool
        Store coefficients as ``Fraction`` (True) or ``float`` (False).
    """

    __slots__ = ("n", "exact", "terms", "_compiled")

    def __init__(self, terms, n, exact=True):
        if n < 1:
            raise ValueError("polynomial dimension must be >= 1")
        self.n = n
        self.exact = exact
        conv = Fraction if exact else float
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(f"exponent {alpha} does not have length {n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = conv(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        self.terms = {a: c for a, c in clean.items() if c != 0}
        self._compiled = None

    # constructors

    @classmethod
    def zero(cls, n, exact=True):
        return cls({}, n, exact)

    @classmethod
    def constant(cls, value, n, exact=True):
        return cls({(0,) * n: value}, n, exact)

    @classmethod
    def variable(cls, i, n, exact=True):
        """The coordinate function x_{i+1} (``i`` is 0-based)."""
        alpha = [0] * n
        alpha[i] = 1
        return cls({tuple(alpha): 1}, n, exact)

    @classmethod
    def norm_squared(cls, n, exact=True):
        return cls({tuple(2 if k == i else 0 for k in range(n)): 1 for i in range(n)}, n, exact)

    # basic properties

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        parts = []
        for alpha in sorted(self.terms, key=lambda a: (-sum(a), [-x for x in a])):
            c = self.terms[alpha]
            mono = "*".join(
                f"x{i + 1}" if a == 1 else f"x{i + 1}^{a}" for i, a in enumerate(alpha) if a
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return "Polynomial(" + " + ".join(parts) + ")"

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, float, Fraction)):
            return self == Polynomial.constant(other, self.n, self.exact)
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    @property
    def degree(self):
        return max((sum(a) for a in self.terms), default=-1)

    def is_homogeneous(self, degree=None):
        degs = {sum(a) for a in self.terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def to_float(self):
        if not self.exact:
            return self
        return Polynomial({a: float(c) for a, c in self.terms.items()}, self.n, exact=False)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.n, self.exact)
        if isinstance(other, (float, np.floating)):
            return Polynomial.constant(float(other), self.n, exact=False)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0) + c
        return Polynomial(terms, self.n, self.exact and other.exact)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({a: -c for a, c in self.terms.items()}, self.n, self.exact)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0) + c * d
        return Polynomial(terms, self.n, self.exact and other.exact)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(1, self.n, self.exact)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self, i):
        """Partial derivative with respect to x_{i+1}."""
        terms = {}
        for a, c in self.terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                terms[tuple(b)] = c * a[i]
        return Polynomial(terms, self.n, self.exact)

    # evaluation

    def _compile(self):
        if self._compiled is None:
            if self.terms:
                exps = np.array(list(self.terms), dtype=np.int64)
                coefs = np.array([float(c) for c in self.terms.values()])
            else:
                exps = np.zeros((0, self.n), dtype=np.int64)
                coefs = np.zeros(0)
            self._compiled = (exps, coefs)
        return self._compiled

    def __call__(self, point):
        return evaluate(self, point)

    def evaluate_many(self, points):
        """Float values at the rows of an ``(N, n)`` array."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n:
            raise ValueError(f"points have dimension {points.shape[1]}, polynomial has {self.n}")
        exps, coefs = self._compile()
        if not len(coefs):
            return np.zeros(points.shape[0])
        powers = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
        return powers @ coefs


def evaluate(p, point):
    """Value of ``p`` at ``point``. Exact when both are exact."""
    point = tuple(point)
    if len(point) != p.n:
        raise ValueError(f"point has dimension {len(point)}, polynomial has {p.n}")
    if p.exact and all(isinstance(x, (int, Fraction)) for x in point):
        total = Fraction(0)
        for a, c in p.terms.items():
            term = c
            for x, k in zip(point, a):
                if k:
                    term *= Fraction(x) ** k
            total += term
        return total
    return float(p.evaluate_many(np.array([point], dtype=float))[0])


def laplacian(p):
    """Sum of second partial derivatives."""
    out = Polynomial.zero(p.n, p.exact)
    for i in range(p.n):
        out = out + p.derivative(i).derivative(i)
    return out


@lru_cache(maxsize=None)
def _double_factorial(k):
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


@lru_cache(maxsize=None)
def sphere_monomial_average(alpha, n=None):
    """Average of x^alpha over the unit sphere S^{n-1}, as an exact Fraction.

    Zero if any exponent is odd; otherwise
    prod (alpha_i - 1)!! / (n (n+2) ... (n + |alpha| - 2)).
    """
    alpha = tuple(alpha)
    if n is None:
        n = len(alpha)
    if len(alpha) != n:
        raise ValueError(f"multi-index of length {len(alpha)} for dimension {n}")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    num = 1
    for a in alpha:
        num *= _double_factorial(a - 1)
    den = 1
    for k in range(sum(alpha) // 2):
        den *= n + 2 * k
    return Fraction(num, den)


# harmonic bases


@dataclass(frozen=True)
class HarmonicBasis:
    """A basis of Harm_l(R^n)."""

    n: int
    degree: int
    elements: tuple
    orthonormal: bool = False

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def _laplacian_rows(n, l):
    """Sparse integer matrix of the Laplacian Hom_l -> Hom_{l-2}.

    Returned as a list of rows (dict column -> int), one per target monomial.
    """
    cols = monomial_exponents(n, l)
    targets = {a: r for r, a in enumerate(monomial_exponents(n, l - 2))}
    rows = [dict() for _ in targets]
    for c, alpha in enumerate(cols):
        for i, a in enumerate(alpha):
            if a >= 2:
                beta = list(alpha)
                beta[i] -= 2
                r = targets[tuple(beta)]
                rows[r][c] = rows[r].get(c, 0) + a * (a - 1)
    return rows, cols


def _integer_nullspace(rows, ncols):
    """Nullspace of a sparse integer matrix via fraction-free reduction.

    Rows stay integral throughout (row_s <- a*row_s - b*row_r, then divide by
    the content). Returns primitive integer vectors, one per free column.
    """
    rows = [dict(r) for r in rows if r]
    pivots = []  # (column, row dict)
    for col in range(ncols):
        idx = next((k for k, r in enumerate(rows) if col in r), None)
        if idx is None:
            continue
        prow = rows.pop(idx)
        a = prow[col]
        # eliminate col from remaining and from existing pivot rows
        for group in (rows, [r for _, r in pivots]):
            for r in group:
                b = r.get(col)
                if b is None:
                    continue
                g = gcd(a, b)
                fa, fb = a // g, b // g
                for k in list(r):
                    r[k] *= fa
                for k, v in prow.items():
                    nv = r.get(k, 0) - fb * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
                content = 0
                for v in r.values():
                    content = gcd(content, v)
                if content > 1:
                    for k in r:
                        r[k] //= content
        rows = [r for r in rows if r]
        pivots.append((col, prow))
    pivot_cols = {c for c, _ in pivots}
    basis = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = {free: Fraction(1)}
        for c, r in pivots:
            if free in r:
                vec[c] = Fraction(-r[free], r[c])
        den = 1
        for v in vec.values():
            den = lcm(den, v.denominator)
        ints = {k: int(v * den) for k, v in vec.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        basis.append({k: v // g for k, v in ints.items()})
    return basis


@lru_cache(maxsize=None)
def harmonic_basis(n, l):
    """Exact integer-coefficient basis of Harm_l(R^n).

    Computed as the nullspace of the Laplacian on degree-l homogeneous
    polynomials. Elements are not orthonormal.
    """
    if n < 1 or l < 0:
        raise ValueError("need n >= 1 and l >= 0")
    if l < 2:
        elems = [Polynomial({m: 1}, n) for m in monomial_exponents(n, l)]
        return HarmonicBasis(n, l, tuple(elems))
    rows, cols = _laplacian_rows(n, l)
    null = _integer_nullspace(rows, len(cols))
    elems = [Polynomial({cols[k]: v for k, v in vec.items()}, n) for vec in null]
    return HarmonicBasis(n, l, tuple(elems))


def _sphere_moment_matrix(n, l):
    monos = monomial_exponents(n, l)
    m = len(monos)
    G = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            s = tuple(a + b for a, b in zip(monos[i], monos[j]))
            G[i, j] = G[j, i] = float(sphere_monomial_average(s, n))
    return monos, G


def sphere_inner_product(p, q):
    """<p, q> = average of p*q over the unit sphere."""
    prod = p * q
    total = Fraction(0) if prod.exact else 0.0
    for a, c in prod.terms.items():
        total += c * sphere_monomial_average(a, p.n)
    return total


def orthonormalize_sphere(basis):
    """Gram-Schmidt of a homogeneous basis under the sphere-average inner product.

    Implemented as a Cholesky factorisation of the Gram matrix; the result has
    float coefficients.
    """
    elems = list(basis)
    if not elems:
        return HarmonicBasis(basis.n, basis.degree, (), orthonormal=True)
    n, l = basis.n, basis.degree
    monos, moments = _sphere_moment_matrix(n, l)
    index = {a: i for i, a in enumerate(monos)}
    A = np.zeros((len(elems), len(monos)))
    for r, p in enumerate(elems):
        if not p.is_homogeneous(l):
            raise ValueError("all basis elements must be homogeneous of the basis degree")
        for a, c in p.terms.items():
            A[r, index[a]] = float(c)
    gram = A @ moments @ A.T
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("basis is rank deficient") from exc
    if np.min(np.abs(np.diag(L))) < 1e-12 * np.max(np.abs(np.diag(L))):
        raise ValueError("basis is rank deficient")
    B = np.linalg.solve(L, A)
    out = tuple(
        Polynomial({monos[k]: B[r, k] for k in np.flatnonzero(B[r])}, n, exact=False)
        for r in range(B.shape[0])
    )
    return HarmonicBasis(n, l, out, orthonormal=True)


# Gegenbauer polynomials


@dataclass(frozen=True)
class GegenbauerPoly:
    """Q_l for dimension n, normalised so that Q_l(1) = h_l.

    ``coefficients`` are exact Fractions in ascending powers of y.
    """

    n: int
    degree: int
    coefficients: tuple

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.polynomial.polynomial.polyval(y, [float(c) for c in self.coefficients])

    def exact_value(self, y):
        y = Fraction(y)
        return sum((c * y**k for k, c in enumerate(self.coefficients)), Fraction(0))


def _poly_mul_y(c):
    return [Fraction(0)] + list(c)


def _poly_axpy(a, x, y):
    m = max(len(x), len(y))
    x = list(x) + [Fraction(0)] * (m - len(x))
    y = list(y) + [Fraction(0)] * (m - len(y))
    return [a * u + v for u, v in zip(x, y)]


@lru_cache(maxsize=None)
def gegenbauer(n, l):
    """Gegenbauer polynomial Q_l in dimension n with Q_l(1) = h_l.

    n >= 3 rescales the ultraspherical C_l^{(n-2)/2}; n = 2 uses 2 T_l (l >= 1).
    """
    if n < 2 or l < 0:
        raise ValueError("need n >= 2 and l >= 0")
    if l == 0:
        return GegenbauerPoly(n, 0, (Fraction(1),))
    if n == 2:
        # Chebyshev T: T_{k+1} = 2y T_k - T_{k-1}
        prev, cur = [Fraction(1)], [Fraction(0), Fraction(1)]
        for _ in range(l - 1):
            prev, cur = cur, _poly_axpy(Fraction(-1), prev, [2 * c for c in _poly_mul_y(cur)])
        coeffs = [2 * c for c in cur]
    else:
        lam = Fraction(n - 2, 2)
        prev, cur = [Fraction(1)], [Fraction(0), 2 * lam]
        for k in range(2, l + 1):
            nxt = _poly_axpy(
                -(k + 2 * lam - 2), prev, [2 * (k + lam - 1) * c for c in _poly_mul_y(cur)]
            )
            prev, cur = cur, [c / k for c in nxt]
        at_one = sum(cur, Fraction(0))
        scale = Fraction(harmonic_dimension(n, l)) / at_one
        coeffs = [c * scale for c in cur]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return GegenbauerPoly(n, l, tuple(coeffs))
