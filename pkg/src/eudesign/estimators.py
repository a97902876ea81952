"""A scikit-learn style wrapper: fit on (points, sample_weight), read the verdict."""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from eudesign.design import (
    DEFAULT_TOL,
    WeightedPointSet,
    classify_tightness,
    decompose_shells,
    moment_residuals,
)

__all__ = ["DesignVerifier"]


class DesignVerifier(BaseEstimator):
    """Check whether weighted points form a Euclidean design of a given strength.

    Parameters
    ----------
    strength : int
        Design strength t.
    tol : float
        Residual tolerance for the moment conditions.
    group_tol : float
        Tolerance for grouping norms into shells.
    classify : bool
        Also run the tightness classification.

    Attributes after ``fit``: ``residuals_``, ``max_residual_``, ``is_design_``,
    ``shells_`` and (with ``classify``) ``tightness_``.
    """

    def __init__(self, strength=2, tol=DEFAULT_TOL, group_tol=1e-8, classify=True):
        self.strength = strength
        self.tol = tol
        self.group_tol = group_tol
        self.classify = classify

    def _as_design(self, X, sample_weight):
        if isinstance(X, WeightedPointSet):
            if sample_weight is not None:
                X = X.with_weights(sample_weight)
            return X
        return WeightedPointSet(X, sample_weight)

    def fit(self, X, y=None, sample_weight=None):
        design = self._as_design(X, sample_weight)
        report = moment_residuals(design, self.strength, self.tol)
        self.n_features_in_ = design.n
        self.report_ = report
        self.residuals_ = report.residuals
        self.max_residual_ = report.max_abs_residual
        self.is_design_ = report.is_design
        self.shells_ = decompose_shells(design, self.group_tol)
        self.tightness_ = (
            classify_tightness(design, self.strength, self.tol, self.group_tol)
            if self.classify
            else None
        )
        return self

    def score(self, X, y=None, sample_weight=None):
        """Negative max residual of ``X`` (0 for an exact design)."""
        check_is_fitted(self, "report_")
        design = self._as_design(X, sample_weight)
        return -moment_residuals(design, self.strength, self.tol).max_abs_residual
