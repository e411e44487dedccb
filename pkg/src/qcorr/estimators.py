"""scikit-learn style wrappers.

Both estimators are stateless in the learning sense: ``fit`` only validates
its input (and, for the detector, keeps the scan reports), so they slot into
pipelines as feature extractors over batches of two-qubit states.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .degeneracy import AMBIGUITY_THRESHOLD, N_DESCENTS, SCAN_FACTOR, scan_degenerate_directions
from .frameworks import FRAMEWORKS, OptimizerSettings, evaluate_all_frameworks, independent_optimization
from .validation import check_states

__all__ = ["CorrelationTransformer", "DegeneracyDetector"]


class _SettingsMixin:
    def _settings(self):
        return OptimizerSettings(
            grid_points=self.grid_points,
            refine_tol=self.refine_tol,
            refine_max_iters=self.refine_max_iters,
            seed=self.seed,
            n_starts=self.n_starts,
        )


class CorrelationTransformer(_SettingsMixin, TransformerMixin, BaseEstimator):
    """Map two-qubit states to their (Q, C, T) correlations.

    Parameters
    ----------
    framework : str, default="independent_optimization"
        One of :data:`qcorr.frameworks.FRAMEWORKS`. The measurement-independent
        framework is only defined for Bell-diagonal input; other states give
        NaN rows.
    grid_points, refine_tol, refine_max_iters, n_starts, seed
        Forwarded to :class:`qcorr.frameworks.OptimizerSettings`.
    subsystem : {"A", "B"}, default="A"
        Which qubit is measured.

    Input ``X`` is either ``(n, 4, 4)`` density matrices or ``(n, 3)`` Bell
    vectors; ``transform`` returns an ``(n, 3)`` array of Q, C, T.
    """

    def __init__(
        self,
        framework="independent_optimization",
        grid_points=2000,
        refine_tol=1e-10,
        refine_max_iters=200,
        n_starts=5,
        seed=0,
        subsystem="A",
    ):
        self.framework = framework
        self.grid_points = grid_points
        self.refine_tol = refine_tol
        self.refine_max_iters = refine_max_iters
        self.n_starts = n_starts
        self.seed = seed
        self.subsystem = subsystem

    def fit(self, X, y=None):
        if self.framework not in FRAMEWORKS:
            raise ValueError(f"framework must be one of {FRAMEWORKS}, got {self.framework!r}")
        self._settings()
        self.n_states_seen_ = len(check_states(X))
        return self

    def _row(self, rho, settings):
        if self.framework == "independent_optimization":
            triple = independent_optimization(rho, settings, subsystem=self.subsystem)
        else:
            triples = evaluate_all_frameworks(rho, settings, subsystem=self.subsystem)
            triple = triples[FRAMEWORKS.index(self.framework)]
        if not triple.available:
            return [np.nan, np.nan, np.nan]
        return [triple.q, triple.c, triple.t]

    def transform(self, X):
        check_is_fitted(self, "n_states_seen_")
        settings = self._settings()
        return np.array([self._row(rho, settings) for rho in check_states(X)], dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(["q", "c", "t"], dtype=object)


class DegeneracyDetector(_SettingsMixin, BaseEstimator):
    """Flag states whose optimal measurement for Q is degenerate in a way that
    makes the classical correlation multivalued.

    ``predict`` returns a boolean per state, ``score_samples`` the spread of C
    over the Q-optimal directions. ``fit`` stores the scan reports of the
    training states in ``reports_``.
    """

    def __init__(
        self,
        tol=1e-7,
        ambiguity_threshold=AMBIGUITY_THRESHOLD,
        scan_factor=SCAN_FACTOR,
        n_descents=N_DESCENTS,
        grid_points=2000,
        refine_tol=1e-10,
        refine_max_iters=200,
        n_starts=5,
        seed=0,
    ):
        self.tol = tol
        self.ambiguity_threshold = ambiguity_threshold
        self.scan_factor = scan_factor
        self.n_descents = n_descents
        self.grid_points = grid_points
        self.refine_tol = refine_tol
        self.refine_max_iters = refine_max_iters
        self.n_starts = n_starts
        self.seed = seed

    def _scan(self, X):
        settings = self._settings()
        return [
            scan_degenerate_directions(
                rho,
                settings,
                tol=self.tol,
                ambiguity_threshold=self.ambiguity_threshold,
                scan_factor=self.scan_factor,
                n_descents=self.n_descents,
            )
            for rho in check_states(X)
        ]

    def fit(self, X, y=None):
        self.reports_ = self._scan(X)
        return self

    def score_samples(self, X):
        check_is_fitted(self, "reports_")
        return np.array([r.c_spread for r in self._scan(X)])

    def predict(self, X):
        check_is_fitted(self, "reports_")
        return self.score_samples(X) > self.ambiguity_threshold

    def fit_predict(self, X, y=None):
        self.fit(X)
        return np.array([r.is_ambiguous for r in self.reports_])
