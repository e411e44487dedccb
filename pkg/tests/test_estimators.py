import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

import oracles as o
from qcorr.estimators import CorrelationTransformer, DegeneracyDetector
from qcorr.states import UnphysicalStateError, build_rho_star
from qcorr.validation import check_bell_vectors, check_states

VECTORS = np.array([[0.3, 0.2, 0.1], [-0.4, 0.25, 0.05], [0.3, 0.2, 0.2]])


class TestValidation:
    def test_bell_vectors(self):
        assert check_bell_vectors([0.1, 0.2, 0.3]).shape == (1, 3)
        with pytest.raises(UnphysicalStateError):
            check_bell_vectors([[1, 1, 1]])
        with pytest.raises(ValueError):
            check_bell_vectors([[0.1, 0.2]])

    def test_states_accepts_many_forms(self, rng):
        mats = np.array([o.random_state(rng) for _ in range(2)])
        assert len(check_states(mats)) == 2
        assert len(check_states(mats[0])) == 1
        assert len(check_states(VECTORS)) == 3
        assert len(check_states(build_rho_star(0.2))) == 1
        assert len(check_states([build_rho_star(0.2)] * 2)) == 2

    def test_states_rejects_shape(self):
        with pytest.raises(ValueError, match="cannot interpret"):
            check_states(np.zeros((2, 5)))


class TestCorrelationTransformer:
    def test_params_round_trip(self):
        est = CorrelationTransformer(grid_points=300, seed=4)
        params = est.get_params()
        assert params["grid_points"] == 300 and params["seed"] == 4
        twin = clone(est)
        assert twin.get_params() == params
        assert twin.set_params(n_starts=2).n_starts == 2

    def test_transform_bell_vectors(self):
        out = CorrelationTransformer(grid_points=500).fit_transform(VECTORS)
        assert out.shape == (3, 3)
        np.testing.assert_allclose(out[:, 0], [0.2, 0.25, 0.2], atol=1e-8)
        np.testing.assert_allclose(out[:, 1], [0.3, 0.4, 0.3], atol=1e-8)

    def test_unavailable_framework_gives_nan(self, rng):
        est = CorrelationTransformer(framework="measurement_independent", grid_points=300)
        out = est.fit_transform(np.array([o.random_state(rng)]))
        assert np.isnan(out).all()

    def test_unknown_framework(self):
        with pytest.raises(ValueError):
            CorrelationTransformer(framework="nope").fit(VECTORS)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            CorrelationTransformer().transform(VECTORS)

    def test_feature_names(self):
        names = CorrelationTransformer().fit(VECTORS).get_feature_names_out()
        assert list(names) == ["q", "c", "t"]

    def test_in_pipeline(self):
        pipe = make_pipeline(
            CorrelationTransformer(grid_points=300), FunctionTransformer(lambda z: z[:, 2:] - z[:, 1:2])
        )
        gap = pipe.fit_transform(VECTORS[:1])
        assert gap[0, 0] == pytest.approx(0.0, abs=1e-8)


class TestDegeneracyDetector:
    def test_fit_predict(self):
        det = DegeneracyDetector(grid_points=500)
        flags = det.fit_predict(VECTORS)
        np.testing.assert_array_equal(flags, [True, True, False])
        assert len(det.reports_) == 3

    def test_scores(self):
        det = DegeneracyDetector(grid_points=500).fit(VECTORS[:1])
        score = det.score_samples([build_rho_star(0.5)])
        assert score[0] == pytest.approx(0.5, abs=1e-9)
        assert det.predict([build_rho_star(0.5)]).tolist() == [True]

    def test_clone(self):
        det = clone(DegeneracyDetector(tol=1e-6, ambiguity_threshold=1e-3))
        assert det.tol == 1e-6 and det.ambiguity_threshold == 1e-3

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            DegeneracyDetector().predict(VECTORS)
