# -*- encoding: utf-8 -*-

import json

import numpy as np
import pytest

from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import DimensionTag, FeatureKey, LocalMap, PoseFrame, PoseKey, StateVector
from linslam.errors import InvalidInput, MissingEntity
from linslam.evaluation import (
    MetricReport,
    alignment_frame,
    chi2,
    chi2_quantile,
    evaluate,
    feature_information,
    nees,
    rmse
)
from linslam.localmap import build_local_map
from linslam.sim import ScenarioConfig, generate, truth_map
from linslam.strategy import join_divide_conquer, join_sequential

D2 = DimensionTag.D2
QUIET = {"odometry_sigma" : (0.02, 0.005), "observation_sigma" : 0.02}

@pytest.mark.parametrize("p, df, expected, tol", [
    (0.95, 1, 3.841, 1e-3),
    (0.95, 1224, 1306.5, 0.1),
    (0.95, 8404, 8618.4, 0.1),
])
def test_chi2_quantile(p, df, expected, tol):
    assert chi2_quantile(p, df) == pytest.approx(expected, abs = tol)


def test_chi2_quantile_methods():
    exact = chi2_quantile(0.95, 200, method = "exact")
    approx = chi2_quantile(0.95, 200, method = "wilson-hilferty")
    assert approx == pytest.approx(exact, rel = 1e-3)

    with pytest.raises(InvalidInput):
        chi2_quantile(1.0, 10)
    with pytest.raises(InvalidInput):
        chi2_quantile(0.5, 0)
    with pytest.raises(InvalidInput):
        chi2_quantile(0.5, 10, method = "table")


def test_nees_of_a_single_feature():
    estimate = StateVector([(FeatureKey(1), [1.0, 0.0])], D2)
    truth = StateVector([(FeatureKey(1), [0.0, 0.0])], D2)
    assert nees(estimate, SparseSymMatrix.identity(2, 4.0), truth) == pytest.approx(4.0)

    with pytest.raises(MissingEntity):
        nees(estimate, SparseSymMatrix.identity(2), StateVector([(FeatureKey(2), [0.0, 0.0])], D2))

    poses = StateVector([(PoseKey(1), [0.0, 0.0, 0.0])], D2)
    with pytest.raises(InvalidInput):
        nees(poses, SparseSymMatrix.identity(3), poses)


def test_feature_information_is_the_schur_complement(rng):
    estimate = StateVector([(PoseKey(1), [0.0, 0.0, 0.0]), (FeatureKey(4), [1.0, 2.0])], D2)
    factor = rng.normal(size = (5, 5))
    dense = factor @ factor.T + np.eye(5)

    features, marginal = feature_information(estimate, SparseSymMatrix.from_dense(dense))
    expected = dense[3:, 3:] - dense[3:, :3] @ np.linalg.solve(dense[:3, :3], dense[:3, 3:])
    assert features == [FeatureKey(4)]
    np.testing.assert_allclose(marginal, expected, rtol = 1e-9)


def test_chi2_of_exact_maps(exact_scenario):
    _, _, maps = exact_scenario
    joined = join_sequential(maps)

    assert chi2(joined, maps) == pytest.approx(0.0, abs = 1e-8)
    assert chi2(joined.estimate, maps, joined.frame) == pytest.approx(0.0, abs = 1e-8)
    with pytest.raises(InvalidInput):
        chi2(joined.estimate, maps)


def test_rmse_of_a_shifted_feature(noisy_scenario):
    _, _, maps = noisy_scenario
    joined = join_sequential(maps)

    zero = rmse(joined, joined)
    np.testing.assert_allclose(zero, 0.0, atol = 1e-9)
    assert alignment_frame(joined, joined) == PoseFrame(0)

    features = joined.estimate.features()
    values = joined.estimate.as_array()
    values[joined.estimate.slice(features[0])] += [0.3, 0.4]
    shifted = LocalMap(joined.frame, StateVector.from_array(joined.estimate, values), joined.info)

    errors = rmse(shifted, joined)
    assert errors.abs_feature == pytest.approx(np.sqrt(0.25 / len(features)))
    assert errors.abs_pose == pytest.approx(0.0, abs = 1e-9)
    assert errors.rel_pose == pytest.approx(0.0, abs = 1e-9)


def test_rmse_needs_common_entries():
    first = LocalMap(PoseFrame(0), StateVector([(FeatureKey(1), [0.0, 0.0])], D2), SparseSymMatrix.identity(2))
    second = LocalMap(PoseFrame(3), StateVector([(FeatureKey(2), [0.0, 0.0])], D2), SparseSymMatrix.identity(2))
    with pytest.raises(MissingEntity):
        rmse(first, second)


def test_evaluate_against_the_truth(exact_scenario):
    truth, _, maps = exact_scenario
    joined = join_sequential(maps)
    reference = truth_map(truth)

    report = evaluate(joined, maps = maps, reference = reference, truth = reference)
    assert report.chi2 == pytest.approx(0.0, abs = 1e-8)
    assert report.rmse_abs_pose == pytest.approx(0.0, abs = 1e-6)
    assert report.rmse_abs_feature == pytest.approx(0.0, abs = 1e-6)
    assert report.dims == 2 * len(joined.estimate.features())
    assert report.nees_consistent

    assert evaluate(joined).to_dict() == {}


def test_metric_report_rendering():
    report = MetricReport(chi2 = 12.5, nees = 3.0, nees_bound_95 = 5.991, dims = 2)

    assert report.to_text() == "chi2=12.5\nnees=3\nnees_bound_95=5.991\ndims=2\n"
    assert json.loads(report.to_json()) == {"chi2" : 12.5, "nees" : 3.0, "nees_bound_95" : 5.991, "dims" : 2}
    assert report.nees_consistent
    assert not MetricReport(chi2 = 1.0).nees_consistent


@pytest.mark.slow
def test_monte_carlo_nees_consistency():
    consistent, normalized = {"seq" : 0, "dc" : 0}, {"seq" : [], "dc" : []}
    for seed in range(100):
        truth, chunks = generate(ScenarioConfig(poses = 51, chunk_size = 5, feature_density = 0.14, seed = seed, **QUIET))
        maps = [build_local_map(chunk, PoseFrame(chunk.poses[0])) for chunk in chunks]

        for name, driver in (("seq", join_sequential), ("dc", join_divide_conquer)):
            report = evaluate(driver(maps), truth = truth_map(truth))
            consistent[name] += report.nees_consistent
            normalized[name].append(report.nees / report.dims)

    # the 95 % bound is crossed about five times in a hundred runs
    for name in ("seq", "dc"):
        assert consistent[name] >= 88, name
        assert 0.85 <= np.mean(normalized[name]) <= 1.15, name
