# -*- encoding: utf-8 -*-

"""
Accuracy and Consistency Metrics of a Global Map

    * chi-square of a solution w.r.t. the local maps it was built from;
    * absolute and relative RMSE w.r.t. a reference solution, both
      aligned on a shared frame first;
    * NEES of the features w.r.t. the ground truth and its chi-square
      quantile bound.

The metrics can be gathered in a :class:`MetricReport` written as
``key=value`` lines or as JSON.
"""

import json
import logging

from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sps

from scipy import stats

from linslam.core.frames import expand_state, frame_change, relative_pose
from linslam.core.geometry import wrap_angles
from linslam.core.sparse import SparseSymMatrix, SPDFactor
from linslam.core.state import FrameDescriptor, LocalMap, PoseFrame, StateVector
from linslam.errors import InvalidInput, MissingEntity
from linslam.join import choose_feature_frame
from linslam.oracle import map_residual

logger = logging.getLogger(__name__)

def _solution(solution : Union[StateVector, LocalMap], frame : FrameDescriptor) -> tuple:
    if isinstance(solution, LocalMap):
        return solution.estimate, frame or solution.frame
    elif frame is None:
        raise InvalidInput("the frame of the solution is required")

    return solution, frame


def chi2(solution : Union[StateVector, LocalMap], maps : Sequence[LocalMap], frame : FrameDescriptor = None) -> float:
    """
    Chi-Square of a Solution w.r.t. Local Maps

    Sum over the maps of ``e.T @ I @ e`` with ``e`` the residual of the
    map at the solution (see :func:`linslam.oracle.map_residual`).

    :type  solution: StateVector | LocalMap
    :param solution: Global estimate, a map carries its own frame.

    :type  frame: FrameDescriptor
    :param frame: Frame of a bare state vector solution.

    :raises MissingEntity: An entry of a map is not part of the
        solution.
    """

    estimate, frame = _solution(solution, frame)

    total = 0.0
    for local in maps:
        residual, _ = map_residual(estimate, frame, local)
        total += float(residual @ (local.info @ residual))

    return total


class RmseResult(NamedTuple):
    abs_pose : float
    abs_feature : float
    rel_pose : float
    rel_rot : float


def _rms(values : list) -> float:
    return float(np.sqrt(np.mean(values))) if values else 0.0


def alignment_frame(solution : LocalMap, reference : LocalMap) -> FrameDescriptor:
    """
    Shared Frame used to Compare Two Maps

    The frame of the lowest id common pose, else the first non
    degenerate pair/triple of common features.

    :raises MissingEntity: The maps share no entity.
    """

    common = sorted(solution.entity_keys() & reference.entity_keys())
    if not common:
        raise MissingEntity("solution and reference share no entry")

    poses = [key for key in common if key.is_pose]
    if poses:
        return PoseFrame(poses[0].id)

    return choose_feature_frame(solution.estimate, solution.frame, common, solution.tag)


def _aligned(local : LocalMap, frame : FrameDescriptor) -> dict:
    moved, _ = frame_change(local.estimate, local.frame, frame, local.tag)
    return expand_state(moved, frame, local.tag)


def rmse(solution : LocalMap, reference : LocalMap, align_frame : FrameDescriptor = None) -> RmseResult:
    """
    Absolute and Relative RMSE of a Solution w.r.t. a Reference

    Both maps are first moved into ``align_frame`` (see
    :func:`alignment_frame` for the default). The absolute errors are
    the RMS position differences over common poses and common
    features, the relative errors compare the motion between
    consecutive common poses (ascending ids): the translation of pose
    ``k + 1`` seen from pose ``k`` (meters) and the relative rotation
    angles (radians), reported separately.

    :raises MissingEntity: The maps share no entry.

    :rtype:  RmseResult
    :return: ``(abs_pose, abs_feature, rel_pose, rel_rot)``.
    """

    if solution.tag is not reference.tag:
        raise InvalidInput("solution and reference have different dimension tags")

    tag = solution.tag
    frame = align_frame or alignment_frame(solution, reference)
    ours, theirs = _aligned(solution, frame), _aligned(reference, frame)

    common = sorted(set(ours) & set(theirs))
    if not common:
        raise MissingEntity("solution and reference share no entry")

    d = tag.trans_dim
    abs_pose = [float(np.sum((ours[k][:d] - theirs[k][:d]) ** 2)) for k in common if k.is_pose]
    abs_feature = [float(np.sum((ours[k] - theirs[k]) ** 2)) for k in common if k.is_feature]

    rel_pose, rel_rot = [], []
    poses = [k for k in common if k.is_pose]
    for first, second in zip(poses, poses[1:]):
        ours_rel, _, _ = relative_pose(ours[first], ours[second], tag)
        theirs_rel, _, _ = relative_pose(theirs[first], theirs[second], tag)
        rel_pose.append(float(np.sum((ours_rel[:d] - theirs_rel[:d]) ** 2)))
        rel_rot.append(float(np.sum(wrap_angles(ours_rel[d:] - theirs_rel[d:]) ** 2)))

    return RmseResult(_rms(abs_pose), _rms(abs_feature), _rms(rel_pose), _rms(rel_rot))


def feature_information(estimate : StateVector, info : SparseSymMatrix) -> tuple:
    """
    Marginal Information of the Feature Entries (Schur Complement)

    :raises SingularSystem: The information over the non feature
        entries is not positive definite.

    :rtype:  tuple
    :return: The feature keys and the dense marginal information.
    """

    features = estimate.features()
    others = [key for key in estimate.keys if not key.is_feature]
    index_f, index_o = estimate.index_of(features), estimate.index_of(others)

    full = info.to_scipy()
    I_ff = full[index_f][:, index_f].toarray()
    if index_o.size:
        I_fo = sps.csc_matrix(full[index_f][:, index_o])
        solved = SPDFactor(full[index_o][:, index_o]).solve(I_fo.T.toarray())
        I_ff = I_ff - I_fo @ solved

    return features, 0.5 * (I_ff + I_ff.T)


def nees(estimate : StateVector, info : SparseSymMatrix, truth : StateVector) -> float:
    """
    Normalized Estimation Error Squared of the Features

    The non feature entries are marginalized out, the error
    ``e = estimate - truth`` over the features (truth supplied in the
    frame of the estimate) is weighted by the marginal information.

    .. code-block:: python

        # one 2D feature, error (1, 0), information 4 * I
        nees(estimate, SparseSymMatrix.identity(2, 4.0), truth)
        >>> 4.0

    :raises SingularSystem: The information is singular.
    :raises MissingEntity: A feature of the estimate is missing from
        the truth.
    """

    features, marginal = feature_information(estimate, info)
    if not features:
        raise InvalidInput("the estimate holds no feature")

    missing = [str(key) for key in features if key not in truth]
    if missing:
        raise MissingEntity(f"truth misses features {missing}")

    error = np.concatenate([estimate.value(key) - truth.value(key) for key in features])
    # positive definiteness check of the marginal information
    SPDFactor(SparseSymMatrix.from_dense(marginal))

    return float(error @ marginal @ error)


def chi2_quantile(p : float, df : int, method : str = "auto") -> float:
    """
    Quantile of the Chi-Square Distribution

    The Wilson-Hilferty approximation
    ``df * (1 - 2 / (9 df) + z * sqrt(2 / (9 df))) ** 3``, ``z`` the
    normal quantile of ``p``, is used for ``df >= 30`` (relative error
    well below 0.1 % there), exact inversion of the distribution below.

    .. code-block:: python

        round(chi2_quantile(0.95, 1224), 1)
        >>> 1306.5

    :type  method: str
    :param method: One of ``auto``, ``exact``, ``wilson-hilferty``.
    """

    if not 0.0 < p < 1.0:
        raise InvalidInput(f"probability must lie in (0, 1), got {p}")
    if int(df) != df or df < 1:
        raise InvalidInput(f"degrees of freedom must be a positive integer, got {df}")

    method = method.lower()
    if method not in ("auto", "exact", "wilson-hilferty"):
        raise InvalidInput(f"unknown quantile method {method!r}")

    if method == "exact" or (method == "auto" and df < 30):
        return float(stats.chi2.ppf(p, df))

    z = stats.norm.ppf(p)
    k = 2.0 / (9.0 * df)
    return float(df * (1.0 - k + z * np.sqrt(k)) ** 3)


@dataclass
class MetricReport:
    """
    Evaluation Results of a Solution

    Metrics that were not requested are left to None.
    """

    chi2 : float = None
    rmse_abs_pose : float = None
    rmse_abs_feature : float = None
    rmse_rel_pose : float = None
    rmse_rel_rot : float = None
    nees : float = None
    nees_bound_95 : float = None
    dims : int = None

    def to_dict(self) -> dict:
        return {key : value for key, value in asdict(self).items() if value is not None}

    def to_text(self) -> str:
        return "".join(
            f"{key}={value:.10g}\n" if isinstance(value, float) else f"{key}={value}\n"
            for key, value in self.to_dict().items()
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), indent = kwargs.get("indent", 2), sort_keys = False)

    @property
    def nees_consistent(self) -> bool:
        return self.nees is not None and self.nees <= self.nees_bound_95


def evaluate(solution : LocalMap, **kwargs) -> MetricReport:
    """
    Gather the Requested Metrics of a Solution

    Keyword Arguments
    -----------------

        * **maps** (*list*): Local maps, enables the chi-square.
        * **reference** (*LocalMap*): Reference solution, enables the
            RMSE metrics.
        * **truth** (*LocalMap*): Ground truth, in any frame holding the
            frame entities of the solution, enables the NEES.
        * **align_frame** (*FrameDescriptor*): Frame used for the RMSE
            alignment, see :func:`rmse`.
    """

    maps = kwargs.get("maps", None)
    reference = kwargs.get("reference", None)
    truth = kwargs.get("truth", None)

    report = MetricReport()
    if maps:
        report.chi2 = chi2(solution, maps)

    if reference is not None:
        errors = rmse(solution, reference, kwargs.get("align_frame", None))
        report.rmse_abs_pose, report.rmse_abs_feature = errors.abs_pose, errors.abs_feature
        report.rmse_rel_pose, report.rmse_rel_rot = errors.rel_pose, errors.rel_rot

    if truth is not None:
        features = solution.estimate.features()
        truth_here, _ = frame_change(truth.estimate, truth.frame, solution.frame, solution.tag, keys = features)
        report.nees = nees(solution.estimate, solution.info, truth_here)
        report.dims = truth_here.dim
        report.nees_bound_95 = chi2_quantile(0.95, report.dims)

    logger.info("evaluation: %s", report.to_dict())
    return report
