import logging
import math
from collections import defaultdict
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from distractipy.configs.base_config import BaseConfig
from distractipy.logics.pipeline import predict_session, train_fold
from distractipy.models.dtos.evaluation_dtos import (
    AblationReportDTO,
    AblationRowDTO,
    ClassMetricsDTO,
    ConfusionMatrixDTO,
    DriverResultDTO,
    EvaluationReportDTO,
    PathAverageDTO,
    PathResultDTO,
)
from distractipy.models.dtos.pipeline_dtos import SessionObservationsDTO, SessionPredictionDTO
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, InsufficientDataError
from distractipy.models.types.distraction_types import DistractionClassType, FeatureGroupType

logger = logging.getLogger(__name__)

CLASS_CODES = tuple(member.value for member in DistractionClassType)
METRIC_NAMES = ("accuracy", "recall", "specificity", "precision", "f_measure", "g_mean")
ALL_GROUPS = "ALL"


def _check_pair(predicted: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape:
        raise DimensionMismatchError(expected=truth.shape, actual=predicted.shape)
    if truth.size == 0:
        raise EmptyInputError("labels")
    return predicted, truth


def total_average_accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Share of frames whose predicted label equals the ground truth.

    Args:
        predicted: (N,) predicted class codes.
        truth: (N,) ground-truth class codes.

    Returns:
        float: Correct decisions over evaluated frames.

    Raises:
        EmptyInputError: If there are no frames.
    """
    predicted, truth = _check_pair(predicted, truth)
    return int(np.count_nonzero(predicted == truth)) / truth.size


def binary_collapse(labels: np.ndarray) -> np.ndarray:
    """Map the five classes onto distracted (0) versus normal driving (1).

    Args:
        labels: Class codes.

    Returns:
        np.ndarray: BinaryClassType codes.
    """
    labels = np.asarray(labels, dtype=np.int64)
    return np.where(labels == DistractionClassType.NORMAL_DRIVING.value, 1, 0)


def confusion_matrix(
    predicted: np.ndarray,
    truth: np.ndarray,
    classes: Sequence[int] = CLASS_CODES,
) -> ConfusionMatrixDTO:
    """Count (truth, prediction) pairs.

    Args:
        predicted: (N,) predicted class codes.
        truth: (N,) ground-truth class codes.
        classes: Row and column codes, ascending.

    Returns:
        ConfusionMatrixDTO: Rows are ground truth, columns predictions.
    """
    predicted, truth = _check_pair(predicted, truth)
    codes = np.asarray(sorted(classes), dtype=np.int64)
    counts = np.zeros((codes.size, codes.size), dtype=np.int64)
    np.add.at(counts, (np.searchsorted(codes, truth), np.searchsorted(codes, predicted)), 1)
    return ConfusionMatrixDTO(class_codes=tuple(int(code) for code in codes), counts=counts)


def _ratio(numerator: float, denominator: float) -> float | None:
    return numerator / denominator if denominator > 0 else None


def per_class_metrics(matrix: ConfusionMatrixDTO, class_code: int) -> ClassMetricsDTO:
    """One-vs-rest metrics of one class.

    A metric whose denominator is zero is reported as None.

    Args:
        matrix: The confusion matrix.
        class_code: Class to score.

    Returns:
        ClassMetricsDTO: Accuracy, recall, specificity, precision, f-measure and g-mean.
    """
    index = matrix.class_codes.index(class_code)
    counts = matrix.counts
    tp = float(counts[index, index])
    fn = float(counts[index].sum()) - tp
    fp = float(counts[:, index].sum()) - tp
    tn = float(matrix.total) - tp - fn - fp

    recall = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    precision = _ratio(tp, tp + fp)
    f_measure = None
    if precision is not None and recall is not None:
        f_measure = _ratio(2.0 * precision * recall, precision + recall)
    g_mean = math.sqrt(recall * specificity) if recall is not None and specificity is not None else None
    return ClassMetricsDTO(
        class_name=DistractionClassType(class_code).name,
        accuracy=_ratio(tp + tn, float(matrix.total)),
        recall=recall,
        specificity=specificity,
        precision=precision,
        f_measure=f_measure,
        g_mean=g_mean,
    )


def path_result(predicted: np.ndarray, truth: np.ndarray) -> PathResultDTO:
    """Every score of one classifier path on a set of frames.

    Args:
        predicted: (N,) predicted class codes.
        truth: (N,) ground-truth class codes.

    Returns:
        PathResultDTO: Accuracies, confusion matrix and per-class metrics.
    """
    matrix = confusion_matrix(predicted, truth)
    return PathResultDTO(
        five_class_accuracy=total_average_accuracy(predicted, truth),
        two_class_accuracy=total_average_accuracy(binary_collapse(predicted), binary_collapse(truth)),
        confusion=matrix,
        per_class=tuple(per_class_metrics(matrix, code) for code in matrix.class_codes),
    )


def _mean(values: Sequence[float | None]) -> float | None:
    present = [value for value in values if value is not None]
    return float(np.mean(present)) if present else None


def path_average(results: Sequence[PathResultDTO]) -> PathAverageDTO:
    """Unweighted means across drivers; a per-class metric averages the drivers that define it.

    Args:
        results: One result per driver.

    Returns:
        PathAverageDTO: The averages.
    """
    per_class = []
    for index, first in enumerate(results[0].per_class):
        metrics = {
            name: _mean([getattr(result.per_class[index], name) for result in results]) for name in METRIC_NAMES
        }
        per_class.append(ClassMetricsDTO(class_name=first.class_name, **metrics))
    return PathAverageDTO(
        five_class_accuracy=float(np.mean([result.five_class_accuracy for result in results])),
        two_class_accuracy=float(np.mean([result.two_class_accuracy for result in results])),
        per_class=tuple(per_class),
    )


def driver_result(driver_id: str, predictions: Sequence[SessionPredictionDTO]) -> DriverResultDTO:
    """Pool the predictions of a driver's sessions.

    Args:
        driver_id: The held-out driver.
        predictions: Predictions of every session of that driver.

    Returns:
        DriverResultDTO: Scores of each path that produced predictions.
    """
    truth = np.concatenate([item.truth for item in predictions])
    results: dict[str, PathResultDTO | None] = {}
    for path in ("adaboost", "hmm"):
        labels = [getattr(item, path) for item in predictions]
        results[path] = None if any(item is None for item in labels) else path_result(np.concatenate(labels), truth)
    return DriverResultDTO(driver_id=driver_id, frame_count=int(truth.size), **results)


def group_by_driver(
    observations: Sequence[SessionObservationsDTO],
) -> dict[str, list[SessionObservationsDTO]]:
    """Sessions per driver, drivers and sessions in sorted order.

    Args:
        observations: Sessions of any drivers.

    Returns:
        dict: Driver id to that driver's sessions.
    """
    grouped: dict[str, list[SessionObservationsDTO]] = defaultdict(list)
    for item in sorted(observations, key=lambda item: (item.driver_id, item.session_id)):
        grouped[item.driver_id].append(item)
    return dict(sorted(grouped.items()))


def loso_cross_validation(
    observations: Sequence[SessionObservationsDTO],
    seed: int,
    config: BaseConfig | None = None,
) -> EvaluationReportDTO:
    """Leave-one-driver-out cross-validation of both fusion paths.

    Every fold trains all classifiers on the other drivers' sessions and labels the
    held-out driver's sessions.

    Args:
        observations: Observations of every session.
        seed: Seed of every fold.
        config: Optional configuration. If not provided, uses the global config.

    Returns:
        EvaluationReportDTO: One row per driver plus unweighted averages.

    Raises:
        InsufficientDataError: If fewer than two drivers are present.
    """
    configs: BaseConfig = config or BaseConfig.global_config()
    grouped = group_by_driver(observations)
    if len(grouped) < 2:
        raise InsufficientDataError(subject="drivers", required=2, available=len(grouped))

    rows = []
    for driver_id, held_out in grouped.items():
        training = [item for other, sessions in grouped.items() if other != driver_id for item in sessions]
        logger.info("Fold %s: training on %d sessions, testing on %d", driver_id, len(training), len(held_out))
        pipeline = train_fold(training, seed, configs)
        row = driver_result(driver_id, [predict_session(pipeline, item) for item in held_out])
        logger.info(
            "Fold %s: AdaBoost %s, HMM %s",
            driver_id,
            f"{row.adaboost.five_class_accuracy:.4f}" if row.adaboost else "-",
            f"{row.hmm.five_class_accuracy:.4f}" if row.hmm else "-",
        )
        rows.append(row)

    adaboost = [row.adaboost for row in rows if row.adaboost is not None]
    hmm = [row.hmm for row in rows if row.hmm is not None]
    return EvaluationReportDTO(
        seed=seed,
        feature_groups=tuple(configs.FUSION.FEATURE_GROUPS),
        drivers=tuple(rows),
        adaboost_average=path_average(adaboost) if adaboost else None,
        hmm_average=path_average(hmm) if hmm else None,
    )


def ablation(
    observations: Sequence[SessionObservationsDTO],
    seed: int,
    config: BaseConfig | None = None,
) -> AblationReportDTO:
    """Cross-validate once per feature group on its own, then with all groups.

    Args:
        observations: Observations of every session.
        seed: Seed of every fold.
        config: Optional configuration. If not provided, uses the global config.

    Returns:
        AblationReportDTO: Average accuracies per feature group.
    """
    configs: BaseConfig = config or BaseConfig.global_config()
    subsets = [(group.name, [group.name]) for group in FeatureGroupType]
    subsets.append((ALL_GROUPS, [group.name for group in FeatureGroupType]))
    rows = []
    for name, groups in subsets:
        fusion = configs.FUSION.model_copy(update={"FEATURE_GROUPS": groups})
        report = loso_cross_validation(observations, seed, configs.model_copy(update={"FUSION": fusion}))
        adaboost = report.adaboost_average
        hmm = report.hmm_average
        rows.append(
            AblationRowDTO(
                feature_group=name,
                adaboost_five_class=adaboost.five_class_accuracy if adaboost else None,
                adaboost_two_class=adaboost.two_class_accuracy if adaboost else None,
                hmm_five_class=hmm.five_class_accuracy if hmm else None,
                hmm_two_class=hmm.two_class_accuracy if hmm else None,
            ),
        )
    return AblationReportDTO(seed=seed, rows=tuple(rows))


def _write_table(table: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, lineterminator="\n", na_rep="", float_format="%.6f")


def _write_json(text: str, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")


def write_report(report: EvaluationReportDTO, directory: Path) -> None:
    """Write ``report.json``, ``overall.csv`` and ``per_class.csv``.

    ``overall.csv`` has one row per driver and an ``Average`` row. ``per_class.csv``
    has one row per path, driver (or ``Average``) and class.

    Args:
        report: The evaluation report.
        directory: Output directory.
    """
    _write_json(report.model_dump_json(indent=2), directory / "report.json")

    overall = []
    per_class = []
    entries: list[tuple[str, PathResultDTO | PathAverageDTO | None, PathResultDTO | PathAverageDTO | None]] = [
        (row.driver_id, row.adaboost, row.hmm) for row in report.drivers
    ]
    entries.append(("Average", report.adaboost_average, report.hmm_average))
    for driver, adaboost, hmm in entries:
        overall.append(
            {
                "driver": driver,
                "adaboost_five_class": adaboost.five_class_accuracy if adaboost else None,
                "adaboost_two_class": adaboost.two_class_accuracy if adaboost else None,
                "hmm_five_class": hmm.five_class_accuracy if hmm else None,
                "hmm_two_class": hmm.two_class_accuracy if hmm else None,
            },
        )
        for path, result in (("adaboost", adaboost), ("hmm", hmm)):
            if result is None:
                continue
            for metrics in result.per_class:
                per_class.append({"path": path, "driver": driver, **metrics.model_dump()})

    _write_table(pd.DataFrame(overall), directory / "overall.csv")
    columns = ["path", "driver", "class_name", *METRIC_NAMES]
    _write_table(pd.DataFrame(per_class, columns=columns), directory / "per_class.csv")
    logger.info("Wrote evaluation report to %s", directory)


def write_ablation(report: AblationReportDTO, directory: Path) -> None:
    """Write ``ablation.json`` and ``ablation.csv``.

    Args:
        report: The ablation report.
        directory: Output directory.
    """
    _write_json(report.model_dump_json(indent=2), directory / "ablation.json")
    _write_table(pd.DataFrame([row.model_dump() for row in report.rows]), directory / "ablation.csv")
    logger.info("Wrote ablation table to %s", directory)


def write_timeline(prediction: SessionPredictionDTO, path: Path) -> None:
    """Write truth and predictions of one session side by side.

    Args:
        prediction: Session predictions.
        path: Destination CSV (frame_id, truth, adaboost, hmm).
    """
    frames = np.arange(prediction.truth.size)
    table = pd.DataFrame(
        {
            "frame_id": frames,
            "truth": prediction.truth,
            "adaboost": pd.array(prediction.adaboost, dtype="Int64") if prediction.adaboost is not None else pd.NA,
            "hmm": pd.array(prediction.hmm, dtype="Int64") if prediction.hmm is not None else pd.NA,
        },
    )
    _write_table(table, path)


def write_labels(labels: np.ndarray, path: Path) -> None:
    """Write predicted labels in the labels.csv layout.

    Args:
        labels: (T,) class codes.
        path: Destination CSV (frame_id, label).
    """
    labels = np.asarray(labels, dtype=np.int64)
    _write_table(pd.DataFrame({"frame_id": np.arange(labels.size), "label": labels}), path)
