import numpy as np
from pydantic import Field, field_serializer, field_validator

from distractipy.models.dtos.base_dtos import BaseDTO


class ConfusionMatrixDTO(BaseDTO):
    """Counts with rows for ground truth and columns for predictions.

    Attributes:
        class_codes: Code of every row and column, ascending.
        counts: (K, K) nonnegative integer counts.
    """

    class_codes: tuple[int, ...]
    counts: np.ndarray

    @field_validator("counts", mode="before")
    @classmethod
    def _check_counts(cls, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.int64)
        if value.ndim != 2 or value.shape[0] != value.shape[1] or np.any(value < 0):
            raise ValueError("confusion matrix must be a square array of nonnegative counts")
        return value

    @field_serializer("counts")
    def _serialize_counts(self, value: np.ndarray) -> list[list[int]]:
        return value.tolist()

    @property
    def total(self) -> int:
        """Number of evaluated frames."""
        return int(self.counts.sum())


class ClassMetricsDTO(BaseDTO):
    """One-vs-rest metrics of one class; a metric with a zero denominator is None."""

    class_name: str
    accuracy: float | None = None
    recall: float | None = None
    specificity: float | None = None
    precision: float | None = None
    f_measure: float | None = None
    g_mean: float | None = None


class PathResultDTO(BaseDTO):
    """Scores of one classifier path on one driver's frames."""

    five_class_accuracy: float = Field(ge=0.0, le=1.0)
    two_class_accuracy: float = Field(ge=0.0, le=1.0)
    confusion: ConfusionMatrixDTO
    per_class: tuple[ClassMetricsDTO, ...]


class DriverResultDTO(BaseDTO):
    """Held-out results of one cross-validation fold."""

    driver_id: str
    frame_count: int
    adaboost: PathResultDTO | None = None
    hmm: PathResultDTO | None = None


class PathAverageDTO(BaseDTO):
    """Unweighted means across drivers of one path's results."""

    five_class_accuracy: float
    two_class_accuracy: float
    per_class: tuple[ClassMetricsDTO, ...]


class EvaluationReportDTO(BaseDTO):
    """Leave-one-driver-out report: one row per held-out driver plus the averages."""

    seed: int
    feature_groups: tuple[str, ...]
    drivers: tuple[DriverResultDTO, ...]
    adaboost_average: PathAverageDTO | None = None
    hmm_average: PathAverageDTO | None = None


class AblationRowDTO(BaseDTO):
    """Average accuracies when only one feature group (or all groups) feeds the fusion."""

    feature_group: str
    adaboost_five_class: float | None = None
    adaboost_two_class: float | None = None
    hmm_five_class: float | None = None
    hmm_two_class: float | None = None


class AblationReportDTO(BaseDTO):
    """Accuracy per feature group table."""

    seed: int
    rows: tuple[AblationRowDTO, ...]
