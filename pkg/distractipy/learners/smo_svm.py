import logging

import numpy as np

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import SvmConfig
from distractipy.models.dtos.learner_dtos import RbfSvmModelDTO, rbf_kernel
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, InvalidArgumentError, SingleClassError

logger = logging.getLogger(__name__)

TAU = 1e-12


class SmoSvmTrainer:
    """Soft-margin RBF SVM trained with sequential minimal optimization.

    Solves the dual ``min 0.5 a'Qa - e'a`` subject to ``0 <= a <= C`` and ``y'a = 0``
    with ``Q_ij = y_i y_j k(x_i, x_j)``. Each step picks the maximal violating pair
    (first-order working set selection), solves the two-variable subproblem in closed
    form and clips it to the box. Optimization stops once the KKT gap falls under the
    tolerance.
    """

    def __init__(self, svm_config: SvmConfig | None = None) -> None:
        """Initialize the trainer.

        Args:
            svm_config: Optional config section. If not provided, uses the global config.
        """
        self.configs: SvmConfig = svm_config or BaseConfig.global_config().SVM

    def fit(self, samples: np.ndarray, labels: np.ndarray) -> RbfSvmModelDTO:
        """Train the SVM.

        Args:
            samples: (N, D) training vectors.
            labels: (N,) labels in {+1, -1}.

        Returns:
            RbfSvmModelDTO: Support vectors, signed duals and bias.

        Raises:
            EmptyInputError: If there are no samples.
            SingleClassError: If only one class is present.
        """
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise EmptyInputError("samples")
        labels = np.asarray(labels, dtype=np.float64)
        if labels.shape != (samples.shape[0],):
            raise DimensionMismatchError(expected=(samples.shape[0],), actual=labels.shape)
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise InvalidArgumentError(argument_name="labels", additional_data={"allowed": "+1/-1"})
        if not (np.any(labels > 0) and np.any(labels < 0)):
            raise SingleClassError(trainer="smo_svm")

        c = self.configs.C
        kernel = rbf_kernel(samples, samples, self.configs.SIGMA)
        q = labels[:, None] * labels[None, :] * kernel
        alpha = np.zeros(samples.shape[0], dtype=np.float64)
        gradient = -np.ones(samples.shape[0], dtype=np.float64)

        for iteration in range(self.configs.MAX_ITERATIONS):
            i, j, gap = self._select_pair(alpha, gradient, labels, c)
            if gap < self.configs.TOLERANCE:
                logger.debug("SMO converged after %d iterations (gap %.2e)", iteration, gap)
                break
            old_i, old_j = alpha[i], alpha[j]
            self._update_pair(alpha, gradient, q, labels, i, j, c)
            gradient += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)
        else:
            logger.warning("SMO hit the iteration cap of %d before reaching the tolerance", self.configs.MAX_ITERATIONS)

        rho = self._rho(alpha, gradient, labels, c)
        support = alpha > 0.0
        return RbfSvmModelDTO(
            support_vectors=samples[support],
            dual_coefficients=alpha[support] * labels[support],
            bias=float(-rho),
            sigma=self.configs.SIGMA,
            C=c,
        )

    @staticmethod
    def _select_pair(
        alpha: np.ndarray,
        gradient: np.ndarray,
        labels: np.ndarray,
        c: float,
    ) -> tuple[int, int, float]:
        up = ((alpha < c) & (labels > 0)) | ((alpha > 0) & (labels < 0))
        low = ((alpha < c) & (labels < 0)) | ((alpha > 0) & (labels > 0))
        score = -labels * gradient
        if not up.any() or not low.any():
            return 0, 0, 0.0
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        return i, j, float(score[i] - score[j])

    @staticmethod
    def _update_pair(
        alpha: np.ndarray,
        gradient: np.ndarray,
        q: np.ndarray,
        labels: np.ndarray,
        i: int,
        j: int,
        c: float,
    ) -> None:
        if labels[i] != labels[j]:
            quad = q[i, i] + q[j, j] + 2.0 * q[i, j]
            delta = (-gradient[i] - gradient[j]) / (quad if quad > 0 else TAU)
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = c + diff
        else:
            quad = q[i, i] + q[j, j] - 2.0 * q[i, j]
            delta = (gradient[i] - gradient[j]) / (quad if quad > 0 else TAU)
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

    @staticmethod
    def _rho(alpha: np.ndarray, gradient: np.ndarray, labels: np.ndarray, c: float) -> float:
        signed = labels * gradient
        free = (alpha > 0) & (alpha < c)
        if free.any():
            return float(signed[free].mean())
        at_upper = alpha >= c
        upper_candidates = (at_upper & (labels < 0)) | (~at_upper & (labels > 0))
        lower_candidates = (at_upper & (labels > 0)) | (~at_upper & (labels < 0))
        upper = signed[upper_candidates].min() if upper_candidates.any() else 0.0
        lower = signed[lower_candidates].max() if lower_candidates.any() else 0.0
        return float((upper + lower) / 2.0)


def smo_train(samples: np.ndarray, labels: np.ndarray, c: float = 1.0, sigma: float = 13.0) -> RbfSvmModelDTO:
    """Train an RBF SVM with SMO.

    Args:
        samples: (N, D) training vectors.
        labels: (N,) labels in {+1, -1}.
        c: Box constraint.
        sigma: RBF kernel width.

    Returns:
        RbfSvmModelDTO: The trained model.
    """
    return SmoSvmTrainer(SvmConfig(C=c, SIGMA=sigma)).fit(samples, labels)
