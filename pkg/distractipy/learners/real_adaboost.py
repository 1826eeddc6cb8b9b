import logging

import numpy as np

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import AdaBoostConfig
from distractipy.learners.decision_tree import DecisionTreeTrainer
from distractipy.models.dtos.learner_dtos import OneVsAllModelDTO, RealAdaBoostModelDTO
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, SingleClassError

logger = logging.getLogger(__name__)


class RealAdaBoostTrainer:
    """Real AdaBoost with depth-limited decision trees as weak learners.

    Each round grows a tree on the current normalized weights; a leaf's confidence is
    ``0.5 * ln((w+ + eps) / (w- + eps))`` with ``eps = 1 / (2N)`` unless given, N being the
    number of distinct labelled samples. Weights are recomputed from the running margins as
    ``exp(-y F(x))`` and renormalized, so the training exponential loss never increases.
    Training ends early when a round cannot split the root, since every later round would
    add the same zero-confidence tree.
    """

    def __init__(
        self,
        rounds: int | None = None,
        max_depth: int | None = None,
        adaboost_config: AdaBoostConfig | None = None,
    ) -> None:
        """Initialize the trainer.

        Args:
            rounds: Boosting rounds; defaults to the configured value.
            max_depth: Tree depth; defaults to the configured value.
            adaboost_config: Optional config section. If not provided, uses the global config.
        """
        configs: AdaBoostConfig = adaboost_config or BaseConfig.global_config().ADABOOST
        self.rounds = rounds if rounds is not None else configs.ROUNDS
        self.tree_trainer = DecisionTreeTrainer(max_depth if max_depth is not None else configs.MAX_DEPTH)

    def fit(
        self,
        samples: np.ndarray,
        labels: np.ndarray,
        presorted: np.ndarray | None = None,
        smoothing: float | None = None,
    ) -> RealAdaBoostModelDTO:
        """Train a boosted ensemble.

        Args:
            samples: (N, F) feature matrix.
            labels: (N,) labels in {+1, -1}.
            presorted: Optional column argsort of ``samples``.
            smoothing: Leaf smoothing constant; ``1 / (2N)`` over distinct labelled samples when omitted.

        Returns:
            RealAdaBoostModelDTO: The trained model.

        Raises:
            EmptyInputError: If there are no samples.
            SingleClassError: If only one label is present.
        """
        samples = np.asarray(samples, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise EmptyInputError("samples")
        count = samples.shape[0]
        if labels.shape != (count,):
            raise DimensionMismatchError(expected=(count,), actual=labels.shape)
        if not (np.any(labels == 1) and np.any(labels == -1)):
            raise SingleClassError(trainer="real_adaboost")

        if smoothing is None:
            distinct = np.unique(np.column_stack([samples, labels]), axis=0).shape[0]
            smoothing = 1.0 / (2.0 * distinct)
        epsilon = smoothing
        order = presorted if presorted is not None else DecisionTreeTrainer.presort(samples)
        signs = labels.astype(np.float64)
        margins = np.zeros(count, dtype=np.float64)
        weights = np.full(count, 1.0 / count)

        trees = []
        losses = []
        for _ in range(self.rounds):
            tree = self.tree_trainer.fit(samples, labels, weights, presorted=order)
            confidence = 0.5 * np.log((tree.positive_mass + epsilon) / (tree.negative_mass + epsilon))
            margins += signs * confidence[tree.apply(samples)]
            exponent = -margins
            shift = exponent.max()
            unnormalized = np.exp(exponent - shift)
            total = unnormalized.sum()
            weights = unnormalized / total
            trees.append(tree)
            losses.append(float(np.exp(shift) * total / count))
            if tree.node_count == 1:
                logger.debug("Root could not be split after %d rounds, stopping", len(trees))
                break

        return RealAdaBoostModelDTO(
            trees=tuple(trees),
            smoothing=np.full(len(trees), epsilon),
            loss_history=np.asarray(losses, dtype=np.float64),
        )


class OneVsAllTrainer:
    """Trains one Real AdaBoost scorer per class against all other classes."""

    def __init__(self, boosting_trainer: RealAdaBoostTrainer | None = None) -> None:
        """Initialize the trainer.

        Args:
            boosting_trainer: Binary trainer; a configured default when omitted.
        """
        self.boosting_trainer = boosting_trainer or RealAdaBoostTrainer()

    def fit(self, samples: np.ndarray, labels: np.ndarray) -> OneVsAllModelDTO:
        """Train the per-class models.

        Args:
            samples: (N, F) feature matrix.
            labels: (N,) integer class codes.

        Returns:
            OneVsAllModelDTO: Models in ascending class-code order.

        Raises:
            SingleClassError: If fewer than two classes are present.
        """
        samples = np.asarray(samples, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise EmptyInputError("samples")
        if labels.shape != (samples.shape[0],):
            raise DimensionMismatchError(expected=(samples.shape[0],), actual=labels.shape)
        codes = sorted(int(code) for code in np.unique(labels))
        if len(codes) < 2:
            raise SingleClassError(trainer="one_vs_all")

        order = DecisionTreeTrainer.presort(samples)
        models = []
        for code in codes:
            binary = np.where(labels == code, 1, -1)
            model = self.boosting_trainer.fit(samples, binary, presorted=order)
            logger.debug("Class %d model: %d rounds, final loss %.6f", code, model.rounds, model.loss_history[-1])
            models.append(model)
        return OneVsAllModelDTO(class_codes=tuple(codes), models=tuple(models))


def train_real_adaboost(samples: np.ndarray, labels: np.ndarray, rounds: int = 300) -> RealAdaBoostModelDTO:
    """Train Real AdaBoost with depth-4 trees.

    Args:
        samples: (N, F) feature matrix.
        labels: (N,) labels in {+1, -1}.
        rounds: Number of boosting rounds.

    Returns:
        RealAdaBoostModelDTO: The trained model.
    """
    return RealAdaBoostTrainer(rounds=rounds, max_depth=4, adaboost_config=AdaBoostConfig()).fit(samples, labels)
