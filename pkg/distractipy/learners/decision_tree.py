import logging
from collections import deque

import numpy as np

from distractipy.models.dtos.learner_dtos import LEAF, DecisionTreeDTO
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, InvalidArgumentError

logger = logging.getLogger(__name__)

MIN_GAIN = 1e-12


def weighted_entropy(positive: np.ndarray, negative: np.ndarray) -> np.ndarray:
    """Binary entropy (nats) of weighted class masses, 0 for empty or pure masses.

    Args:
        positive: Positive-class masses.
        negative: Negative-class masses, same shape.

    Returns:
        np.ndarray: Entropy per element.
    """
    positive = np.maximum(positive, 0.0)
    negative = np.maximum(negative, 0.0)
    total = positive + negative
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, positive / total, 0.0)
        q = np.where(total > 0, negative / total, 0.0)
        terms = np.where(p > 0, p * np.log(p), 0.0) + np.where(q > 0, q * np.log(q), 0.0)
    return -terms


class DecisionTreeTrainer:
    """Greedy decision tree grower maximizing weighted information gain.

    Split candidates are the midpoints between consecutive distinct values of each
    feature. Growth stops at ``max_depth``, on pure nodes, or when no split has a
    positive gain. Ties go to the lowest feature index, then the lowest threshold.

    A column-wise argsort of the samples can be passed in as ``presorted``; boosting
    reuses one across all rounds because only the weights change.
    """

    def __init__(self, max_depth: int = 4) -> None:
        """Initialize the trainer.

        Args:
            max_depth: Maximum number of edges from root to leaf.
        """
        if max_depth < 0:
            raise InvalidArgumentError(argument_name="max_depth")
        self.max_depth = max_depth

    @staticmethod
    def presort(samples: np.ndarray) -> np.ndarray:
        """Column-wise stable argsort of a sample matrix.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N, F) row indices sorting each column.
        """
        return np.argsort(np.asarray(samples, dtype=np.float64), axis=0, kind="stable")

    def fit(
        self,
        samples: np.ndarray,
        labels: np.ndarray,
        weights: np.ndarray,
        presorted: np.ndarray | None = None,
    ) -> DecisionTreeDTO:
        """Grow a tree on weighted +1/-1 labelled samples.

        Args:
            samples: (N, F) feature matrix.
            labels: (N,) labels in {+1, -1}.
            weights: (N,) nonnegative weights with a positive sum.
            presorted: Optional output of ``presort(samples)``.

        Returns:
            DecisionTreeDTO: The fitted tree.

        Raises:
            EmptyInputError: If there are no samples.
            DimensionMismatchError: If labels or weights do not match the samples.
            InvalidArgumentError: If labels or weights are invalid.
        """
        samples = np.asarray(samples, dtype=np.float64)
        labels = np.asarray(labels)
        weights = np.asarray(weights, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise EmptyInputError("samples")
        count, features = samples.shape
        for array in (labels, weights):
            if array.shape != (count,):
                raise DimensionMismatchError(expected=(count,), actual=array.shape)
        if not np.all(np.isin(labels, (-1, 1))):
            raise InvalidArgumentError(argument_name="labels", additional_data={"allowed": "+1/-1"})
        if np.any(weights < 0) or weights.sum() <= 0:
            raise InvalidArgumentError(argument_name="weights")
        order = presorted if presorted is not None else self.presort(samples)
        if order.shape != samples.shape:
            raise DimensionMismatchError(expected=samples.shape, actual=order.shape)

        positive_weights = np.where(labels > 0, weights, 0.0)
        negative_weights = np.where(labels < 0, weights, 0.0)

        feature: list[int] = [LEAF]
        threshold: list[float] = [0.0]
        left: list[int] = [LEAF]
        right: list[int] = [LEAF]
        positive_mass: list[float] = [0.0]
        negative_mass: list[float] = [0.0]

        queue: deque[tuple[int, np.ndarray, int]] = deque([(0, np.ones(count, dtype=bool), 0)])
        while queue:
            node, member, depth = queue.popleft()
            node_positive = float(positive_weights[member].sum())
            node_negative = float(negative_weights[member].sum())
            positive_mass[node] = node_positive
            negative_mass[node] = node_negative
            if depth >= self.max_depth or node_positive <= 0.0 or node_negative <= 0.0:
                continue
            split = self._best_split(samples, order, member, positive_weights, negative_weights)
            if split is None:
                continue
            split_feature, split_threshold = split
            goes_left = samples[:, split_feature] < split_threshold
            feature[node] = split_feature
            threshold[node] = split_threshold
            for child_member, links in ((member & goes_left, left), (member & ~goes_left, right)):
                child = len(feature)
                links[node] = child
                feature.append(LEAF)
                threshold.append(0.0)
                left.append(LEAF)
                right.append(LEAF)
                positive_mass.append(0.0)
                negative_mass.append(0.0)
                queue.append((child, child_member, depth + 1))

        return DecisionTreeDTO(
            feature=np.asarray(feature, dtype=np.int64),
            threshold=np.asarray(threshold, dtype=np.float64),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            positive_mass=np.asarray(positive_mass, dtype=np.float64),
            negative_mass=np.asarray(negative_mass, dtype=np.float64),
        )

    @staticmethod
    def _best_split(
        samples: np.ndarray,
        order: np.ndarray,
        member: np.ndarray,
        positive_weights: np.ndarray,
        negative_weights: np.ndarray,
    ) -> tuple[int, float] | None:
        node_count = int(member.sum())
        if node_count < 2:
            return None
        features = samples.shape[1]
        # every column of order holds exactly node_count members, so the mask compresses to a rectangle
        node_order = order.T[member[order].T].reshape(features, node_count)
        values = samples[node_order, np.arange(features)[:, None]]
        positive = positive_weights[node_order]
        negative = negative_weights[node_order]

        left_positive = np.cumsum(positive, axis=1)[:, :-1]
        left_negative = np.cumsum(negative, axis=1)[:, :-1]
        total_positive = positive.sum(axis=1, keepdims=True)
        total_negative = negative.sum(axis=1, keepdims=True)
        right_positive = np.maximum(total_positive - left_positive, 0.0)
        right_negative = np.maximum(total_negative - left_negative, 0.0)

        total = total_positive + total_negative
        left_share = (left_positive + left_negative) / total
        right_share = (right_positive + right_negative) / total
        gain = (
            weighted_entropy(total_positive, total_negative)
            - left_share * weighted_entropy(left_positive, left_negative)
            - right_share * weighted_entropy(right_positive, right_negative)
        )
        gain = np.where(values[:, 1:] > values[:, :-1], gain, -np.inf)

        best = int(np.argmax(gain))
        split_feature, position = divmod(best, node_count - 1)
        if not gain[split_feature, position] > MIN_GAIN:
            return None
        low = values[split_feature, position]
        high = values[split_feature, position + 1]
        split_threshold = (low + high) / 2.0
        if not low < split_threshold:
            split_threshold = high
        return int(split_feature), float(split_threshold)


def train_tree(
    samples: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray | None = None,
    max_depth: int = 4,
) -> DecisionTreeDTO:
    """Grow a weighted decision tree.

    Args:
        samples: (N, F) feature matrix.
        labels: (N,) labels in {+1, -1}.
        weights: (N,) nonnegative weights; uniform when omitted.
        max_depth: Maximum depth.

    Returns:
        DecisionTreeDTO: The fitted tree.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if weights is None:
        weights = np.full(samples.shape[0], 1.0 / max(samples.shape[0], 1))
    return DecisionTreeTrainer(max_depth=max_depth).fit(samples, labels, weights)
