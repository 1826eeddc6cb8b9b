import numpy as np
from pydantic import model_validator

from distractipy.models.dtos.base_dtos import BaseDTO

LEAF = -1


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between the rows of ``a`` and ``b``.

    Args:
        a: (N, D) array.
        b: (M, D) array.

    Returns:
        np.ndarray: (N, M) array, clipped at 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    distances = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(distances, 0.0)


def rbf_kernel(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    """RBF kernel matrix exp(-||a - b||^2 / (2 sigma^2)).

    Args:
        a: (N, D) array.
        b: (M, D) array.
        sigma: Kernel width.

    Returns:
        np.ndarray: (N, M) kernel matrix.
    """
    return np.exp(-squared_distances(a, b) / (2.0 * sigma * sigma))


class DecisionTreeDTO(BaseDTO):
    """A binary decision tree stored as parallel node arrays.

    Node 0 is the root. Internal nodes send a sample left when
    ``x[feature] < threshold``. Leaves have ``feature == -1`` and carry the weighted
    positive and negative training masses that reached them.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    positive_mass: np.ndarray
    negative_mass: np.ndarray

    @model_validator(mode="after")
    def _check_nodes(self) -> "DecisionTreeDTO":
        count = self.feature.shape[0]
        arrays = (self.threshold, self.left, self.right, self.positive_mass, self.negative_mass)
        if count == 0 or any(array.shape != (count,) for array in arrays):
            raise ValueError("tree node arrays must be nonempty and of equal length")
        if not np.all(np.isfinite(self.threshold)):
            raise ValueError("tree thresholds must be finite")
        return self

    @property
    def node_count(self) -> int:
        """Number of nodes."""
        return int(self.feature.shape[0])

    @property
    def depth(self) -> int:
        """Length of the longest root-to-leaf path in edges."""
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, samples: np.ndarray) -> np.ndarray:
        """Leaf index reached by every sample.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N,) leaf node indices.
        """
        samples = np.asarray(samples, dtype=np.float64)
        rows = np.arange(samples.shape[0])
        nodes = np.zeros(samples.shape[0], dtype=np.int64)
        while True:
            internal = self.feature[nodes] != LEAF
            if not internal.any():
                return nodes
            active = nodes[internal]
            go_left = samples[rows[internal], self.feature[active]] < self.threshold[active]
            nodes[internal] = np.where(go_left, self.left[active], self.right[active])

    def predict(self, samples: np.ndarray) -> np.ndarray:
        """Majority label (+1 / -1) of the reached leaf, +1 on equal masses.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N,) labels.
        """
        leaves = self.apply(samples)
        return np.where(self.positive_mass[leaves] >= self.negative_mass[leaves], 1, -1)


class RealAdaBoostModelDTO(BaseDTO):
    """Boosted trees; each round's leaf confidence is half the smoothed log-odds of its masses.

    Attributes:
        trees: One tree per round.
        smoothing: Smoothing constant per round.
        loss_history: Training exponential loss after each round.
    """

    trees: tuple[DecisionTreeDTO, ...]
    smoothing: np.ndarray
    loss_history: np.ndarray

    @model_validator(mode="after")
    def _check_rounds(self) -> "RealAdaBoostModelDTO":
        if not self.trees or self.smoothing.shape != (len(self.trees),):
            raise ValueError("one smoothing constant per tree is required")
        return self

    @property
    def rounds(self) -> int:
        """Number of boosting rounds."""
        return len(self.trees)

    def decision_function(self, samples: np.ndarray) -> np.ndarray:
        """Raw ensemble score, the sum of per-round leaf confidences.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N,) scores.
        """
        samples = np.asarray(samples, dtype=np.float64)
        scores = np.zeros(samples.shape[0], dtype=np.float64)
        for tree, epsilon in zip(self.trees, self.smoothing, strict=True):
            confidence = 0.5 * np.log((tree.positive_mass + epsilon) / (tree.negative_mass + epsilon))
            scores += confidence[tree.apply(samples)]
        return scores

    def predict(self, samples: np.ndarray) -> np.ndarray:
        """Sign of the score, +1 at zero.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N,) labels.
        """
        return np.where(self.decision_function(samples) >= 0.0, 1, -1)


class OneVsAllModelDTO(BaseDTO):
    """One boosted scorer per class; class codes are kept sorted ascending."""

    class_codes: tuple[int, ...]
    models: tuple[RealAdaBoostModelDTO, ...]

    @model_validator(mode="after")
    def _check_classes(self) -> "OneVsAllModelDTO":
        if len(self.class_codes) < 2 or len(self.class_codes) != len(self.models):
            raise ValueError("one model per class and at least two classes are required")
        if list(self.class_codes) != sorted(set(self.class_codes)):
            raise ValueError("class codes must be unique and sorted")
        return self

    def scores(self, samples: np.ndarray) -> np.ndarray:
        """Raw scores of every class model.

        Args:
            samples: (N, F) array.

        Returns:
            np.ndarray: (N, K) scores in class-code order.
        """
        return np.column_stack([model.decision_function(samples) for model in self.models])

    def classify(self, samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Argmax class per sample, smallest code on ties.

        Args:
            samples: (N, F) array.

        Returns:
            Tuple of (N,) class codes and (N, K) scores.
        """
        scores = self.scores(samples)
        codes = np.asarray(self.class_codes, dtype=np.int64)[np.argmax(scores, axis=1)]
        return codes, scores


class RbfSvmModelDTO(BaseDTO):
    """Support vectors with signed dual coefficients (alpha_i * y_i) and bias."""

    support_vectors: np.ndarray
    dual_coefficients: np.ndarray
    bias: float
    sigma: float
    C: float

    @model_validator(mode="after")
    def _check_support(self) -> "RbfSvmModelDTO":
        if self.support_vectors.ndim != 2 or self.dual_coefficients.shape != (self.support_vectors.shape[0],):
            raise ValueError("one dual coefficient per support vector is required")
        return self

    def decision_function(self, samples: np.ndarray) -> np.ndarray:
        """Raw SVM score; positive means the positive class.

        Args:
            samples: (N, D) array.

        Returns:
            np.ndarray: (N,) scores.
        """
        samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if self.support_vectors.shape[0] == 0:
            return np.full(samples.shape[0], self.bias)
        return rbf_kernel(samples, self.support_vectors, self.sigma) @ self.dual_coefficients + self.bias


class GaussianHmmDTO(BaseDTO):
    """HMM with one diagonal Gaussian per state.

    Attributes:
        start_prob: (S,) initial distribution.
        transitions: (S, S) row-stochastic transition matrix.
        means: (S, D) state means.
        variances: (S, D) state variances.
        log_likelihood_history: Total training log-likelihood per EM iteration.
    """

    start_prob: np.ndarray
    transitions: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihood_history: np.ndarray = np.zeros(0)

    @model_validator(mode="after")
    def _check_parameters(self) -> "GaussianHmmDTO":
        states = self.start_prob.shape[0]
        if self.transitions.shape != (states, states) or self.means.shape[0] != states:
            raise ValueError("HMM parameter shapes disagree")
        if self.variances.shape != self.means.shape:
            raise ValueError("variances must match means")
        if abs(self.start_prob.sum() - 1.0) > 1e-9 or np.any(np.abs(self.transitions.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("HMM distributions must sum to one")
        return self

    @property
    def n_states(self) -> int:
        """Number of hidden states."""
        return int(self.start_prob.shape[0])

    @property
    def n_features(self) -> int:
        """Observation dimensionality."""
        return int(self.means.shape[1])

    def emission_log_prob(self, observations: np.ndarray) -> np.ndarray:
        """Log density of every observation under every state.

        Args:
            observations: (T, D) array.

        Returns:
            np.ndarray: (T, S) log densities.
        """
        observations = np.asarray(observations, dtype=np.float64)
        log_norm = -0.5 * np.log(2.0 * np.pi * self.variances).sum(axis=1)
        diff = observations[:, None, :] - self.means[None, :, :]
        return log_norm[None, :] - 0.5 * (diff * diff / self.variances[None, :, :]).sum(axis=2)
