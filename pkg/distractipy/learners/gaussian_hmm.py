import logging
from collections.abc import Sequence

import numpy as np

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import HmmConfig
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO
from distractipy.models.errors import DimensionMismatchError, EmptyInputError, InsufficientDataError, TrainingError

logger = logging.getLogger(__name__)

MIN_FRAMES_PER_STATE = 10
INIT_JITTER = 1e-3
NEXT_STATE_WEIGHT = 3.0


def _log(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _scaled_emissions(log_emissions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    row_max = log_emissions.max(axis=1, keepdims=True)
    return np.exp(log_emissions - row_max), row_max[:, 0]


def _forward_backward(
    model: GaussianHmmDTO,
    observations: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Scaled forward-backward pass.

    Returns:
        Tuple of the log-likelihood, state posteriors (T, S) and summed pairwise
        transition posteriors (S, S).
    """
    emissions, shifts = _scaled_emissions(model.emission_log_prob(observations))
    frames, states = emissions.shape
    alpha = np.empty((frames, states))
    scale = np.empty(frames)
    alpha[0] = model.start_prob * emissions[0]
    for t in range(frames):
        if t > 0:
            alpha[t] = (alpha[t - 1] @ model.transitions) * emissions[t]
        scale[t] = alpha[t].sum()
        alpha[t] /= scale[t]

    beta = np.ones((frames, states))
    for t in range(frames - 2, -1, -1):
        beta[t] = model.transitions @ (emissions[t + 1] * beta[t + 1]) / scale[t + 1]

    posteriors = alpha * beta
    posteriors /= posteriors.sum(axis=1, keepdims=True)
    pair_sum = model.transitions * (alpha[:-1].T @ (emissions[1:] * beta[1:] / scale[1:, None]))
    log_likelihood = float(np.log(scale).sum() + shifts.sum())
    return log_likelihood, posteriors, pair_sum


def forward_log_likelihood(model: GaussianHmmDTO, sequence: np.ndarray) -> float:
    """Log-likelihood of a sequence from the scaled forward recursion.

    Args:
        model: The HMM.
        sequence: (T, D) observations.

    Returns:
        float: log P(sequence | model).

    Raises:
        EmptyInputError: If the sequence has no frames.
    """
    observations = _as_observations(sequence, model.n_features)
    emissions, shifts = _scaled_emissions(model.emission_log_prob(observations))
    alpha = model.start_prob * emissions[0]
    total = 0.0
    for t in range(observations.shape[0]):
        if t > 0:
            alpha = (alpha @ model.transitions) * emissions[t]
        scale = alpha.sum()
        alpha = alpha / scale
        total += np.log(scale)
    return float(total + shifts.sum())


def viterbi(model: GaussianHmmDTO, sequence: np.ndarray) -> tuple[np.ndarray, float]:
    """Most probable state path in log space.

    Args:
        model: The HMM.
        sequence: (T, D) observations.

    Returns:
        Tuple of the (T,) state path and its joint log-likelihood. Ties resolve to the
        lowest state index.

    Raises:
        EmptyInputError: If the sequence has no frames.
    """
    observations = _as_observations(sequence, model.n_features)
    log_emissions = model.emission_log_prob(observations)
    log_transitions = _log(model.transitions)
    frames = observations.shape[0]
    back = np.zeros((frames, model.n_states), dtype=np.int64)
    delta = _log(model.start_prob) + log_emissions[0]
    for t in range(1, frames):
        candidates = delta[:, None] + log_transitions
        back[t] = np.argmax(candidates, axis=0)
        delta = candidates.max(axis=0) + log_emissions[t]
    path = np.empty(frames, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for t in range(frames - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(delta.max())


def viterbi_log_likelihoods(
    model: GaussianHmmDTO,
    log_emissions: np.ndarray,
    starts: np.ndarray,
    length: int,
) -> np.ndarray:
    """Best-path log-likelihood of many equal-length windows at once.

    Runs the same max-product recursion as ``viterbi`` for every window
    ``[start, start + length)`` of a precomputed emission matrix.

    Args:
        model: The HMM.
        log_emissions: (T, S) emission log densities of the whole sequence.
        starts: (W,) window start frames.
        length: Window length, at least 1.

    Returns:
        np.ndarray: (W,) best-path log-likelihoods.
    """
    starts = np.asarray(starts, dtype=np.int64)
    log_transitions = _log(model.transitions)
    delta = _log(model.start_prob)[None, :] + log_emissions[starts]
    for offset in range(1, length):
        delta = (delta[:, :, None] + log_transitions[None, :, :]).max(axis=1) + log_emissions[starts + offset]
    return delta.max(axis=1)


def _as_observations(sequence: np.ndarray, features: int | None = None) -> np.ndarray:
    observations = np.asarray(sequence, dtype=np.float64)
    if observations.ndim == 1:
        observations = observations[:, None]
    if observations.ndim != 2 or observations.shape[0] == 0:
        raise EmptyInputError("sequence")
    if features is not None and observations.shape[1] != features:
        raise DimensionMismatchError(expected=(observations.shape[0], features), actual=observations.shape)
    return observations


class GaussianHmmTrainer:
    """Baum-Welch training of diagonal-Gaussian HMMs.

    Initialization cuts every sequence into ``n_states`` equal time bins and takes the
    pooled bin statistics as state means and variances, with a small seeded jitter on
    the means. Transitions start left-to-right biased: a self loop, most of the
    remaining mass on the next state and the rest spread evenly. The initial
    distribution starts uniform.
    """

    def __init__(self, hmm_config: HmmConfig | None = None) -> None:
        """Initialize the trainer.

        Args:
            hmm_config: Optional config section. If not provided, uses the global config.
        """
        self.configs: HmmConfig = hmm_config or BaseConfig.global_config().HMM

    def fit(
        self,
        sequences: Sequence[np.ndarray],
        seed: int,
        n_states: int | None = None,
    ) -> GaussianHmmDTO:
        """Train one HMM on a set of sequences.

        Args:
            sequences: Observation sequences of shape (T_i, D).
            seed: Seed of the initial mean jitter.
            n_states: Number of states; defaults to the configured value.

        Returns:
            GaussianHmmDTO: The trained model with its log-likelihood history.

        Raises:
            EmptyInputError: If no sequence is given.
            InsufficientDataError: If there are fewer than ten frames per state.
            TrainingError: If the log-likelihood stops being finite.
        """
        states = n_states if n_states is not None else self.configs.STATE_COUNT
        observations = [_as_observations(sequence) for sequence in sequences if len(sequence) > 0]
        if not observations:
            raise EmptyInputError("sequences")
        features = observations[0].shape[1]
        for sequence in observations:
            if sequence.shape[1] != features:
                raise DimensionMismatchError(expected=(sequence.shape[0], features), actual=sequence.shape)
        total_frames = sum(sequence.shape[0] for sequence in observations)
        if total_frames < MIN_FRAMES_PER_STATE * states:
            raise InsufficientDataError(
                subject="hmm_frames",
                required=MIN_FRAMES_PER_STATE * states,
                available=total_frames,
            )

        model = self._initial_model(observations, states, np.random.default_rng(seed))
        history: list[float] = []
        for iteration in range(self.configs.MAX_ITERATIONS):
            log_likelihood, statistics = self._expectation(model, observations)
            if not np.isfinite(log_likelihood):
                reason = f"non-finite log-likelihood at iteration {iteration + 1}"
                raise TrainingError(trainer="gaussian_hmm", reason=reason)
            history.append(log_likelihood)
            if len(history) > 1 and history[-1] - history[-2] < self.configs.TOLERANCE:
                logger.debug("Baum-Welch converged after %d iterations", iteration + 1)
                break
            if iteration == self.configs.MAX_ITERATIONS - 1:
                logger.warning("Baum-Welch reached the iteration cap of %d", self.configs.MAX_ITERATIONS)
                break
            model = self._maximization(model, statistics)

        return model.model_copy(update={"log_likelihood_history": np.asarray(history, dtype=np.float64)})

    def _initial_model(
        self,
        observations: list[np.ndarray],
        states: int,
        rng: np.random.Generator,
    ) -> GaussianHmmDTO:
        pooled = np.concatenate(observations)
        global_mean = pooled.mean(axis=0)
        global_variance = pooled.var(axis=0)
        means = np.empty((states, pooled.shape[1]))
        variances = np.empty_like(means)
        bins: list[list[np.ndarray]] = [[] for _ in range(states)]
        for sequence in observations:
            for index, chunk in enumerate(np.array_split(sequence, states)):
                if chunk.shape[0]:
                    bins[index].append(chunk)
        for index, chunks in enumerate(bins):
            if chunks:
                data = np.concatenate(chunks)
                means[index] = data.mean(axis=0)
                variances[index] = data.var(axis=0)
            else:
                means[index] = global_mean
                variances[index] = global_variance
        variances = np.maximum(variances, self.configs.VARIANCE_FLOOR)
        means = means + rng.normal(0.0, INIT_JITTER, size=means.shape) * np.sqrt(variances)

        transitions = np.zeros((states, states))
        off_mass = 1.0 - self.configs.SELF_LOOP
        for state in range(states):
            weights = np.ones(states)
            weights[state] = 0.0
            if state + 1 < states:
                weights[state + 1] = NEXT_STATE_WEIGHT
            transitions[state] = off_mass * weights / weights.sum()
            transitions[state, state] = self.configs.SELF_LOOP
        return GaussianHmmDTO(
            start_prob=np.full(states, 1.0 / states),
            transitions=transitions,
            means=means,
            variances=variances,
        )

    @staticmethod
    def _expectation(
        model: GaussianHmmDTO,
        observations: list[np.ndarray],
    ) -> tuple[float, dict[str, np.ndarray]]:
        states, features = model.means.shape
        statistics = {
            "start": np.zeros(states),
            "pairs": np.zeros((states, states)),
            "occupancy": np.zeros(states),
            "first": np.zeros((states, features)),
            "second": np.zeros((states, features)),
        }
        total = 0.0
        for sequence in observations:
            log_likelihood, posteriors, pair_sum = _forward_backward(model, sequence)
            total += log_likelihood
            statistics["start"] += posteriors[0]
            statistics["pairs"] += pair_sum
            statistics["occupancy"] += posteriors.sum(axis=0)
            statistics["first"] += posteriors.T @ sequence
            statistics["second"] += posteriors.T @ (sequence * sequence)
        return total, statistics

    def _maximization(self, model: GaussianHmmDTO, statistics: dict[str, np.ndarray]) -> GaussianHmmDTO:
        start = statistics["start"] / statistics["start"].sum()

        pairs = statistics["pairs"]
        row_totals = pairs.sum(axis=1, keepdims=True)
        transitions = np.where(row_totals > 0, pairs / np.where(row_totals > 0, row_totals, 1.0), model.transitions)

        occupancy = statistics["occupancy"][:, None]
        visited = occupancy > 0
        safe = np.where(visited, occupancy, 1.0)
        means = np.where(visited, statistics["first"] / safe, model.means)
        variances = np.where(visited, statistics["second"] / safe - means * means, model.variances)
        variances = np.maximum(variances, self.configs.VARIANCE_FLOOR)
        return GaussianHmmDTO(
            start_prob=start,
            transitions=transitions / transitions.sum(axis=1, keepdims=True),
            means=means,
            variances=variances,
        )


def hmm_baum_welch(
    sequences: Sequence[np.ndarray],
    n_states: int = 10,
    seed: int = 0,
) -> GaussianHmmDTO:
    """Train a diagonal-Gaussian HMM with Baum-Welch.

    Args:
        sequences: Observation sequences of shape (T_i, D).
        n_states: Number of hidden states.
        seed: Seed of the initial mean jitter.

    Returns:
        GaussianHmmDTO: The trained model.
    """
    return GaussianHmmTrainer(HmmConfig(STATE_COUNT=n_states)).fit(sequences, seed=seed)
