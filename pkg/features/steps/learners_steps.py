import itertools

import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context, render_closed_patch, render_disk_patch

from distractipy.configs.config_template import AdaBoostConfig, HmmConfig, SvmConfig
from distractipy.learners.decision_tree import train_tree
from distractipy.learners.gaussian_hmm import GaussianHmmTrainer, forward_log_likelihood, hmm_baum_welch, viterbi
from distractipy.learners.real_adaboost import OneVsAllTrainer, RealAdaBoostTrainer, train_real_adaboost
from distractipy.learners.smo_svm import smo_train
from distractipy.logics.eye_behavior import eye_closure_score, iris_template, train_closure_svm
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO
from distractipy.models.errors import BaseError


def _sample_hmm(rng, start, transitions, means, deviations, length):
    states = np.empty(length, dtype=np.int64)
    states[0] = rng.choice(len(start), p=start)
    for t in range(1, length):
        states[t] = rng.choice(len(start), p=transitions[states[t - 1]])
    return rng.normal(means[states], deviations[states])[:, None]


def _random_stochastic(rng, rows, columns):
    values = rng.uniform(0.1, 1.0, size=(rows, columns))
    return values / values.sum(axis=1, keepdims=True)


def _random_small_hmms(seed, count, max_length):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        states = int(rng.integers(1, 4))
        length = int(rng.integers(1, max_length + 1))
        model = GaussianHmmDTO(
            start_prob=_random_stochastic(rng, 1, states)[0],
            transitions=_random_stochastic(rng, states, states),
            means=rng.normal(0.0, 2.0, size=(states, 1)),
            variances=rng.uniform(0.5, 2.0, size=(states, 1)),
        )
        cases.append((model, rng.normal(0.0, 2.0, size=(length, 1))))
    return cases


def _brute_force_best(model, sequence):
    log_emissions = model.emission_log_prob(sequence)
    log_start = np.log(model.start_prob)
    log_transitions = np.log(model.transitions)
    best = -np.inf
    best_path = None
    for path in itertools.product(range(model.n_states), repeat=sequence.shape[0]):
        score = log_start[path[0]] + log_emissions[0, path[0]]
        for t in range(1, len(path)):
            score += log_transitions[path[t - 1], path[t]] + log_emissions[t, path[t]]
        if score > best:
            best = score
            best_path = path
    return np.asarray(best_path), best


@given("a random binary dataset of {count:d} samples and {features:d} features with seed {seed:d}")
def step_given_random_dataset(context, count, features, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    samples = rng.normal(size=(count, features))
    score = np.sin(2.0 * samples[:, 0]) + samples[:, 1] * samples[:, 2 % features] + 0.3 * rng.normal(size=count)
    scenario_context.store("samples", samples)
    scenario_context.store("labels", np.where(score > 0, 1, -1))


@given("a linearly separable 2D dataset of {count:d} samples")
def step_given_separable_dataset(context, count):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(3)
    rows = []
    while len(rows) < count:
        point = rng.uniform(-1.0, 1.0, size=2)
        if abs(point.sum()) > 0.2:
            rows.append(point)
    samples = np.asarray(rows)
    scenario_context.store("samples", samples)
    scenario_context.store("labels", np.where(samples.sum(axis=1) > 0, 1, -1))


@given("a three-class dataset of {count:d} samples")
def step_given_three_class_dataset(context, count):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(9)
    labels = np.arange(count) % 3 + 1
    centers = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]])
    scenario_context.store("samples", centers[labels - 1] + rng.normal(0.0, 0.7, size=(count, 2)))
    scenario_context.store("labels", labels)


@when("Real AdaBoost is trained for {rounds:d} rounds")
def step_when_adaboost_trained(context, rounds):
    scenario_context = get_current_scenario_context(context)
    trainer = RealAdaBoostTrainer(rounds=rounds, max_depth=4, adaboost_config=AdaBoostConfig())
    model = trainer.fit(scenario_context.get("samples"), scenario_context.get("labels"))
    scenario_context.store("model", model)


@when("Real AdaBoost is trained twice for {rounds:d} rounds")
def step_when_adaboost_trained_twice(context, rounds):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    labels = scenario_context.get("labels")
    models = [
        RealAdaBoostTrainer(rounds=rounds, adaboost_config=AdaBoostConfig()).fit(samples, labels) for _ in range(2)
    ]
    scenario_context.store("models", models)


@when("Real AdaBoost is trained on positive labels only")
def step_when_adaboost_single_class(context):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    try:
        RealAdaBoostTrainer(rounds=5, adaboost_config=AdaBoostConfig()).fit(samples, np.ones(samples.shape[0]))
    except BaseError as e:
        scenario_context.store("error", e)


@when("a one-vs-all ensemble is trained for {rounds:d} rounds")
def step_when_one_vs_all_trained(context, rounds):
    scenario_context = get_current_scenario_context(context)
    trainer = OneVsAllTrainer(RealAdaBoostTrainer(rounds=rounds, adaboost_config=AdaBoostConfig()))
    scenario_context.store("model", trainer.fit(scenario_context.get("samples"), scenario_context.get("labels")))


@then("the training loss should never increase between rounds")
def step_then_loss_non_increasing(context):
    scenario_context = get_current_scenario_context(context)
    losses = scenario_context.get("model").loss_history
    steps = np.diff(losses)
    assert np.all(steps <= 1e-12 * losses[:-1]), f"Loss increased by up to {steps.max():.3e}"


@then("the training error should be 0")
def step_then_zero_training_error(context):
    scenario_context = get_current_scenario_context(context)
    predicted = scenario_context.get("model").predict(scenario_context.get("samples"))
    errors = int(np.sum(predicted != scenario_context.get("labels")))
    assert errors == 0, f"Expected no training errors, but got {errors}"


@then("both ensembles should give identical scores")
def step_then_identical_ensembles(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    samples = scenario_context.get("samples")
    assert np.array_equal(first.decision_function(samples), second.decision_function(samples)), "Scores differ"


@then("the class codes should be {codes}")
def step_then_class_codes(context, codes):
    scenario_context = get_current_scenario_context(context)
    expected = tuple(int(code) for code in codes.split(","))
    actual = scenario_context.get("model").class_codes
    assert actual == expected, f"Expected {expected}, but got {actual}"


@then("the classification should agree with the score argmax")
def step_then_classification_matches_argmax(context):
    scenario_context = get_current_scenario_context(context)
    model = scenario_context.get("model")
    codes, scores = model.classify(scenario_context.get("samples"))
    expected = np.asarray(model.class_codes)[np.argmax(scores, axis=1)]
    assert np.array_equal(codes, expected), "Classification disagrees with the score argmax"


@given("{open_count:d} open and {closed_count:d} closed eye templates")
def step_given_eye_templates(context, open_count, closed_count):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(21)
    templates = []
    for _ in range(open_count):
        center = 30.0 + rng.uniform(-4.0, 4.0, size=2)
        patch = render_disk_patch(center, rng.uniform(6.0, 8.0), noise=0.04, rng=rng)
        templates.append(iris_template(patch, (round(center[0]), round(center[1]))))
    for _ in range(closed_count):
        patch = render_closed_patch(noise=0.04, rng=rng)
        jitter = rng.integers(-3, 4, size=2)
        templates.append(iris_template(patch, (30 + int(jitter[0]), 30 + int(jitter[1]))))
    scenario_context.store("templates", np.asarray(templates))
    scenario_context.store("labels", np.concatenate([np.ones(open_count), -np.ones(closed_count)]))


@when("the closure SVM is trained")
def step_when_closure_svm_trained(context):
    scenario_context = get_current_scenario_context(context)
    svm_config = SvmConfig()
    model = train_closure_svm(scenario_context.get("templates"), scenario_context.get("labels"), svm_config)
    scenario_context.store("model", model)
    scenario_context.store("svm_config", svm_config)


@then("the training accuracy should be 100 percent")
def step_then_full_training_accuracy(context):
    scenario_context = get_current_scenario_context(context)
    templates = scenario_context.get("templates")
    scores = scenario_context.get("model").decision_function(templates.reshape(templates.shape[0], -1))
    predicted = np.where(scores >= 0, 1.0, -1.0)
    errors = int(np.sum(predicted != scenario_context.get("labels")))
    assert errors == 0, f"Expected no training errors, but got {errors}"


@then("every dual coefficient should lie within the box")
def step_then_duals_in_box(context):
    scenario_context = get_current_scenario_context(context)
    model = scenario_context.get("model")
    magnitudes = np.abs(model.dual_coefficients)
    assert np.all(magnitudes > 0), "A support vector has a zero dual"
    assert np.all(magnitudes <= model.C + 1e-12), f"Dual above C: {magnitudes.max()}"


@then("every free support vector should sit on the margin")
def step_then_free_vectors_on_margin(context):
    scenario_context = get_current_scenario_context(context)
    model = scenario_context.get("model")
    free = np.abs(model.dual_coefficients) < model.C - 1e-9
    margins = np.sign(model.dual_coefficients[free]) * model.decision_function(model.support_vectors[free])
    if margins.size:
        residual = np.abs(margins - 1.0).max()
        assert residual <= 1e-2, f"KKT residual {residual:.3e} exceeds 1e-2"


@given("{count:d} sequences drawn from a 3-state model with seed {seed:d}")
def step_given_three_state_sequences(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(seed)
    transitions = np.array([[0.9, 0.05, 0.05], [0.1, 0.8, 0.1], [0.05, 0.15, 0.8]])
    sequences = [
        _sample_hmm(rng, np.full(3, 1.0 / 3.0), transitions, np.array([-3.0, 0.0, 4.0]), np.ones(3), 300)
        for _ in range(count)
    ]
    scenario_context.store("sequences", sequences)


@given("{frames:d} frames drawn from a two-state model with means -2 and 2")
def step_given_two_state_frames(context, frames):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(17)
    transitions = np.array([[0.95, 0.05], [0.05, 0.95]])
    sequence = _sample_hmm(rng, np.array([0.5, 0.5]), transitions, np.array([-2.0, 2.0]), np.ones(2), frames)
    scenario_context.store("sequences", [sequence])


@when("a {states:d}-state HMM is trained on them")
def step_when_hmm_trained(context, states):
    scenario_context = get_current_scenario_context(context)
    trainer = GaussianHmmTrainer(HmmConfig(STATE_COUNT=states, MAX_ITERATIONS=30))
    scenario_context.store("model", trainer.fit(scenario_context.get("sequences"), seed=0))


@when("a {states:d}-state HMM is trained on them with a tight tolerance")
def step_when_hmm_trained_tight(context, states):
    scenario_context = get_current_scenario_context(context)
    trainer = GaussianHmmTrainer(HmmConfig(STATE_COUNT=states, MAX_ITERATIONS=200, TOLERANCE=1e-9))
    scenario_context.store("model", trainer.fit(scenario_context.get("sequences"), seed=0))


@when("a {states:d}-state HMM is trained on {frames:d} frames")
def step_when_hmm_trained_short(context, states, frames):
    scenario_context = get_current_scenario_context(context)
    sequence = np.random.default_rng(0).normal(size=(frames, 2))
    try:
        GaussianHmmTrainer(HmmConfig(STATE_COUNT=states)).fit([sequence], seed=0)
    except BaseError as e:
        scenario_context.store("error", e)


@then("the log-likelihood should never decrease between iterations")
def step_then_log_likelihood_non_decreasing(context):
    scenario_context = get_current_scenario_context(context)
    history = scenario_context.get("model").log_likelihood_history
    assert history.size > 1, "Training stopped after a single iteration"
    steps = np.diff(history)
    assert np.all(steps >= -1e-8 * np.abs(history[:-1])), f"Log-likelihood dropped by {-steps.min():.3e}"


@then("the recovered means should be -2 and 2 within {tolerance:f}")
def step_then_recovered_means(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    means = np.sort(scenario_context.get("model").means[:, 0])
    error = np.abs(means - np.array([-2.0, 2.0])).max()
    assert error <= tolerance, f"Recovered means {means} are off by {error:.3f}"


@given("{count:d} random small HMMs with seed {seed:d}")
def step_given_random_hmms(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("cases", _random_small_hmms(seed, count, 8))


@then("Viterbi should match exhaustive path search for each of them")
def step_then_viterbi_matches_brute_force(context):
    scenario_context = get_current_scenario_context(context)
    for index, (model, sequence) in enumerate(scenario_context.get("cases")):
        path, score = viterbi(model, sequence)
        expected_path, expected_score = _brute_force_best(model, sequence)
        assert abs(score - expected_score) <= 1e-9 * max(1.0, abs(expected_score)), (
            f"Case {index}: score {score} differs from {expected_score}"
        )
        assert np.array_equal(path, expected_path), f"Case {index}: path {path} differs from {expected_path}"


@given('the one-dimensional samples "{values}" labelled "{labels}"')
def step_given_one_dimensional_samples(context, values, labels):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("samples", np.asarray([[float(value)] for value in values.split()]))
    scenario_context.store("labels", np.asarray([int(label) for label in labels.split()]))


@given("an XOR layout on a {columns:d} by {rows:d} grid")
def step_given_xor_layout(context, columns, rows):
    scenario_context = get_current_scenario_context(context)
    samples = np.asarray([[x, y] for y in range(rows) for x in range(columns)], dtype=np.float64)
    scenario_context.store("samples", samples)
    scenario_context.store("labels", np.where((samples[:, 0] > 0.5) ^ (samples[:, 1] > 0.5), 1, -1))


@when("a decision tree of depth {depth:d} is grown")
def step_when_tree_grown(context, depth):
    scenario_context = get_current_scenario_context(context)
    tree = train_tree(scenario_context.get("samples"), scenario_context.get("labels"), max_depth=depth)
    scenario_context.store("model", tree)


@then("the tree should be a single leaf predicting +1")
def step_then_single_leaf(context):
    scenario_context = get_current_scenario_context(context)
    tree = scenario_context.get("model")
    assert tree.node_count == 1, f"Expected a single leaf, got {tree.node_count} nodes"
    assert np.all(tree.predict(np.asarray([[-100.0], [0.0], [100.0]])) == 1), "The leaf does not predict +1"


@then("the root should split feature {feature:d} at {threshold:g}")
def step_then_root_split(context, feature, threshold):
    scenario_context = get_current_scenario_context(context)
    tree = scenario_context.get("model")
    actual = (int(tree.feature[0]), float(tree.threshold[0]))
    assert actual == (feature, threshold), f"Expected the root split ({feature}, {threshold}), got {actual}"


@then("the tree depth should be {depth:d}")
def step_then_tree_depth(context, depth):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("model").depth
    assert actual == depth, f"Expected depth {depth}, got {actual}"


@when("Real AdaBoost is trained for {rounds:d} rounds on the samples and on every sample twice")
def step_when_adaboost_trained_on_duplicates(context, rounds):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    labels = scenario_context.get("labels")
    models = [
        train_real_adaboost(samples, labels, rounds=rounds),
        train_real_adaboost(np.vstack([samples, samples]), np.concatenate([labels, labels]), rounds=rounds),
    ]
    scenario_context.store("models", models)


@then("both ensembles should split the same features at the same thresholds")
def step_then_same_splits(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    assert first.rounds == second.rounds, f"Round counts differ: {first.rounds} and {second.rounds}"
    for index, (left, right) in enumerate(zip(first.trees, second.trees, strict=True)):
        assert np.array_equal(left.feature, right.feature), f"Round {index} splits different features"
        assert np.array_equal(left.threshold, right.threshold), f"Round {index} splits at different thresholds"
    assert np.array_equal(first.smoothing, second.smoothing), "Smoothing constants differ"


@then("both ensembles should give the same scores within {tolerance:g}")
def step_then_same_scores(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    samples = scenario_context.get("samples")
    error = np.abs(first.decision_function(samples) - second.decision_function(samples)).max()
    assert error <= tolerance, f"Scores differ by {error:.3e}"


@then("the root of every round's tree should hold a total weight of 1 within {tolerance:g}")
def step_then_root_weights_normalized(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    for index, tree in enumerate(scenario_context.get("model").trees):
        total = tree.positive_mass[0] + tree.negative_mass[0]
        assert abs(total - 1.0) <= tolerance, f"Round {index} weights sum to {total!r}"


@when("decision trees of depth {depth:d} are grown on the samples and on their exponentials")
def step_when_trees_grown_on_transform(context, depth):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    labels = scenario_context.get("labels")
    transformed = np.exp(samples)
    scenario_context.store("transformed", transformed)
    scenario_context.store(
        "models",
        [train_tree(samples, labels, max_depth=depth), train_tree(transformed, labels, max_depth=depth)],
    )


@then("both trees should split the same features")
def step_then_trees_same_features(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    assert first.node_count > 1, "The tree did not split"
    assert np.array_equal(first.feature, second.feature), f"Split features differ: {first.feature} {second.feature}"


@then("both trees should give the same training predictions")
def step_then_trees_same_predictions(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    original = first.predict(scenario_context.get("samples"))
    transformed = second.predict(scenario_context.get("transformed"))
    assert np.array_equal(original, transformed), "Predictions differ after the monotone transform"


@given('the two-dimensional samples "{points}" labelled "{labels}"')
def step_given_two_dimensional_samples(context, points, labels):
    scenario_context = get_current_scenario_context(context)
    samples = [[float(value) for value in point.split(",")] for point in points.split()]
    scenario_context.store("samples", np.asarray(samples))
    scenario_context.store("labels", np.asarray([int(label) for label in labels.split()]))


@when("an RBF SVM is trained with C {c:g} and sigma {sigma:g}")
def step_when_svm_trained(context, c, sigma):
    scenario_context = get_current_scenario_context(context)
    model = smo_train(scenario_context.get("samples"), scenario_context.get("labels"), c=c, sigma=sigma)
    scenario_context.store("model", model)


@then("the SVM should keep {count:d} support vectors")
def step_then_support_vector_count(context, count):
    scenario_context = get_current_scenario_context(context)
    actual = scenario_context.get("model").support_vectors.shape[0]
    assert actual == count, f"Expected {count} support vectors, got {actual}"


@then("the SVM score at {x:g},{y:g} should be 0 within {tolerance:g}")
def step_then_svm_score_zero(context, x, y, tolerance):
    scenario_context = get_current_scenario_context(context)
    score = float(scenario_context.get("model").decision_function(np.asarray([[x, y]]))[0])
    assert abs(score) <= tolerance, f"Score at the midpoint is {score:.3e}"


@when("RBF SVMs are trained with C {c:g} and sigma {sigma:g} on the labels and on the flipped labels")
def step_when_svms_trained_on_flip(context, c, sigma):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    labels = scenario_context.get("labels")
    scenario_context.store(
        "models",
        [smo_train(samples, labels, c=c, sigma=sigma), smo_train(samples, -labels, c=c, sigma=sigma)],
    )


@then("the two decision functions should negate each other within {tolerance:g}")
def step_then_decisions_negate(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("models")
    grid = np.random.default_rng(0).normal(size=(200, scenario_context.get("samples").shape[1]))
    points = np.vstack([scenario_context.get("samples"), grid])
    error = np.abs(first.decision_function(points) + second.decision_function(points)).max()
    assert error <= tolerance, f"Scores fail to negate by {error:.3e}"


@given("{count:d} random small HMMs with sequences of up to {length:d} frames and seed {seed:d}")
def step_given_random_hmms_with_length(context, count, length, seed):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("cases", _random_small_hmms(seed, count, length))


@given("{count:d} random small HMMs with single-frame sequences and seed {seed:d}")
def step_given_random_hmms_single_frame(context, count, seed):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("cases", _random_small_hmms(seed, count, 1))


@then("the forward log-likelihood should match the unscaled forward sum within {tolerance:g} for each of them")
def step_then_forward_matches_naive(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    for index, (model, sequence) in enumerate(scenario_context.get("cases")):
        emissions = np.exp(model.emission_log_prob(sequence))
        alpha = model.start_prob * emissions[0]
        for t in range(1, sequence.shape[0]):
            alpha = (alpha @ model.transitions) * emissions[t]
        expected = float(np.log(alpha.sum()))
        actual = forward_log_likelihood(model, sequence)
        assert abs(actual - expected) <= tolerance * max(1.0, abs(expected)), (
            f"Case {index}: forward {actual} differs from unscaled {expected}"
        )


@then("Viterbi should pick the best start and emission state for each of them")
def step_then_single_frame_viterbi(context):
    scenario_context = get_current_scenario_context(context)
    for index, (model, sequence) in enumerate(scenario_context.get("cases")):
        joint = np.log(model.start_prob) + model.emission_log_prob(sequence)[0]
        path, score = viterbi(model, sequence)
        assert path.tolist() == [int(np.argmax(joint))], f"Case {index}: path {path} instead of {np.argmax(joint)}"
        assert abs(score - joint.max()) <= 1e-12 * max(1.0, abs(joint.max())), f"Case {index}: score {score}"


@when("Baum-Welch trains a {states:d}-state HMM on them")
def step_when_baum_welch_on_frames(context, states):
    scenario_context = get_current_scenario_context(context)
    scenario_context.store("model", hmm_baum_welch([scenario_context.get("frames")], n_states=states, seed=0))


@then("every variance should equal the variance floor")
def step_then_variances_floored(context):
    scenario_context = get_current_scenario_context(context)
    variances = scenario_context.get("model").variances
    floor = HmmConfig().VARIANCE_FLOOR
    assert np.allclose(variances, floor, rtol=1e-6, atol=0.0), f"Variances {variances.min()}..{variances.max()}"


@then("every log-likelihood should be finite")
def step_then_log_likelihoods_finite(context):
    scenario_context = get_current_scenario_context(context)
    history = scenario_context.get("model").log_likelihood_history
    assert history.size and np.all(np.isfinite(history)), f"Non-finite log-likelihoods: {history}"


@when('one-vs-all ensembles are trained for {rounds:d} rounds on the labels and on the labels mapped by "{mapping}"')
def step_when_one_vs_all_trained_on_mapping(context, rounds, mapping):
    scenario_context = get_current_scenario_context(context)
    samples = scenario_context.get("samples")
    labels = scenario_context.get("labels")
    table = dict(tuple(int(code) for code in pair.split(":")) for pair in mapping.split())
    trainer = OneVsAllTrainer(RealAdaBoostTrainer(rounds=rounds, adaboost_config=AdaBoostConfig()))
    mapped = np.asarray([table[int(label)] for label in labels])
    scenario_context.store("mapping", table)
    scenario_context.store("models", [trainer.fit(samples, labels), trainer.fit(samples, mapped)])


@then("the score of every class should move to its mapped class")
def step_then_scores_permuted(context):
    scenario_context = get_current_scenario_context(context)
    original, mapped = scenario_context.get("models")
    samples = scenario_context.get("samples")
    original_scores = original.scores(samples)
    mapped_scores = mapped.scores(samples)
    for code, target in scenario_context.get("mapping").items():
        left = original_scores[:, original.class_codes.index(code)]
        right = mapped_scores[:, mapped.class_codes.index(target)]
        assert np.array_equal(left, right), f"Scores of class {code} differ from those of class {target}"


@when("a {states:d}-state HMM is trained on {frames:d} frames holding a NaN")
def step_when_hmm_trained_on_nan(context, states, frames):
    scenario_context = get_current_scenario_context(context)
    sequence = np.random.default_rng(1).normal(size=(frames, 2))
    sequence[frames // 2, 0] = np.nan
    try:
        GaussianHmmTrainer(HmmConfig(STATE_COUNT=states)).fit([sequence], seed=0)
    except BaseError as e:
        scenario_context.store("error", e)


@then("a fresh closed eye template should score below 0")
def step_then_closed_template_negative(context):
    scenario_context = get_current_scenario_context(context)
    patch = render_closed_patch(noise=0.04, rng=np.random.default_rng(99))
    score = eye_closure_score(iris_template(patch, (30, 30)), scenario_context.get("model"))
    assert score < 0.0, f"A closed eye scored {score}"


@then("a fresh open eye template should score above 0")
def step_then_open_template_positive(context):
    scenario_context = get_current_scenario_context(context)
    patch = render_disk_patch((30.0, 30.0), 7.0, noise=0.04, rng=np.random.default_rng(98))
    score = eye_closure_score(iris_template(patch, (30, 30)), scenario_context.get("model"))
    assert score > 0.0, f"An open eye scored {score}"


@when("a {states:d}-state HMM is trained on them with tolerance {tolerance:g} and at most {iterations:d} iterations")
def step_when_hmm_trained_tolerance(context, states, tolerance, iterations):
    scenario_context = get_current_scenario_context(context)
    configs = HmmConfig(STATE_COUNT=states, MAX_ITERATIONS=iterations, TOLERANCE=tolerance)
    scenario_context.store("model", GaussianHmmTrainer(configs).fit(scenario_context.get("sequences"), seed=0))
    scenario_context.store("iterations", iterations)


@then("training should stop at the first iteration gaining less than {tolerance:g} in total")
def step_then_stops_on_total_gain(context, tolerance):
    scenario_context = get_current_scenario_context(context)
    gains = np.diff(scenario_context.get("model").log_likelihood_history)
    assert gains.size > 0, "Training stopped after a single iteration"
    assert gains.size + 1 < scenario_context.get("iterations"), "Training ran into the iteration cap"
    assert np.all(gains[:-1] >= tolerance), f"Training went on after a gain of {gains[:-1].min():.3e}"
    assert gains[-1] < tolerance, f"Training stopped on a gain of {gains[-1]:.3e}"
