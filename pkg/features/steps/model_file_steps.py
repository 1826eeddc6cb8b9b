import numpy as np
from behave import given, then, when
from features.test_helpers import get_current_scenario_context

from distractipy.configs.config_template import AdaBoostConfig, SvmConfig
from distractipy.helpers.utils.model_file_utils import ModelFileUtils
from distractipy.learners.real_adaboost import OneVsAllTrainer, RealAdaBoostTrainer
from distractipy.learners.smo_svm import SmoSvmTrainer
from distractipy.models.dtos.fusion_dtos import FusionHmmBundleDTO
from distractipy.models.dtos.learner_dtos import GaussianHmmDTO
from distractipy.models.dtos.pipeline_dtos import TrainedPipelineDTO
from distractipy.models.errors import BaseError


def _random_hmm(rng, states, features):
    transitions = rng.uniform(0.1, 1.0, size=(states, states))
    return GaussianHmmDTO(
        start_prob=np.full(states, 1.0 / states),
        transitions=transitions / transitions.sum(axis=1, keepdims=True),
        means=rng.normal(size=(states, features)),
        variances=rng.uniform(0.5, 1.5, size=(states, features)),
    )


@given("a small hand-built pipeline")
def step_given_small_pipeline(context):
    scenario_context = get_current_scenario_context(context)
    rng = np.random.default_rng(2)
    boosting = RealAdaBoostTrainer(rounds=5, adaboost_config=AdaBoostConfig())
    arm_samples = rng.normal(size=(90, 120))
    arm_classifier = OneVsAllTrainer(boosting).fit(arm_samples, np.arange(90) % 3 + 1)
    frames = rng.normal(size=(100, 17))
    fusion_adaboost = OneVsAllTrainer(boosting).fit(frames, np.arange(100) % 5 + 1)
    templates = rng.normal(size=(40, 576))
    closure_svm = SmoSvmTrainer(SvmConfig()).fit(templates, np.where(np.arange(40) % 2 == 0, 1.0, -1.0))
    fusion_hmm = FusionHmmBundleDTO(
        class_codes=(1, 2, 3, 4, 5),
        models=tuple(_random_hmm(rng, 3, 17) for _ in range(5)),
        feature_mean=rng.normal(size=17),
        feature_scale=rng.uniform(0.5, 2.0, size=17),
        use_smoothed=False,
    )
    pipeline = TrainedPipelineDTO(
        arm_classifier=arm_classifier,
        closure_svm=closure_svm,
        fusion_adaboost=fusion_adaboost,
        fusion_hmm=fusion_hmm,
        window_size=40,
        use_deltas=True,
        feature_groups=("ARM", "EYES"),
    )
    scenario_context.store("pipeline", pipeline)
    scenario_context.store("samples", {"arm": arm_samples[:10], "frames": frames[:10], "templates": templates[:10]})


@given('a model file "{name}" holding "{content}"')
def step_given_raw_model_file(context, name, content):
    scenario_context = get_current_scenario_context(context)
    (scenario_context.workspace() / name).write_text(content, encoding="utf-8")


@when('the pipeline is saved to "{name}" and loaded back')
def step_when_pipeline_round_trip(context, name):
    scenario_context = get_current_scenario_context(context)
    path = scenario_context.workspace() / name
    ModelFileUtils.save(scenario_context.get("pipeline"), path)
    scenario_context.store("loaded", ModelFileUtils.load(path, TrainedPipelineDTO))


@when('the pipeline is saved to "{first}" and to "{second}"')
def step_when_pipeline_saved_twice(context, first, second):
    scenario_context = get_current_scenario_context(context)
    paths = [scenario_context.workspace() / name for name in (first, second)]
    for path in paths:
        ModelFileUtils.save(scenario_context.get("pipeline"), path)
    scenario_context.store("paths", paths)


@when('the model file "{name}" is loaded as a pipeline')
def step_when_model_file_loaded(context, name):
    scenario_context = get_current_scenario_context(context)
    try:
        ModelFileUtils.load(scenario_context.workspace() / name, TrainedPipelineDTO)
    except BaseError as e:
        scenario_context.store("error", e)


@when('its closure SVM is saved to "{name}" and loaded as a pipeline')
def step_when_svm_loaded_as_pipeline(context, name):
    scenario_context = get_current_scenario_context(context)
    path = scenario_context.workspace() / name
    ModelFileUtils.save(scenario_context.get("pipeline").closure_svm, path)
    try:
        ModelFileUtils.load(path, TrainedPipelineDTO)
    except BaseError as e:
        scenario_context.store("error", e)


@then("the loaded pipeline should score frames exactly like the original")
def step_then_pipeline_scores_match(context):
    scenario_context = get_current_scenario_context(context)
    original = scenario_context.get("pipeline")
    loaded = scenario_context.get("loaded")
    samples = scenario_context.get("samples")
    pairs = [
        (original.arm_classifier.scores(samples["arm"]), loaded.arm_classifier.scores(samples["arm"])),
        (original.fusion_adaboost.scores(samples["frames"]), loaded.fusion_adaboost.scores(samples["frames"])),
        (
            original.closure_svm.decision_function(samples["templates"]),
            loaded.closure_svm.decision_function(samples["templates"]),
        ),
    ]
    for expected, actual in pairs:
        assert np.array_equal(expected, actual), "Scores changed after reload"
    for expected, actual in zip(original.fusion_hmm.models, loaded.fusion_hmm.models, strict=True):
        assert np.array_equal(expected.transitions, actual.transitions), "HMM transitions changed after reload"
        assert np.array_equal(expected.means, actual.means), "HMM means changed after reload"


@then("the loaded pipeline should keep its fusion settings")
def step_then_pipeline_settings_kept(context):
    scenario_context = get_current_scenario_context(context)
    loaded = scenario_context.get("loaded")
    actual = (loaded.window_size, loaded.use_deltas, loaded.feature_groups, loaded.fusion_hmm.use_smoothed)
    expected = (40, True, ("ARM", "EYES"), False)
    assert actual == expected, f"Expected {expected}, but got {actual}"


@then("both model files should be byte-identical")
def step_then_files_identical(context):
    scenario_context = get_current_scenario_context(context)
    first, second = scenario_context.get("paths")
    assert first.read_bytes() == second.read_bytes(), "Model files differ"
