"""Helpers shared by the step implementations."""

import numpy as np

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import AdaBoostConfig, EyeConfig, FusionConfig, HmmConfig, SvmConfig
from distractipy.models.dtos.generator_dtos import GeneratorSpecDTO, SegmentSpecDTO
from distractipy.models.types.distraction_types import DistractionClassType


def get_current_scenario_context(context):
    """Get the current scenario context from the pool.

    Args:
        context: The behave context object

    Returns:
        The scenario-specific context for the current scenario

    Raises:
        AttributeError: If no scenario context pool or current scenario is available
    """
    if not hasattr(context, "scenario_context_pool"):
        raise AttributeError("No scenario context pool available")

    current_scenario = context.scenario_context_pool.get_context(context.scenario.id)
    if not current_scenario:
        raise AttributeError("No current scenario available")
    return current_scenario


def render_disk_patch(center, radius, size=60, iris=0.22, sclera=0.78, noise=0.0, rng=None):
    """Render a dark anti-aliased disk on a bright background, values in [0, 1]."""
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    distance = np.hypot(xs - center[0], ys - center[1])
    coverage = np.clip(radius + 0.5 - distance, 0.0, 1.0)
    patch = sclera - (sclera - iris) * coverage
    if noise > 0:
        rng = rng or np.random.default_rng(0)
        patch = patch + rng.normal(0.0, noise, size=patch.shape)
    return np.clip(patch, 0.0, 1.0)


def small_spec(driver_id="driver00", session_id="session00", scale=0.1, shuffle=True):
    """Generator spec covering every class with short segments."""
    plan = [
        (DistractionClassType.NORMAL_DRIVING, 400),
        (DistractionClassType.PHONE_CALL, 350),
        (DistractionClassType.NORMAL_DRIVING, 250),
        (DistractionClassType.DRINKING, 300),
        (DistractionClassType.NORMAL_DRIVING, 250),
        (DistractionClassType.TEXT_MESSAGE, 350),
        (DistractionClassType.NORMAL_DRIVING, 250),
        (DistractionClassType.OBJECT_DISTRACTION, 350),
        (DistractionClassType.NORMAL_DRIVING, 500),
    ]
    return GeneratorSpecDTO(
        driver_id=driver_id,
        session_id=session_id,
        segments=tuple(
            SegmentSpecDTO(distraction_class=distraction, frame_count=max(1, round(count * scale)))
            for distraction, count in plan
        ),
        shuffle_distractions=shuffle,
    )


def fast_config():
    """Global test config with small learners, for end-to-end scenarios."""
    base = BaseConfig.global_config()
    return base.model_copy(
        update={
            "ADABOOST": AdaBoostConfig(ROUNDS=20),
            "SVM": SvmConfig(MAX_ITERATIONS=20_000),
            "HMM": HmmConfig(STATE_COUNT=3, MAX_ITERATIONS=15),
            "EYE": EyeConfig(CLOSURE_TRAINING_SIZE=200),
            "FUSION": FusionConfig(WINDOW_SIZE=20, TRAINING_STRIDE=2),
        },
    )


def render_closed_patch(size=60, skin=0.62, lid=0.18, noise=0.0, rng=None):
    """Render a closed eye: a dark lid crease across bright skin, values in [0, 1]."""
    ys, _ = np.mgrid[0:size, 0:size].astype(np.float64)
    crease = np.exp(-0.5 * ((ys - size / 2.0) / 1.5) ** 2)
    patch = skin - (skin - lid) * crease
    if noise > 0:
        rng = rng or np.random.default_rng(0)
        patch = patch + rng.normal(0.0, noise, size=patch.shape)
    return np.clip(patch, 0.0, 1.0)
