import argparse
import json
import logging
import sys
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
import pandas as pd
from pydantic import ValidationError

from distractipy.adapters.session_store.adapters import PgmSessionStoreAdapter
from distractipy.adapters.session_store.ports import SessionStorePort
from distractipy.configs.base_config import BaseConfig
from distractipy.helpers.utils.model_file_utils import ModelFileUtils
from distractipy.logics.evaluation import (
    ablation,
    loso_cross_validation,
    total_average_accuracy,
    write_ablation,
    write_labels,
    write_report,
    write_timeline,
)
from distractipy.logics.fusion import feature_columns, fusion_features
from distractipy.logics.pipeline import frame_matrix, observe_session, pipeline_settings, predict_session, train_fold
from distractipy.logics.session_generator import generate_synthetic_session
from distractipy.models.dtos.fusion_dtos import FRAME_FEATURE_NAMES
from distractipy.models.dtos.generator_dtos import GeneratorSpecDTO
from distractipy.models.dtos.pipeline_dtos import SessionObservationsDTO, TrainedPipelineDTO
from distractipy.models.errors import (
    BaseError,
    InternalError,
    InvalidArgumentError,
    OutOfRangeError,
    SessionFormatError,
)

logger = logging.getLogger(__name__)


class JsonArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as one JSON line."""

    def error(self, message: str) -> NoReturn:
        """Print the usage error in the CLI error format and exit with status 2.

        Args:
            message: The argparse message.
        """
        failure = InvalidArgumentError(additional_data={"reason": message})
        sys.stderr.write(json.dumps(failure.to_dict(), sort_keys=True) + "\n")
        raise SystemExit(failure.exit_code)


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("overrides")
    group.add_argument("--window-size", type=int, help="Smoothing and mode filter window")
    group.add_argument("--hmm-states", type=int, help="Hidden states per class HMM (2..30)")
    group.add_argument("--adaboost-rounds", type=int, help="Boosting rounds")
    group.add_argument("--feature-groups", help="Comma-separated subset of ARM,EYES,ORIENTATION,EXPRESSION")
    group.add_argument("--classifier-path", choices=("adaboost", "hmm", "both"), help="Fusion paths to train")
    group.add_argument("--use-deltas", action="store_true", default=None, help="Append delta features")
    group.add_argument("--hmm-raw", action="store_true", default=None, help="Feed the HMMs raw frame vectors")


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line parser.

    Returns:
        argparse.ArgumentParser: Parser with one subcommand per pipeline stage.
    """
    parser = JsonArgumentParser(prog="distractipy", description="Driver distraction recognition from RGB-D sessions")
    parser.add_argument("--config", type=Path, help="TOML file with configuration sections")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Overrides the environment")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=JsonArgumentParser)

    generate = commands.add_parser("generate", help="Write synthetic sessions")
    generate.add_argument("--output", type=Path, required=True)
    generate.add_argument("--drivers", type=int, default=6)
    generate.add_argument("--sessions-per-driver", type=int, default=4)
    generate.add_argument("--frames", type=int, help="Approximate frames per session")
    generate.add_argument("--seed", type=int, required=True)

    extract = commands.add_parser("extract", help="Write per-frame 17 and smoothed feature tables")
    extract.add_argument("--sessions", type=Path, nargs="+", required=True)
    extract.add_argument("--model", type=Path, required=True)
    extract.add_argument("--output", type=Path, required=True)

    train = commands.add_parser("train", help="Train every classifier on the given sessions")
    train.add_argument("--sessions", type=Path, nargs="+", required=True)
    train.add_argument("--output", type=Path, required=True)
    train.add_argument("--seed", type=int, required=True)
    _add_overrides(train)

    evaluate = commands.add_parser("evaluate", help="Leave-one-driver-out evaluation")
    evaluate.add_argument("--sessions", type=Path, nargs="+", required=True)
    evaluate.add_argument("--output", type=Path, required=True)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--loso", action="store_true", help="Run the cross-validation (the only mode)")
    evaluate.add_argument("--ablation", action="store_true", help="Also cross-validate per feature group")
    _add_overrides(evaluate)

    predict = commands.add_parser("predict", help="Label the frames of sessions with a trained model")
    predict.add_argument("--sessions", type=Path, nargs="+", required=True)
    predict.add_argument("--model", type=Path, required=True)
    predict.add_argument("--output", type=Path, required=True)

    inspect = commands.add_parser("inspect", help="Dump per-frame intermediate values")
    inspect.add_argument("--sessions", type=Path, nargs="+", required=True)
    inspect.add_argument("--model", type=Path)
    inspect.add_argument("--output", type=Path, required=True)
    return parser


def load_config(path: Path | None, args: argparse.Namespace) -> BaseConfig:
    """Load the configuration file and apply the command-line overrides.

    Args:
        path: Optional TOML file whose tables are config sections.
        args: Parsed arguments.

    Returns:
        BaseConfig: The validated configuration.

    Raises:
        InvalidArgumentError: If the file or an override is invalid.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as e:
            logger.exception("Cannot load config file %s", path)
            raise InvalidArgumentError(argument_name="--config", additional_data={"path": str(path)}) from e

    overrides: dict[str, dict[str, Any]] = {"FUSION": {}, "HMM": {}, "ADABOOST": {}}
    if getattr(args, "window_size", None) is not None:
        overrides["FUSION"]["WINDOW_SIZE"] = args.window_size
    if getattr(args, "feature_groups", None):
        overrides["FUSION"]["FEATURE_GROUPS"] = [name.strip().upper() for name in args.feature_groups.split(",")]
    if getattr(args, "classifier_path", None):
        overrides["FUSION"]["CLASSIFIER_PATH"] = args.classifier_path.upper()
    if getattr(args, "use_deltas", None):
        overrides["FUSION"]["USE_DELTAS"] = True
    if getattr(args, "hmm_raw", None):
        overrides["FUSION"]["HMM_USE_SMOOTHED"] = False
    if getattr(args, "hmm_states", None) is not None:
        overrides["HMM"]["STATE_COUNT"] = args.hmm_states
    if getattr(args, "adaboost_rounds", None) is not None:
        overrides["ADABOOST"]["ROUNDS"] = args.adaboost_rounds
    for section, values in overrides.items():
        if values:
            data[section] = {**data.get(section, {}), **values}

    try:
        return BaseConfig(**data)
    except ValidationError as e:
        raise InvalidArgumentError(argument_name="config", additional_data={"reason": e.errors()[0]["msg"]}) from e


def _session_paths(store: SessionStorePort, roots: Sequence[Path]) -> list[Path]:
    paths = sorted({path for root in roots for path in store.list_sessions(root)})
    if not paths:
        raise SessionFormatError(file_name="manifest.json", reason="no sessions found")
    return paths


def _observe_all(store: SessionStorePort, roots: Sequence[Path], config: BaseConfig) -> list[SessionObservationsDTO]:
    return [observe_session(store.load_session(path), config) for path in _session_paths(store, roots)]


def _session_dir(output: Path, observations: SessionObservationsDTO) -> Path:
    return output / observations.driver_id / observations.session_id


def _write_csv(table: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, lineterminator="\n", na_rep="", float_format="%.9g")


def run_generate(args: argparse.Namespace, config: BaseConfig) -> None:
    """Write ``drivers x sessions`` synthetic sessions under the output directory."""
    store = PgmSessionStoreAdapter(config.SESSION)
    for driver in range(args.drivers):
        driver_id = f"driver{driver:02d}"
        for session in range(args.sessions_per_driver):
            session_id = f"session{session:02d}"
            spec = GeneratorSpecDTO.from_config(config.GENERATOR, config.SESSION, driver_id, session_id, args.frames)
            seed = int(np.random.SeedSequence([args.seed, driver, session]).generate_state(1)[0])
            store.save_session(generate_synthetic_session(spec, seed), args.output / driver_id / session_id)


def run_extract(args: argparse.Namespace, config: BaseConfig) -> None:
    """Write ``frames.csv`` (17 features) and ``smoothed.csv`` per session."""
    pipeline = ModelFileUtils.load(args.model, TrainedPipelineDTO)
    settings = pipeline_settings(pipeline)
    store = PgmSessionStoreAdapter(config.SESSION)
    selected = [FRAME_FEATURE_NAMES[index] for index in feature_columns(settings.feature_groups)]
    smoothed_names = [f"median_{name}" for name in selected] + [f"std_{name}" for name in selected]
    if settings.use_deltas:
        smoothed_names += [f"delta_{name}" for name in selected] + [f"delta2_{name}" for name in selected]
    for observations in _observe_all(store, args.sessions, config):
        frames = frame_matrix(observations, pipeline)
        directory = _session_dir(args.output, observations)
        table = pd.DataFrame(frames, columns=list(FRAME_FEATURE_NAMES))
        table.insert(0, "frame_id", np.arange(observations.frame_count))
        _write_csv(table, directory / "frames.csv")
        smoothed = pd.DataFrame(fusion_features(frames, settings), columns=smoothed_names)
        smoothed.insert(0, "frame_id", np.arange(observations.frame_count))
        _write_csv(smoothed, directory / "smoothed.csv")


def run_train(args: argparse.Namespace, config: BaseConfig) -> None:
    """Train on every given session and write one pipeline model file."""
    store = PgmSessionStoreAdapter(config.SESSION)
    pipeline = train_fold(_observe_all(store, args.sessions, config), args.seed, config)
    ModelFileUtils.save(pipeline, args.output)
    logger.info("Wrote pipeline model to %s", args.output)


def run_evaluate(args: argparse.Namespace, config: BaseConfig) -> None:
    """Run leave-one-driver-out evaluation and, optionally, the feature-group ablation."""
    store = PgmSessionStoreAdapter(config.SESSION)
    observations = _observe_all(store, args.sessions, config)
    write_report(loso_cross_validation(observations, args.seed, config), args.output)
    if args.ablation:
        write_ablation(ablation(observations, args.seed, config), args.output)


def run_predict(args: argparse.Namespace, config: BaseConfig) -> None:
    """Write predicted labels and an aligned timeline per session."""
    pipeline = ModelFileUtils.load(args.model, TrainedPipelineDTO)
    store = PgmSessionStoreAdapter(config.SESSION)
    for observations in _observe_all(store, args.sessions, config):
        prediction = predict_session(pipeline, observations)
        directory = _session_dir(args.output, observations)
        for name, labels in (("adaboost", prediction.adaboost), ("hmm", prediction.hmm)):
            if labels is None:
                continue
            write_labels(labels, directory / f"labels_{name}.csv")
            logger.info(
                "%s/%s %s accuracy %.4f",
                observations.driver_id,
                observations.session_id,
                name,
                total_average_accuracy(labels, prediction.truth),
            )
        write_timeline(prediction, directory / "timeline.csv")


def run_inspect(args: argparse.Namespace, config: BaseConfig) -> None:
    """Dump iris centers, validity flags and, given a model, frame vectors and smoothed features."""
    pipeline = ModelFileUtils.load(args.model, TrainedPipelineDTO) if args.model else None
    store = PgmSessionStoreAdapter(config.SESSION)
    for observations in _observe_all(store, args.sessions, config):
        centers = observations.iris_centers.reshape(observations.frame_count, 4)
        table = pd.DataFrame(
            {
                "frame_id": np.arange(observations.frame_count),
                "label": observations.labels,
                "iris_l_x": centers[:, 0],
                "iris_l_y": centers[:, 1],
                "iris_r_x": centers[:, 2],
                "iris_r_y": centers[:, 3],
                "arm_valid": observations.arm_valid.astype(np.int64),
                "eyes_valid": observations.eyes_valid.astype(np.int64),
                "face_valid": observations.face_valid.astype(np.int64),
            },
        )
        if pipeline is not None:
            frames = frame_matrix(observations, pipeline)
            settings = pipeline_settings(pipeline)
            smoothed = fusion_features(frames, settings)
            for index, name in enumerate(FRAME_FEATURE_NAMES):
                table[name] = frames[:, index]
            for index in range(smoothed.shape[1]):
                table[f"smoothed_{index:02d}"] = smoothed[:, index]
        _write_csv(table, _session_dir(args.output, observations) / "inspect.csv")


HANDLERS = {
    "generate": run_generate,
    "extract": run_extract,
    "train": run_train,
    "evaluate": run_evaluate,
    "predict": run_predict,
    "inspect": run_inspect,
}


def _report(error: BaseError) -> int:
    sys.stderr.write(json.dumps(error.to_dict(), sort_keys=True) + "\n")
    return error.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command.

    Args:
        argv: Arguments without the program name; ``sys.argv[1:]`` when omitted.

    Returns:
        int: 0 on success, otherwise the exit status of the error.
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args)
    except BaseError as e:
        return _report(e)
    level = args.log_level or logging.getLevelName(config.ENVIRONMENT.log_level)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s %(message)s")
    BaseConfig.set_global(config)

    try:
        HANDLERS[args.command](args, config)
    except BaseError as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        return _report(e)
    except ValidationError as e:
        return _report(OutOfRangeError(additional_data={"reason": e.errors()[0]["msg"]}))
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        return _report(InternalError(details=str(e)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
