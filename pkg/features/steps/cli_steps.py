import re
import shlex

from behave import given, then, when
from features.test_helpers import get_current_scenario_context

from distractipy.cli.main import main

FAST_CONFIG = """\
[EYE]
CLOSURE_TRAINING_SIZE = 200

[SVM]
MAX_ITERATIONS = 20000

[HMM]
MAX_ITERATIONS = 15

[FUSION]
TRAINING_STRIDE = 2
"""


@given("a fast configuration file")
def step_given_fast_config_file(context):
    scenario_context = get_current_scenario_context(context)
    path = scenario_context.workspace() / "fast.toml"
    path.write_text(FAST_CONFIG, encoding="utf-8")
    scenario_context.store("config_path", path)


@given('an empty directory "{name}"')
def step_given_empty_directory(context, name):
    scenario_context = get_current_scenario_context(context)
    (scenario_context.workspace() / name).mkdir()


@when('I run "{command}" into "{target}"')
def step_when_run(context, command, target):
    scenario_context = get_current_scenario_context(context)
    workspace = scenario_context.workspace()
    expanded = re.sub(r"\{([^}]+)\}", lambda match: str(workspace / match.group(1)), command)
    argv = ["--log-level", "WARNING"]
    config_path = scenario_context.get("config_path")
    if config_path is not None:
        argv = ["--config", str(config_path), *argv]
    argv += [*shlex.split(expanded), "--output", str(workspace / target)]
    try:
        status = main(argv)
    except SystemExit as e:
        status = e.code
    scenario_context.store("exit_status", status)


@then("the command should exit with status {expected:d}")
def step_then_exit_status(context, expected):
    scenario_context = get_current_scenario_context(context)
    status = scenario_context.get("exit_status")
    assert status == expected, f"Expected exit status {expected}, got {status}"


@then('"{name}" should contain {count:d} sessions')
def step_then_session_count(context, name, count):
    scenario_context = get_current_scenario_context(context)
    manifests = list((scenario_context.workspace() / name).rglob("manifest.json"))
    assert len(manifests) == count, f"Expected {count} sessions, found {len(manifests)}"


@then('"{first}" and "{second}" should hold identical files')
def step_then_identical_trees(context, first, second):
    scenario_context = get_current_scenario_context(context)
    left_root = scenario_context.workspace() / first
    right_root = scenario_context.workspace() / second
    left = sorted(path.relative_to(left_root) for path in left_root.rglob("*") if path.is_file())
    right = sorted(path.relative_to(right_root) for path in right_root.rglob("*") if path.is_file())
    assert left, "Nothing was written"
    assert left == right, "The file lists differ"
    for relative in left:
        assert (left_root / relative).read_bytes() == (right_root / relative).read_bytes(), f"{relative} differs"


@then('"{name}" should contain the files "{file_names}"')
def step_then_contains_files(context, name, file_names):
    scenario_context = get_current_scenario_context(context)
    root = scenario_context.workspace() / name
    written = {path.name for path in root.rglob("*") if path.is_file()}
    for file_name in (part.strip() for part in file_names.split(",")):
        assert file_name in written, f"{file_name} missing from {name}: {sorted(written)}"
