from features.scenario_context import ScenarioContext


class ScenarioContextPoolManager:
    """Pool of per-scenario contexts keyed by scenario id.

    Each scenario gets its own storage and workspace directory, released when the
    scenario ends so that generated sessions and model files never leak between scenarios.
    """

    def __init__(self):
        self._contexts: dict[str, ScenarioContext] = {}

    def get_context(self, scenario_id: str) -> ScenarioContext:
        """Return the context of a scenario, creating it on first use."""
        context = self._contexts.get(scenario_id)
        if context is None:
            context = self._contexts[scenario_id] = ScenarioContext(scenario_id)
        return context

    def cleanup_context(self, scenario_id: str) -> None:
        """Release the context of one scenario, if it exists."""
        context = self._contexts.pop(scenario_id, None)
        if context is not None:
            context.cleanup()

    def cleanup_all(self) -> None:
        """Release every remaining context."""
        for scenario_id in sorted(self._contexts):
            self.cleanup_context(scenario_id)
