import enum
from enum import StrEnum
from logging import DEBUG, INFO, WARNING


class EnvironmentType(StrEnum):
    """Environment the pipeline runs in.

    The environment only decides the default log level; every numeric behaviour of the
    pipeline is independent of it.

    Examples:
        >>> from distractipy.configs.environment_type import EnvironmentType
        >>> EnvironmentType.BENCHMARK.log_level
        20
    """

    PRODUCTION = "PRODUCTION"
    BENCHMARK = "BENCHMARK"
    TEST = "TEST"
    LOCAL = "LOCAL"

    @enum.property
    def is_test(self) -> bool:
        """Check if the environment is an automated run (tests or benchmark).

        Returns:
            bool: True for TEST and BENCHMARK.
        """
        return self in (self.TEST, self.BENCHMARK)

    @enum.property
    def log_level(self) -> int:
        """Get the default logging level.

        Returns:
            int: WARNING for production, INFO for test runs, DEBUG locally.
        """
        if self == self.PRODUCTION:
            return WARNING
        if self.is_test:
            return INFO
        return DEBUG
