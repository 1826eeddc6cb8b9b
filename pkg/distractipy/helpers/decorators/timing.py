import functools
import logging
import time
from collections.abc import Callable
from typing import Any, TypeVar, cast

F = TypeVar("F", bound=Callable[..., Any])

logger = logging.getLogger(__name__)


def timing_decorator(func: F) -> F:
    """Log the wall-clock duration of a pipeline stage at DEBUG level.

    The clock only runs when DEBUG is enabled for this module's logger, so wrapped
    stages cost nothing extra in normal runs.

    Args:
        func (Callable): The stage to time, for instance per-session extraction.

    Returns:
        Callable: The wrapped function.

    Example:
        ```python
        @timing_decorator
        def observe_session(session: SessionDTO) -> SessionObservationsDTO: ...
        ```

        Output (with DEBUG enabled):
        ```
        DEBUG distractipy.helpers.decorators.timing observe_session took 3.2174 seconds to execute.
        ```
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        if not logger.isEnabledFor(logging.DEBUG):
            return func(*args, **kwargs)
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        logger.debug("%s took %.4f seconds to execute.", func.__qualname__, time.perf_counter() - start_time)
        return result

    return cast(F, wrapper)
