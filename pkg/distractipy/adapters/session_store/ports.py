"""Session store port definitions."""

from abc import abstractmethod
from pathlib import Path

from distractipy.models.dtos.session_dtos import SessionDTO


class SessionStorePort:
    """Interface for reading and writing recorded driving sessions.

    A session lives in its own directory; a corpus is a directory tree holding any
    number of session directories.
    """

    @abstractmethod
    def load_session(self, path: Path) -> SessionDTO:
        """Load and validate the session stored at ``path``."""
        raise NotImplementedError

    @abstractmethod
    def save_session(self, session: SessionDTO, path: Path) -> None:
        """Write ``session`` to ``path``, replacing whatever session was there."""
        raise NotImplementedError

    @abstractmethod
    def list_sessions(self, root: Path) -> list[Path]:
        """List the session directories below ``root`` in sorted order.

        Args:
            root: A session directory or a corpus directory.

        Returns:
            Sorted session directory paths.
        """
        raise NotImplementedError
