from pathlib import Path
from typing import override

from distractipy.adapters.session_store.ports import SessionStorePort
from distractipy.models.dtos.session_dtos import SessionDTO
from distractipy.models.errors import NotFoundError, SessionFormatError


class SessionStoreMock(SessionStorePort):
    """An in-memory session store for tests; sessions are keyed by path."""

    def __init__(self) -> None:
        self.sessions: dict[Path, SessionDTO] = {}

    @override
    def load_session(self, path: Path) -> SessionDTO:
        if path not in self.sessions:
            raise SessionFormatError(file_name="manifest.json", reason="manifest missing")
        return self.sessions[path]

    @override
    def save_session(self, session: SessionDTO, path: Path) -> None:
        self.sessions[path] = session

    @override
    def list_sessions(self, root: Path) -> list[Path]:
        found = sorted(path for path in self.sessions if path == root or root in path.parents)
        if not found:
            raise NotFoundError(resource_type=str(root))
        return found
