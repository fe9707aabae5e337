"""Filesystem path helpers for program and corpus files."""

from __future__ import annotations

from pathlib import Path

from ..errors import VerifierError


def verify_path_exists(path: str | Path) -> tuple[bool, str]:
    """Verify a path exists and is a readable file."""
    try:
        p = Path(path)
        if p.is_file():
            return True, str(p)

        # Case-insensitive filesystems may report a differently spelled name.
        parent = p.parent
        if parent.is_dir():
            for child in parent.iterdir():
                if child.name.lower() == p.name.lower() and child.is_file():
                    return True, str(child)

        return False, f"Path not found: {path}"
    except OSError as exc:  # pragma: no cover
        return False, f"Path verification error: {exc}"


def read_source(path: str | Path) -> str:
    """Read a UTF-8 source file, raising a usage error when it is missing."""
    found, resolved = verify_path_exists(path)
    if not found:
        raise VerifierError(resolved)
    try:
        return Path(resolved).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise VerifierError(f"{path} is not valid UTF-8: {exc}") from exc
