"""
Directory-backed store for loop tables and JSON documents.

A store is a root directory; collections are subdirectories. Tables are
LOOPTAB v1 files (``<name>.tab``), documents are JSON (``<name>.json``)
written with sorted keys so identical content gives identical bytes.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import structlog

from .errors import StoreError

logger = structlog.get_logger()

TABLE_SUFFIX = ".tab"
DOCUMENT_SUFFIX = ".json"


def dump_json(data: Any) -> str:
    """Canonical JSON text used for every report the package writes."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_json(data))
    except OSError as e:
        logger.error("Failed to write document", path=str(path), error=str(e))
        raise StoreError(f"cannot write {path}: {e}") from e
    return path


class LoopStore:
    """Wrapper for table and document persistence under one root directory."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        logger.debug("Loop store initialized", root=str(self.root))

    def _path(self, collection: str, name: str, suffix: str) -> Path:
        return self.root / collection / f"{name}{suffix}"

    def write_table(self, collection: str, name: str, Q) -> Path:
        """Write a loop table, replacing any previous one with the same name."""
        from ..loop_core import write_looptab

        path = self._path(collection, name, TABLE_SUFFIX)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            write_looptab(Q, path)
            logger.info("Table written", collection=collection, name=name, order=Q.n)
            return path
        except OSError as e:
            logger.error("Failed to write table", collection=collection,
                         name=name, error=str(e))
            raise StoreError(f"cannot write table {collection}/{name}: {e}") from e

    def write_document(self, collection: str, name: str, data: Dict[str, Any]) -> Path:
        path = write_json(self._path(collection, name, DOCUMENT_SUFFIX), data)
        logger.info("Document written", collection=collection, name=name)
        return path

    def read_document(self, collection: str, name: str) -> Optional[Dict[str, Any]]:
        """Get a document by name; None if missing or unreadable."""
        path = self._path(collection, name, DOCUMENT_SUFFIX)
        try:
            if path.exists():
                return json.loads(path.read_text())
            return None
        except (OSError, json.JSONDecodeError) as e:
            logger.error("Failed to read document", collection=collection,
                         name=name, error=str(e))
            return None

    def delete(self, collection: str, name: str) -> bool:
        """Delete a table and/or document of this name."""
        removed = False
        for suffix in (TABLE_SUFFIX, DOCUMENT_SUFFIX):
            path = self._path(collection, name, suffix)
            try:
                if path.exists():
                    path.unlink()
                    removed = True
            except OSError as e:
                logger.error("Failed to delete", collection=collection,
                             name=name, error=str(e))
                return False
        if removed:
            logger.info("Entry deleted", collection=collection, name=name)
        return removed
