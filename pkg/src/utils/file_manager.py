import hashlib
import json
import shutil
from datetime import datetime
from typing import Dict, Any, Optional, Union
from pathlib import Path

from src.config.config import OUTPUT_DIR
from src.utils.exceptions import IoFailure
from .logger import get_logger

logger = get_logger()

CATEGORIES = ('results', 'reports', 'responses')


class FileManager:
    def __init__(self, base_dir: Optional[Union[str, Path]] = None):
        """
        Initialize FileManager

        Args:
            base_dir: Base directory for generated files. Defaults to OUTPUT_DIR.
        """
        self.base_dir = Path(base_dir) if base_dir is not None else Path(OUTPUT_DIR)
        self.dirs = {category: self.base_dir / category for category in CATEGORIES}

    def resolve(self, filename: Union[str, Path], category: Optional[str] = None) -> Path:
        """
        Map a user-supplied name to a path.

        Absolute paths and paths with a directory part are used as given;
        bare file names go into the category directory.
        """
        path = Path(filename)
        if category is None or path.is_absolute() or path.parent != Path('.'):
            return path
        if category not in self.dirs:
            raise ValueError(f"Invalid category: {category}")
        return self.dirs[category] / path

    def _backup(self, filepath: Path) -> None:
        backup_dir = filepath.parent / 'backups'
        backup_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        backup_path = backup_dir / f"{filepath.stem}_{timestamp}{filepath.suffix}"
        shutil.copy2(filepath, backup_path)
        logger.info(f"Created backup: {backup_path}")

    def save_text(self, text: str, filename: Union[str, Path], category: Optional[str] = None,
                  backup: bool = True) -> Path:
        """
        Write a text document, keeping a backup of any file it replaces.

        Args:
            text: Content to write
            filename: Target name or path
            category: Category directory for bare names (results, reports, responses)
            backup: Copy an existing file to backups/ before overwriting

        Returns:
            Path: Path of the written file
        """
        filepath = self.resolve(filename, category)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            if backup and filepath.exists():
                self._backup(filepath)
            with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
        except OSError as e:
            raise IoFailure(f"cannot write {filepath}: {e.strerror or e}") from e
        logger.info(f"Saved data to: {filepath}")
        return filepath

    def save_json(self, data: Dict[str, Any], filename: Union[str, Path], category: Optional[str] = None,
                  backup: bool = True) -> Path:
        """Deterministic JSON (sorted keys, 2-space indent, trailing newline)."""
        return self.save_text(dumps_json(data), filename, category, backup)

    def load_text(self, filename: Union[str, Path]) -> str:
        filepath = Path(filename)
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                return f.read()
        except OSError as e:
            raise IoFailure(f"cannot read {filepath}: {e.strerror or e}") from e

    def load_json(self, filename: Union[str, Path]) -> Any:
        """
        Load a JSON document

        Args:
            filename: Path of the file

        Returns:
            Parsed JSON value
        """
        text = self.load_text(filename)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise IoFailure(f"{filename} is not valid JSON: {e.msg} at line {e.lineno}") from e
        logger.debug(f"Loaded data from {filename}")
        return data

    def digest(self, filename: Union[str, Path]) -> str:
        """sha256 of a file's bytes, for run manifests."""
        sha = hashlib.sha256()
        try:
            with open(filename, 'rb') as f:
                for chunk in iter(lambda: f.read(65536), b''):
                    sha.update(chunk)
        except OSError as e:
            raise IoFailure(f"cannot read {filename}: {e.strerror or e}") from e
        return f"sha256:{sha.hexdigest()}"


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'
