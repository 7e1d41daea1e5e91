"""
Base service class that provides common functionality for all services
"""
import logging
from typing import Any, Optional

from src.config import get_config
from src.utils.file_manager import FileManager

logger = logging.getLogger(__name__)


class BaseService:
    """Base service class with common functionality."""

    def __init__(self, file_manager: Optional[FileManager] = None):
        """Initialize the base service."""
        self.config = get_config()
        self.file_manager = file_manager or FileManager()

    def setting(self, key: str, override: Any = None) -> Any:
        """
        Resolve a setting, preferring an explicit caller value.

        Args:
            key: The configuration key
            override: Value supplied by the caller; used when not None

        Returns:
            The effective value
        """
        if override is not None:
            return override
        return self.config.get(key)
