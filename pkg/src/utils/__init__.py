from .logger import get_logger
from .file_manager import FileManager, dumps_json
from .rng import make_rng, spawn_rngs

__all__ = ['get_logger', 'FileManager', 'dumps_json', 'make_rng', 'spawn_rngs']
