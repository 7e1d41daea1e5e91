from .config import get_config, Config

__all__ = ['get_config', 'Config']