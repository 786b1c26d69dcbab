from functools import lru_cache
from pathlib import Path

import yaml

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / 'config' / 'config.yaml'


@lru_cache(maxsize=None)
def _load(path):
    with open(path, 'r', encoding='utf-8') as handle:
        return yaml.safe_load(handle) or {}


def load_config(path=None):
    """
    Load the YAML configuration.

    Args:
        path (str or Path, optional): Config file. Defaults to config/config.yaml in the package.

    Returns:
        dict: Parsed configuration (shared, do not mutate).
    """
    return _load(str(path or DEFAULT_CONFIG_PATH))
