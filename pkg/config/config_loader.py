"""
Layered configuration for mfem-lumped

``config.yaml`` holds the defaults, ``<environment>.yaml`` overlays them and
``MFEM_*`` environment variables win over both. Values are read with
dot paths such as ``solver.cg_tol``.
"""

import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import yaml

logger = logging.getLogger(__name__)

BASE_FILE = 'config.yaml'
DEFAULT_ENVIRONMENT = 'development'


def _to_bool(text: str) -> bool:
    return text.strip().lower() in ('1', 'true', 'yes', 'on')


class EnvOverride(NamedTuple):
    """An environment variable mapped onto a configuration path"""
    variable: str
    path: str
    convert: Callable[[str], Any] = str


ENV_OVERRIDES: List[EnvOverride] = [
    EnvOverride('MFEM_CG_TOL', 'solver.cg_tol', float),
    EnvOverride('MFEM_CG_MIN_ITERATIONS', 'solver.min_iterations', int),
    EnvOverride('MFEM_DENSE_LIMIT', 'solver.dense_limit', int),
    EnvOverride('MFEM_DATABASE_URL', 'database.url'),
    EnvOverride('MFEM_DATABASE_ENABLED', 'database.enabled', _to_bool),
    EnvOverride('MFEM_RESULTS_DIR', 'study.results_dir'),
    EnvOverride('MFEM_LOG_LEVEL', 'logging.root.level', str.upper),
]


def merge_layers(lower: Dict[str, Any], upper: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive merge; mappings are merged key by key, anything else in ``upper`` replaces"""
    merged = dict(lower)
    for key, value in upper.items():
        below = merged.get(key)
        if isinstance(below, dict) and isinstance(value, dict):
            merged[key] = merge_layers(below, value)
        else:
            merged[key] = value
    return merged


class ConfigLoader:
    """Reads the configuration layers of one environment"""

    def __init__(self, config_dir: Optional[Path] = None):
        """
        Args:
            config_dir: Directory holding the YAML files (this package directory if omitted)
        """
        self.config_dir = Path(config_dir) if config_dir else Path(__file__).parent
        self.config: Dict[str, Any] = {}
        self.environment: Optional[str] = None
        self._loaded = False

    def load(self, environment: Optional[str] = None) -> Dict[str, Any]:
        """
        Build the configuration of an environment

        A loaded configuration is returned as is unless an environment is named.

        Args:
            environment: Overlay name (``MFEM_ENV`` or development if omitted)

        Returns:
            Merged configuration mapping
        """
        if self._loaded and environment is None:
            return self.config

        environment = environment or os.getenv('MFEM_ENV', DEFAULT_ENVIRONMENT)
        config = self._read_layer(BASE_FILE, required=True)
        config = merge_layers(config, self._read_layer(f"{environment}.yaml", required=False))

        self.config = config
        self._apply_overrides()
        self.environment = environment
        self._loaded = True
        logger.debug(f"Configuration loaded for '{environment}' from {self.config_dir}")
        return self.config

    def reload(self, environment: Optional[str] = None) -> Dict[str, Any]:
        self._loaded = False
        return self.load(environment)

    def get(self, path: str, default: Any = None) -> Any:
        """
        Look up a dot path such as ``database.url``

        Args:
            path: Dot-separated keys
            default: Returned when any key along the path is missing

        Returns:
            The configured value or ``default``
        """
        if not self._loaded:
            self.load()

        node: Any = self.config
        for key in path.split('.'):
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def _read_layer(self, filename: str, required: bool) -> Dict[str, Any]:
        path = self.config_dir / filename
        if not path.exists():
            if required:
                logger.error(f"Configuration file not found: {path}")
            else:
                logger.info(f"No overlay {filename}, using base configuration")
            return {}

        try:
            data = yaml.safe_load(path.read_text(encoding='utf-8'))
        except yaml.YAMLError as e:
            logger.error(f"Ignoring unreadable configuration {path}: {e}")
            return {}
        if data is None:
            return {}
        if not isinstance(data, dict):
            logger.error(f"Ignoring {path}: top level must be a mapping")
            return {}
        return data

    def _apply_overrides(self):
        for override in ENV_OVERRIDES:
            raw = os.getenv(override.variable)
            if raw is None:
                continue
            try:
                value = override.convert(raw)
            except (TypeError, ValueError):
                logger.warning(f"Ignoring {override.variable}={raw!r}: not a valid value")
                continue
            self._assign(override.path, value)

    def _assign(self, path: str, value: Any):
        *parents, leaf = path.split('.')
        node = self.config
        for key in parents:
            child = node.get(key)
            if not isinstance(child, dict):
                child = node[key] = {}
            node = child
        node[leaf] = value


# Global configuration instance
_config: Optional[ConfigLoader] = None


def get_config() -> ConfigLoader:
    """Shared loader used by ``app.config``"""
    global _config
    if _config is None:
        _config = ConfigLoader()
    return _config
