import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import psutil

from lamlen.errors import InvalidConfigError
from lamlen.models import DEFAULT_THRESHOLDS

ENV_OUTPUT_DIR = "LAMLEN_OUT"


def _default_jobs() -> int:
    return psutil.cpu_count(logical=False) or 1


class Config:
    """Manage lamlen defaults: output location, seed, budgets and pass thresholds"""

    DEFAULT_CONFIG = {
        "output_dir": "./lamlen-out",
        "seed": 42,
        "jobs": None,  # physical core count
        "chunk_size": 100_000,
        "step_budget": 10**7,
        "vertex_tolerance": 1e-12,
        "quad_tolerance": 1e-12,
        "window_scheme": "log",
        "thresholds": dict(DEFAULT_THRESHOLDS),
    }

    def __init__(self, config_dir: Optional[Path] = None):
        self.config_dir = config_dir or Path.home() / ".lamlen"
        self.config_path = self.config_dir / "config.json"
        self.config = self.load()

    def defaults(self) -> Dict[str, Any]:
        config = {**self.DEFAULT_CONFIG, "thresholds": dict(DEFAULT_THRESHOLDS)}
        config["jobs"] = _default_jobs()
        return config

    def load(self) -> Dict[str, Any]:
        """Load configuration from file; thresholds are merged key by key"""
        config = self.defaults()
        if self.config_path.exists():
            try:
                with open(self.config_path, "r") as f:
                    user_config = json.load(f)
                thresholds = {**config["thresholds"], **user_config.pop("thresholds", {})}
                config.update(user_config)
                config["thresholds"] = thresholds
            except (OSError, ValueError, TypeError, AttributeError):
                return self.defaults()
        return config

    def save(self) -> None:
        self.config_dir.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w") as f:
            json.dump(self.config, f, indent=2)

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value; LAMLEN_OUT takes precedence for output_dir"""
        if key == "output_dir" and os.environ.get(ENV_OUTPUT_DIR):
            return os.environ[ENV_OUTPUT_DIR]
        if key.startswith("thresholds."):
            return self.config["thresholds"].get(key.split(".", 1)[1], default)
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set a known key, converting `value` to the type of its default"""
        if key.startswith("thresholds."):
            name = key.split(".", 1)[1]
            if name not in DEFAULT_THRESHOLDS:
                raise InvalidConfigError(f"Unknown threshold '{name}'")
            self.config["thresholds"][name] = self._coerce(key, value, float)
        elif key in self.DEFAULT_CONFIG and key != "thresholds":
            default = self.DEFAULT_CONFIG[key]
            kind = int if default is None else type(default)
            self.config[key] = self._coerce(key, value, kind)
        else:
            raise InvalidConfigError(f"Unknown configuration key '{key}'")
        self.save()

    @staticmethod
    def _coerce(key: str, value: Any, kind: type) -> Any:
        try:
            if kind is int:
                try:
                    return int(value)
                except ValueError:
                    return int(float(value))
            return kind(value)
        except (TypeError, ValueError):
            raise InvalidConfigError(f"Invalid value {value!r} for '{key}'") from None

    @property
    def thresholds(self) -> Dict[str, float]:
        return dict(self.config["thresholds"])
