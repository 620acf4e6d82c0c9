import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from lamlen.errors import InvalidConfigError
from lamlen.models import EXPERIMENTS

logger = logging.getLogger(__name__)

PRESET_KEYS = {
    "samples",
    "length_budget",
    "window",
    "bins",
    "proposals",
    "geodesics",
    "words",
    "word_length",
    "scheme",
    "chunk_size",
}


@dataclass
class Preset:
    """Named bundle of per-experiment parameters"""

    name: str
    category: str
    description: str
    experiments: Dict[str, Dict[str, Any]]
    version: str


class PresetManager:
    """Load experiment presets from YAML files"""

    def __init__(self, presets_dir: Optional[Path] = None):
        self.presets_dir = presets_dir or Path(__file__).parent / "presets"
        self._presets: Dict[str, Preset] = {}
        self._load_presets()

    def _validate_preset_data(self, data: dict) -> bool:
        if not isinstance(data, dict):
            return False

        for required in ("version", "description", "experiments"):
            if required not in data:
                return False

        experiments = data["experiments"]
        if not isinstance(experiments, dict):
            return False
        for experiment, params in experiments.items():
            if experiment not in EXPERIMENTS or not isinstance(params, dict):
                return False
            if not set(params) <= PRESET_KEYS:
                return False
            window = params.get("window")
            if window is not None and (not isinstance(window, list) or len(window) != 2):
                return False

        return True

    def _load_presets(self) -> None:
        if not self.presets_dir.exists():
            return

        for yaml_file in sorted(self.presets_dir.glob("*.yaml")):
            try:
                with open(yaml_file, "r") as f:
                    data = yaml.safe_load(f)
            except (OSError, yaml.YAMLError) as e:
                logger.debug("skipping unreadable preset %s: %s", yaml_file.name, e)
                continue

            if not self._validate_preset_data(data):
                logger.debug("skipping invalid preset %s", yaml_file.name)
                continue

            self._presets[yaml_file.stem] = Preset(
                name=yaml_file.stem,
                category=data.get("category", "general"),
                description=data["description"],
                experiments=data["experiments"],
                version=str(data["version"]),
            )

    def list_presets(self) -> List[Preset]:
        return sorted(self._presets.values(), key=lambda p: p.name)

    def get_preset(self, name: str) -> Optional[Preset]:
        return self._presets.get(name)

    def parameters(self, name: str, experiment: str) -> Dict[str, Any]:
        """Parameters a preset pins for one experiment (empty if it pins none)"""
        preset = self.get_preset(name)
        if preset is None:
            available = ", ".join(p.name for p in self.list_presets()) or "none"
            raise InvalidConfigError(f"Preset '{name}' not found (available: {available})")
        params = dict(preset.experiments.get(experiment.upper(), {}))
        if "window" in params:
            params["window"] = tuple(params["window"])
        return params
