"""Data models for experiment configurations and summary reports"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from lamlen.errors import InvalidConfigError
from lamlen.sampling import WINDOW_SCHEMES
from lamlen.stats import MomentEstimate

EXPERIMENTS = {
    "E1": "triangle-tangent",
    "E2": "farey-flow",
    "E3": "moments",
    "E4": "liouville-window",
    "E5": "discrete-currents",
}

# Window [a, b] used when none is given: the histogram range for E1 and E2,
# the quadrature range of the E3 histogram, the sampling window of E4 and the
# restriction window of E5.
DEFAULT_WINDOWS = {
    "E1": (0.0, 6.0),
    "E2": (0.05, 6.0),
    "E3": (0.05, 6.0),
    "E4": (0.5, 2.0),
    "E5": (0.2, 4.0),
}

DEFAULT_THRESHOLDS = {
    "ks_tangent": 0.005,
    "mean_tangent": 0.003,
    "ks_window": 0.01,
    "sector_mass": 0.02,
    "ks_flow_length": 0.02,
    "ks_flow_count": 0.02,
    "ks_currents": 0.05,
    "moment_rel": 1e-10,
    "additivity_rel": 1e-9,
}


@dataclass
class ExperimentConfig:
    """Parameters of one experiment run"""

    experiment: str
    samples: int = 100_000
    length_budget: float = 1e5
    window: Optional[Tuple[float, float]] = None
    bins: int = 60
    seed: int = 42
    output_dir: str = "lamlen-out"
    jobs: int = 1
    chunk_size: int = 100_000
    proposals: int = 1_000_000
    geodesics: int = 1
    words: int = 100
    word_length: int = 30
    step_budget: int = 10**7
    quad_tolerance: float = 1e-12
    scheme: str = "log"
    raw: bool = False
    thresholds: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def __post_init__(self):
        self.experiment = str(self.experiment).upper()
        if self.window is None:
            self.window = DEFAULT_WINDOWS.get(self.experiment, (0.05, 6.0))
        self.window = tuple(float(x) for x in self.window)
        self.thresholds = {**DEFAULT_THRESHOLDS, **(self.thresholds or {})}

    @property
    def name(self) -> str:
        return EXPERIMENTS[self.experiment]

    def validate(self) -> "ExperimentConfig":
        """Raise InvalidConfigError when the run cannot be carried out"""
        if self.experiment not in EXPERIMENTS:
            raise InvalidConfigError(f"Unknown experiment '{self.experiment}' (expected one of {', '.join(EXPERIMENTS)})")

        a, b = self.window
        if not a < b:
            raise InvalidConfigError(f"Window needs a < b, got [{a}, {b}]")
        if a < 0 or (a == 0 and self.experiment != "E1"):
            raise InvalidConfigError(f"Window for {self.experiment} must start above 0, got {a}")
        if self.bins < 10:
            raise InvalidConfigError(f"At least 10 bins are needed, got {self.bins}")
        if self.jobs < 1 or self.chunk_size < 1:
            raise InvalidConfigError("jobs and chunk_size must be positive")
        if self.scheme not in WINDOW_SCHEMES:
            raise InvalidConfigError(f"Unknown window scheme '{self.scheme}'")

        budgets = {
            "E1": {"samples": self.samples},
            "E2": {"length_budget": self.length_budget, "geodesics": self.geodesics, "step_budget": self.step_budget},
            "E3": {},
            "E4": {"samples": self.samples, "proposals": self.proposals},
            "E5": {"words": self.words, "step_budget": self.step_budget},
        }[self.experiment]
        for key, value in budgets.items():
            if not value > 0:
                raise InvalidConfigError(f"{key} must be positive, got {value}")
        if self.experiment == "E5" and self.word_length < 2:
            raise InvalidConfigError(f"word_length must be at least 2, got {self.word_length}")

        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise InvalidConfigError(f"Unknown thresholds: {', '.join(sorted(unknown))}")
        return self

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "samples": self.samples,
            "length_budget": self.length_budget,
            "window": list(self.window),
            "bins": self.bins,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "jobs": self.jobs,
            "chunk_size": self.chunk_size,
            "proposals": self.proposals,
            "geodesics": self.geodesics,
            "words": self.words,
            "word_length": self.word_length,
            "step_budget": self.step_budget,
            "quad_tolerance": self.quad_tolerance,
            "scheme": self.scheme,
            "raw": self.raw,
            "thresholds": dict(self.thresholds),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = data.copy()
        if data.get("window") is not None:
            data["window"] = tuple(data["window"])
        try:
            return cls(**data)
        except TypeError as e:
            raise InvalidConfigError(f"Invalid experiment parameters: {e}") from None


@dataclass(frozen=True)
class Criterion:
    """One pass/fail check of a report: |value - target| (or value itself) against a threshold"""

    name: str
    value: float
    threshold: float
    target: Optional[float] = None
    relative: bool = False

    @property
    def distance(self) -> float:
        if self.target is None:
            return abs(self.value)
        gap = abs(self.value - self.target)
        if self.relative and self.target != 0:
            gap /= abs(self.target)
        return gap

    @property
    def passed(self) -> bool:
        return self.distance <= self.threshold


def _number(x: Optional[float]) -> Optional[str]:
    return None if x is None else repr(float(x))


@dataclass
class SummaryReport:
    experiment: str
    seed: int
    observations: int
    criteria: List[Criterion] = field(default_factory=list)
    moments: List[MomentEstimate] = field(default_factory=list)
    extras: Dict[str, float] = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def criterion(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        """Flat mapping in a fixed key order; every number also appears as its repr string.

        The runtime is left out so that two runs of the same configuration
        produce identical files.
        """
        out: Dict[str, Any] = {
            "experiment": self.experiment,
            "name": EXPERIMENTS.get(self.experiment, ""),
            "seed": self.seed,
            "observations": self.observations,
            "passed": self.passed,
        }
        for c in self.criteria:
            out[f"{c.name}.value"] = float(c.value)
            out[f"{c.name}.value_str"] = _number(c.value)
            out[f"{c.name}.target"] = None if c.target is None else float(c.target)
            out[f"{c.name}.target_str"] = _number(c.target)
            out[f"{c.name}.threshold"] = float(c.threshold)
            out[f"{c.name}.threshold_str"] = _number(c.threshold)
            out[f"{c.name}.passed"] = c.passed
        for m in self.moments:
            key = f"moment_{m.order}"
            out[f"{key}.estimate"] = float(m.estimate)
            out[f"{key}.estimate_str"] = _number(m.estimate)
            out[f"{key}.stderr"] = float(m.stderr)
            out[f"{key}.stderr_str"] = _number(m.stderr)
            out[f"{key}.target"] = None if m.target is None else float(m.target)
            out[f"{key}.target_str"] = _number(m.target)
        for name, value in self.extras.items():
            out[name] = float(value)
            out[f"{name}_str"] = _number(value)
        return out
