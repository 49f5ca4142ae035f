import copy
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from django.conf import settings

from graphons.families import BaseGraphon, from_spec
from graphons.sampling import resolve_rho
from lggnn_lab.exceptions import ConfigError

from .serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    """Validated experiment document; build one with from_document or load."""

    name: str = "experiment"
    model: Optional[Dict[str, Any]] = None
    edge_list: Optional[str] = None
    n: int = 1000
    rho_mode: str = "one"
    L: int = 2
    d_policy: str = "auto"
    method: str = "lggnn_box"
    protocol: str = "in_sample"
    p: float = 0.2
    negatives: str = "all"
    preserve_connectivity: bool = False
    ks: List[int] = field(default_factory=lambda: [50, 100])
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3])
    output_dir: str = ""
    space: str = "box"
    box_bounds: Optional[List[float]] = None
    l1_radius: Optional[float] = None
    pls_components: Optional[int] = None
    gcn: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "ExperimentConfig":
        serializer = ExperimentConfigSerializer(data=document)
        if not serializer.is_valid():
            raise ConfigError(f"Invalid experiment config: {json.dumps(serializer.errors)}")
        return cls(**copy.deepcopy(dict(serializer.validated_data)))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Experiment config not found: {path}")
        try:
            with open(path) as fh:
                document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Experiment config {path} is not valid JSON: {exc}") from exc
        logger.info(f"Loaded experiment config {document.get('name', path.stem)} from {path}")
        return cls.from_document(document)

    def replace(self, **changes) -> "ExperimentConfig":
        """Validated copy with some fields changed."""
        document = self.to_dict()
        document.update(changes)
        return ExperimentConfig.from_document(document)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def is_synthetic(self) -> bool:
        return self.edge_list is None

    def graphon(self) -> BaseGraphon:
        if self.model is None:
            raise ConfigError(f"experiment {self.name} has no graphon model")
        return from_spec(self.model)

    def rho(self) -> float:
        return resolve_rho(self.rho_mode, self.n)

    def results_dir(self) -> Path:
        root = Path(self.output_dir) if self.output_dir else Path(settings.LGGNN_SETTINGS["OUTPUT_DIR"])
        return root / self.name

    def echo(self) -> Dict[str, Any]:
        """Flat config columns for CSV rows and report headers."""
        if self.is_synthetic:
            source = self.model.get("name") or self.model.get("kind")
        else:
            source = Path(self.edge_list).name
        return {
            "name": self.name,
            "graph": source,
            "n": self.n if self.is_synthetic else None,
            "rho_mode": self.rho_mode if self.is_synthetic else "empirical",
            "L": self.L,
            "d_policy": self.d_policy,
            "method": self.method,
            "protocol": self.protocol,
            "p": self.p,
        }


CONFIG_DIR = Path(__file__).resolve().parent / "configs"


def available_presets() -> List[str]:
    return sorted(path.stem for path in CONFIG_DIR.glob("*.json"))


def resolve_config(name_or_path) -> ExperimentConfig:
    """Load a bundled preset by name, or any config file by path."""
    candidate = Path(name_or_path)
    if candidate.suffix != ".json" and (CONFIG_DIR / f"{name_or_path}.json").exists():
        candidate = CONFIG_DIR / f"{name_or_path}.json"
    elif not candidate.exists():
        raise ConfigError(
            f"Experiment config {name_or_path} is neither a file nor a preset. "
            f"Presets: {', '.join(available_presets())}"
        )
    return ExperimentConfig.load(candidate)
