import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from scipy.special import betainc
from scipy.optimize import brentq

from lggnn_lab.exceptions import ParameterError, UnsupportedModelError

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parent / "presets"

# Atol used when checking symmetry and [0,1] ranges of supplied matrices
MATRIX_ATOL = 1e-12


def _check_unit_interval(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")
    return value


class BaseGraphon:
    """A symmetric kernel W: [0,1]^2 -> [0,1] and its latent mechanism."""

    kind: str = ""

    def __init__(self, delta_w: Optional[float] = None):
        if delta_w is not None and not 0.0 < delta_w <= 0.5:
            raise ParameterError(f"delta_w must lie in (0, 1/2], got {delta_w}")
        self.delta_w = delta_w

    # -- latents -----------------------------------------------------------
    def sample_latents(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 1.0, size=n)

    def validate_latent(self, x) -> float:
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise ParameterError(f"latent {x} outside [0, 1]")
        return x

    # -- kernel ------------------------------------------------------------
    def kernel(self, x, y) -> np.ndarray:
        """Vectorised W(x, y) without range checks."""
        raise NotImplementedError("Subclasses must implement kernel method")

    def kernel_row(self, latents: np.ndarray, i: int) -> np.ndarray:
        """W(omega_i, omega_j) for every j > i."""
        return self.kernel(latents[i], latents[i + 1:])

    def evaluate(self, x, y) -> float:
        x = self.validate_latent(x)
        y = self.validate_latent(y)
        return float(self.kernel(x, y))

    def communities(self, latents: np.ndarray) -> Optional[np.ndarray]:
        return None

    # -- capabilities ------------------------------------------------------
    @property
    def has_block_structure(self) -> bool:
        return False

    def check_margin(self, grid_size: int = 64) -> None:
        """Verify delta_w <= W <= 1 - delta_w on a probe grid."""
        if self.delta_w is None:
            return
        probes = (np.arange(grid_size) + 0.5) / grid_size
        xx, yy = np.meshgrid(probes, probes, indexing="ij")
        values = self.kernel(xx.ravel(), yy.ravel())
        low, high = float(np.min(values)), float(np.max(values))
        if low < self.delta_w - MATRIX_ATOL or high > 1.0 - self.delta_w + MATRIX_ATOL:
            raise ParameterError(
                f"{self.kind} graphon violates declared margin delta_w={self.delta_w}: "
                f"values span [{low:.4f}, {high:.4f}]"
            )

    def to_spec(self) -> Dict[str, Any]:
        spec = {"kind": self.kind}
        if self.delta_w is not None:
            spec["delta_w"] = self.delta_w
        return spec

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.to_spec().items() if k != "kind")
        return f"{self.__class__.__name__}({params})"


class BlockGraphon(BaseGraphon):
    """Piecewise-constant graphon over community intervals.

    Community j occupies [c_{j-1}, c_j) where c are the cumulative weights;
    the last interval is closed at 1.
    """

    kind = "sbm"

    def __init__(self, P, weights=None, delta_w: Optional[float] = None):
        super().__init__(delta_w=delta_w)
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ParameterError(f"block matrix must be square, got shape {P.shape}")
        if not np.allclose(P, P.T, rtol=0.0, atol=MATRIX_ATOL):
            raise ParameterError("block matrix must be symmetric")
        if np.any(P < -MATRIX_ATOL) or np.any(P > 1.0 + MATRIX_ATOL):
            raise ParameterError("block probabilities must lie in [0, 1]")
        self.P = np.clip((P + P.T) / 2.0, 0.0, 1.0)
        k = self.P.shape[0]

        if weights is None:
            weights = np.full(k, 1.0 / k)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (k,) or np.any(weights <= 0):
            raise ParameterError("weights must be k positive community probabilities")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ParameterError(f"community weights must sum to 1, got {weights.sum()}")
        self.weights = weights
        self._starts = np.concatenate([[0.0], np.cumsum(weights)[:-1]])
        self.check_margin()

    @property
    def num_blocks(self) -> int:
        return self.P.shape[0]

    @property
    def has_block_structure(self) -> bool:
        return True

    @property
    def equal_weights(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.num_blocks, rtol=0.0, atol=1e-12))

    def block_index(self, x) -> np.ndarray:
        """Left-closed interval lookup; x = 1 falls in the last block."""
        idx = np.searchsorted(self._starts, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, self.num_blocks - 1)

    def communities(self, latents: np.ndarray) -> np.ndarray:
        return self.block_index(latents)

    def kernel(self, x, y) -> np.ndarray:
        return self.P[self.block_index(x), self.block_index(y)]

    def kernel_row(self, latents: np.ndarray, i: int) -> np.ndarray:
        blocks = self.block_index(latents)
        return self.P[blocks[i], blocks[i + 1:]]

    def check_margin(self, grid_size: int = 64) -> None:
        if self.delta_w is None:
            return
        low, high = float(self.P.min()), float(self.P.max())
        if low < self.delta_w - MATRIX_ATOL or high > 1.0 - self.delta_w + MATRIX_ATOL:
            raise ParameterError(
                f"block matrix violates declared margin delta_w={self.delta_w}: "
                f"values span [{low:.4f}, {high:.4f}]"
            )

    def block_moment_matrix(self, k: int) -> np.ndarray:
        """k-th moment between blocks: (P D)^(k-1) P with D = diag(weights)."""
        if k < 1:
            raise ParameterError(f"moment order must be >= 1, got {k}")
        weighted = self.P * self.weights[np.newaxis, :]
        return np.linalg.matrix_power(weighted, k - 1) @ self.P

    def to_spec(self) -> Dict[str, Any]:
        spec = super().to_spec()
        spec["P"] = self.P.tolist()
        if not self.equal_weights:
            spec["weights"] = self.weights.tolist()
        return spec


class ConstantGraphon(BlockGraphon):
    kind = "constant"

    def __init__(self, p: float, delta_w: Optional[float] = None):
        self.p = _check_unit_interval(p, "p")
        super().__init__([[self.p]], delta_w=delta_w)

    def to_spec(self) -> Dict[str, Any]:
        spec = BaseGraphon.to_spec(self)
        spec["p"] = self.p
        return spec


class SymmetricSBM(BlockGraphon):
    """k equal communities, intra probability p and inter probability q."""

    kind = "ssbm"

    def __init__(self, k: int, p: float, q: float, delta_w: Optional[float] = None):
        if int(k) < 1:
            raise ParameterError(f"community count must be >= 1, got {k}")
        self.k = int(k)
        self.p = _check_unit_interval(p, "p")
        self.q = _check_unit_interval(q, "q")
        P = np.full((self.k, self.k), self.q)
        np.fill_diagonal(P, self.p)
        super().__init__(P, delta_w=delta_w)

    def to_spec(self) -> Dict[str, Any]:
        spec = BaseGraphon.to_spec(self)
        spec.update({"k": self.k, "p": self.p, "q": self.q})
        return spec


class PiecewiseGraphon(BlockGraphon):
    """m x m grid of values on equal-width intervals."""

    kind = "piecewise"

    def __init__(self, grid, delta_w: Optional[float] = None):
        super().__init__(grid, delta_w=delta_w)

    def to_spec(self) -> Dict[str, Any]:
        spec = BaseGraphon.to_spec(self)
        spec["grid"] = self.P.tolist()
        return spec


class GeometricGraphon(BaseGraphon):
    """Threshold kernel 1{<X_i, X_j> >= t} on uniform points of S^(d-1)."""

    kind = "geometric"

    def __init__(self, d: int, t: float, delta_w: Optional[float] = None):
        if delta_w is not None:
            raise ParameterError("geometric graphon takes values 0 and 1; no margin can hold")
        super().__init__(delta_w=None)
        if int(d) < 2:
            raise ParameterError(f"sphere dimension must be >= 2, got {d}")
        if not -1.0 <= float(t) <= 1.0:
            raise ParameterError(f"threshold must lie in [-1, 1], got {t}")
        self.d = int(d)
        self.t = float(t)

    @classmethod
    def with_density(cls, d: int, density: float) -> "GeometricGraphon":
        """Pick the threshold whose marginal connection probability is density."""
        if not 0.0 < density < 1.0:
            raise ParameterError(f"density must lie in (0, 1), got {density}")
        t = brentq(lambda s: connection_probability(d, s) - density, -1.0, 1.0)
        return cls(d, t)

    def sample_latents(self, n: int, rng: np.random.Generator) -> np.ndarray:
        points = rng.standard_normal((n, self.d))
        return points / np.linalg.norm(points, axis=1, keepdims=True)

    def validate_latent(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ParameterError(f"geometric latent must have dimension {self.d}, got shape {x.shape}")
        if abs(np.linalg.norm(x) - 1.0) > 1e-9:
            raise ParameterError("geometric latent must lie on the unit sphere")
        return x

    def kernel(self, x, y) -> np.ndarray:
        return (np.asarray(y) @ np.asarray(x) >= self.t).astype(float)

    def kernel_row(self, latents: np.ndarray, i: int) -> np.ndarray:
        return (latents[i + 1:] @ latents[i] >= self.t).astype(float)

    def evaluate(self, x, y) -> float:
        x = self.validate_latent(x)
        y = self.validate_latent(y)
        return float(x @ y >= self.t)

    @property
    def connection_probability(self) -> float:
        return connection_probability(self.d, self.t)

    def to_spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "d": self.d, "t": self.t}


def connection_probability(d: int, t: float) -> float:
    """P(<X, Y> >= t) for independent uniform X, Y on S^(d-1).

    (1 + <X, Y>) / 2 is Beta((d-1)/2, (d-1)/2) distributed.
    """
    a = (d - 1) / 2.0
    return float(betainc(a, a, (1.0 - t) / 2.0))


GRAPHON_FAMILIES = {
    "constant": ConstantGraphon,
    "ssbm": SymmetricSBM,
    "sbm": BlockGraphon,
    "piecewise": PiecewiseGraphon,
    "geometric": GeometricGraphon,
}


def from_spec(spec: Dict[str, Any]) -> BaseGraphon:
    """Build a graphon from a flat spec document such as the bundled presets."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    spec.pop("name", None)
    spec.pop("description", None)
    if kind not in GRAPHON_FAMILIES:
        raise UnsupportedModelError(
            f"Unknown graphon kind: {kind}. Available: {', '.join(GRAPHON_FAMILIES)}"
        )
    try:
        return GRAPHON_FAMILIES[kind](**spec)
    except TypeError as exc:
        raise ParameterError(f"Invalid parameters for {kind} graphon: {exc}") from exc


def list_presets():
    return sorted(path.stem for path in PRESET_DIR.glob("*.json"))


def load_graphon_spec(name_or_path) -> Dict[str, Any]:
    """Resolve a preset name or a JSON file path to a spec document."""
    path = Path(name_or_path)
    if not path.suffix:
        path = PRESET_DIR / f"{name_or_path}.json"
    if not path.exists():
        raise FileNotFoundError(
            f"Graphon spec not found: {path}. Presets: {', '.join(list_presets())}"
        )
    with open(path) as fh:
        spec = json.load(fh)
    logger.info(f"Loaded graphon spec {spec.get('kind')} from {path}")
    return spec


def load_graphon(name_or_path) -> BaseGraphon:
    return from_spec(load_graphon_spec(name_or_path))
