import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from graphons.spectrum import SpectralDecomposition, beta_star
from lggnn_lab.exceptions import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 2.0
COVER_MARGIN = 0.2
BOX = "box"
L1_BALL = "l1_ball"


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {x : ||x||_1 <= radius} by sorting magnitudes."""
    if np.sum(np.abs(v)) <= radius:
        return v.copy()
    u = np.sort(np.abs(v))[::-1]
    cssv = np.cumsum(u)
    index = np.arange(1, u.size + 1)
    rho = np.nonzero(u * index > (cssv - radius))[0][-1]
    theta = (cssv[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


@dataclass
class SearchSpace:
    """Feasible set F for the coefficient vector beta in R^(L+1).

    Box mode: beta_i in [-b_i / rho^i, b_i / rho^i], i = 1..L+1.
    l1 mode: ||beta||_1 <= radius.
    """

    num_coefficients: int
    mode: str = BOX
    rho: float = 1.0
    b: Optional[np.ndarray] = None
    radius: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_coefficients < 1:
            raise ParameterError("search space needs at least one coefficient")
        if not 0.0 < self.rho <= 1.0:
            raise ParameterError(f"rho must lie in (0, 1], got {self.rho}")
        if self.mode == BOX:
            b = np.full(self.num_coefficients, DEFAULT_BOUND) if self.b is None else np.asarray(self.b, dtype=float)
            if b.shape != (self.num_coefficients,) or np.any(b <= 0):
                raise ParameterError(f"box needs {self.num_coefficients} positive bounds, got {self.b}")
            self.b = b
        elif self.mode == L1_BALL:
            if self.radius is None or self.radius <= 0:
                raise ParameterError(f"l1 ball needs a positive radius, got {self.radius}")
            self.radius = float(self.radius)
        else:
            raise ParameterError(f"Unknown search space mode: {self.mode}")

    @classmethod
    def box(cls, num_coefficients: int, rho: float = 1.0, b=None,
            spectrum: Optional[SpectralDecomposition] = None) -> "SearchSpace":
        """Box bounds; with a spectrum, sized to cover beta* with a 20% margin."""
        metadata = {}
        if b is None and spectrum is not None:
            if spectrum.distinct_rank > num_coefficients:
                logger.warning(
                    f"beta* has {spectrum.distinct_rank} coefficients but the fit has "
                    f"{num_coefficients}; using default bounds"
                )
            else:
                target = beta_star(spectrum)
                b = np.full(num_coefficients, DEFAULT_BOUND)
                b[: target.size] = np.maximum((1.0 + COVER_MARGIN) * np.abs(target), 1e-8)
                metadata["covers_beta_star"] = True
        return cls(num_coefficients=num_coefficients, mode=BOX, rho=rho, b=b, metadata=metadata)

    @classmethod
    def l1_ball(cls, num_coefficients: int, rho: float = 1.0, radius: Optional[float] = None,
                spectrum: Optional[SpectralDecomposition] = None) -> "SearchSpace":
        """l1 ball; radius defaults to 1 / (mu_1 rho) when the spectrum is known."""
        if radius is None:
            if spectrum is None:
                raise ParameterError("l1 ball needs a radius or a spectrum")
            radius = 1.0 / (spectrum.top_eigenvalue * rho)
        return cls(num_coefficients=num_coefficients, mode=L1_BALL, rho=rho, radius=radius)

    @property
    def half_widths(self) -> np.ndarray:
        if self.mode != BOX:
            raise ParameterError("half widths are defined for box spaces only")
        powers = np.arange(1, self.num_coefficients + 1)
        return self.b / self.rho ** powers

    def project(self, beta: np.ndarray) -> np.ndarray:
        if self.mode == BOX:
            width = self.half_widths
            return np.clip(beta, -width, width)
        return project_l1_ball(beta, self.radius)

    def contains(self, beta: np.ndarray, tol: float = 1e-9) -> bool:
        if self.mode == BOX:
            return bool(np.all(np.abs(beta) <= self.half_widths * (1.0 + tol) + tol))
        return bool(np.sum(np.abs(beta)) <= self.radius + tol)

    def to_dict(self) -> Dict[str, Any]:
        record = {"mode": self.mode, "rho": self.rho}
        if self.mode == BOX:
            record["b"] = self.b.tolist()
            record["half_widths"] = self.half_widths.tolist()
        else:
            record["radius"] = self.radius
        record.update(self.metadata)
        return record
