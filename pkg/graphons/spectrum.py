import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from lggnn_lab.exceptions import (
    ParameterError,
    SingularSystemError,
    UnsupportedModelError,
)

from .families import BaseGraphon, BlockGraphon, GeometricGraphon
from .sampling import make_generator

logger = logging.getLogger(__name__)

# Eigenvalues closer than this are the same eigenvalue
DEDUP_TOL = 1e-9
ZERO_TOL = 1e-12


@dataclass
class SpectralDecomposition:
    """Eigen-expansion W(x, y) = sum_r mu_r phi_r(x) phi_r(y) of a block graphon.

    eigenfunction_blocks[r, j] is phi_r on community interval j.
    """

    eigenvalues: np.ndarray
    eigenfunction_blocks: np.ndarray
    distinct_eigenvalues: np.ndarray
    multiplicities: np.ndarray

    @property
    def num_blocks(self) -> int:
        return self.eigenfunction_blocks.shape[1]

    @property
    def distinct_rank(self) -> int:
        return int(self.distinct_eigenvalues.size)

    @property
    def top_eigenvalue(self) -> float:
        return float(self.distinct_eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        phi = self.eigenfunction_blocks
        return (phi.T * self.eigenvalues) @ phi

    def moment_blocks(self, k: int) -> np.ndarray:
        """sum_r mu_r^k phi_r phi_r evaluated on block pairs."""
        phi = self.eigenfunction_blocks
        return (phi.T * self.eigenvalues ** k) @ phi

    def gram(self) -> np.ndarray:
        """Inner products of eigenfunctions under the equal-weight block measure."""
        phi = self.eigenfunction_blocks
        return phi @ phi.T / self.num_blocks


def distinct_values(values, tol: float = DEDUP_TOL):
    """Merge values within tol; returns (distinct, multiplicities) sorted by decreasing |value|."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, kind="stable")
    distinct, counts = [], []
    for value in values[order]:
        if distinct and abs(value - distinct[-1]) <= tol:
            counts[-1] += 1
        else:
            distinct.append(value)
            counts.append(1)
    distinct = np.array(distinct)
    counts = np.array(counts, dtype=int)
    order = np.argsort(-np.abs(distinct), kind="stable")
    return distinct[order], counts[order]


def sbm_spectrum(model: BaseGraphon) -> SpectralDecomposition:
    """Lift the eigenpairs of P to the graphon operator: mu = lambda / k, phi = sqrt(k) v."""
    if not isinstance(model, BlockGraphon):
        raise UnsupportedModelError(f"{model.kind} graphon has no block spectrum")
    P = model.P
    if not np.allclose(P, P.T, rtol=0.0, atol=1e-12):
        raise ParameterError("block matrix must be symmetric")
    if not model.equal_weights:
        raise UnsupportedModelError("spectrum is only available for equal community weights")

    k = model.num_blocks
    lam, vecs = scipy.linalg.eigh(P)
    keep = np.abs(lam) > ZERO_TOL
    lam, vecs = lam[keep], vecs[:, keep]
    order = np.lexsort((-lam, -np.abs(lam)))
    mu = lam[order] / k
    phi = np.sqrt(k) * vecs[:, order].T

    distinct, multiplicities = distinct_values(mu)
    return SpectralDecomposition(
        eigenvalues=mu,
        eigenfunction_blocks=phi,
        distinct_eigenvalues=distinct,
        multiplicities=multiplicities,
    )


@dataclass
class MomentValue:
    value: float
    std_error: float = 0.0
    exact: bool = True
    samples: int = 0

    def __float__(self):
        return self.value


def graphon_moment(
    model: BaseGraphon,
    k: int,
    x,
    y,
    rho: float = 1.0,
    mc_samples: Optional[int] = None,
    seed: int = 0,
    monte_carlo: bool = False,
) -> MomentValue:
    """W_n^(k)(x, y) = rho^k W^(k)(x, y).

    Block graphons are exact unless monte_carlo is set; other families are
    estimated from mc_samples chains of intermediate latents.
    """
    if k < 1:
        raise ParameterError(f"moment order must be >= 1, got {k}")
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"rho must lie in (0, 1], got {rho}")
    x = model.validate_latent(x)
    y = model.validate_latent(y)

    if isinstance(model, BlockGraphon) and not monte_carlo:
        blocks = model.block_moment_matrix(k)
        value = blocks[model.block_index(x), model.block_index(y)]
        return MomentValue(value=float(rho ** k * value))

    if k == 1:
        return MomentValue(value=rho * float(model.kernel(x, y)))
    if mc_samples is None:
        from django.conf import settings
        mc_samples = settings.LGGNN_SETTINGS["MC_SAMPLES"]
    if mc_samples <= 0:
        raise UnsupportedModelError(
            f"{model.kind} graphon has no exact moment; mc_samples must be positive"
        )

    rng = make_generator(np.random.SeedSequence(seed))
    path = np.ones(mc_samples)
    previous = None
    for _ in range(k - 1):
        current = model.sample_latents(mc_samples, rng)
        if previous is None:
            path *= _kernel_to_point(model, current, x)
        else:
            path *= _kernel_pairwise(model, previous, current)
        previous = current
    path *= _kernel_to_point(model, previous, y)

    estimate = float(path.mean())
    std_error = float(path.std(ddof=1) / np.sqrt(mc_samples))
    return MomentValue(
        value=rho ** k * estimate,
        std_error=rho ** k * std_error,
        exact=False,
        samples=mc_samples,
    )


def _kernel_to_point(model: BaseGraphon, points: np.ndarray, anchor) -> np.ndarray:
    if isinstance(model, GeometricGraphon):
        return (points @ anchor >= model.t).astype(float)
    return model.kernel(points, anchor)


def _kernel_pairwise(model: BaseGraphon, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    if isinstance(model, GeometricGraphon):
        return (np.einsum("ij,ij->i", left, right) >= model.t).astype(float)
    return model.kernel(left, right)


def beta_star(spec) -> np.ndarray:
    """Solve (mu_s^2, ..., mu_s^(m+1)) . beta = mu_s over the distinct eigenvalues.

    Accepts a SpectralDecomposition or a raw sequence of eigenvalues, which
    must already be distinct.
    """
    if isinstance(spec, SpectralDecomposition):
        mu = np.asarray(spec.distinct_eigenvalues, dtype=float)
    else:
        mu = np.asarray(spec, dtype=float).ravel()
    if mu.size == 0:
        raise ParameterError("beta_star needs at least one nonzero eigenvalue")
    if np.any(np.abs(mu) <= ZERO_TOL):
        raise SingularSystemError("zero eigenvalue in the Vandermonde system")
    gaps = np.abs(mu[:, None] - mu[None, :]) + np.eye(mu.size)
    if np.any(gaps <= DEDUP_TOL):
        raise SingularSystemError("duplicated eigenvalues make the Vandermonde system singular")

    m = mu.size
    system = mu[:, None] ** np.arange(2, m + 2)[None, :]
    try:
        beta = scipy.linalg.solve(system, mu)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Vandermonde system is singular: {exc}") from exc

    residual = float(np.max(np.abs(system @ beta - mu)))
    if residual > 1e-9 * float(np.max(np.abs(mu))):
        logger.warning(f"beta_star residual {residual:.3e} exceeds tolerance for m_W={m}")
    return beta


def graphon_eval(model: BaseGraphon, x, y) -> float:
    return model.evaluate(x, y)
