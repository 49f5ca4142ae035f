"""Risk functionals for fitted or candidate coefficient vectors."""

import logging
import math

import numpy as np

from graphons.families import BlockGraphon
from graphons.graphs import SampledGraph
from graphons.spectrum import SpectralDecomposition, beta_star, sbm_spectrum
from lggnn.estimators import MomentEstimates
from lggnn_lab.exceptions import EmptyDataError, ParameterError, UnsupportedModelError

from .solvers import RegressionFit
from .stats import PairFilter, iter_pair_blocks, pair_scores

logger = logging.getLogger(__name__)


def _as_spectrum(spec) -> SpectralDecomposition:
    if isinstance(spec, SpectralDecomposition):
        return spec
    if isinstance(spec, BlockGraphon):
        return sbm_spectrum(spec)
    raise UnsupportedModelError(
        f"exact risk needs a block model spectrum, got {type(spec).__name__}"
    )


def population_risk_sbm(spec, beta, rho: float = 1.0) -> float:
    """R(beta) = sum_s mult_s (rho mu_s - sum_r beta_r (rho mu_s)^(r+1))^2."""
    spectrum = _as_spectrum(spec)
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"rho must lie in (0, 1], got {rho}")
    beta = np.asarray(beta, dtype=float).ravel()
    scaled = rho * spectrum.distinct_eigenvalues
    powers = scaled[:, None] ** np.arange(2, beta.size + 2)[None, :]
    deviation = scaled - powers @ beta
    return float(np.sum(spectrum.multiplicities * deviation ** 2))


def gen_error_bound(spec, L: int) -> float:
    """Truncation error of keeping the first k = L+1 moments of the beta* expansion.

    sqrt(sum_s [sum_{r=k}^{m_W} beta*_r (mu_s^(r+1) - mu_s^(k+1))]^2) over the
    distinct eigenvalues; zero once k >= m_W.
    """
    if L < 0:
        raise ParameterError(f"layer count must be >= 0, got {L}")
    spectrum = _as_spectrum(spec)
    k = L + 1
    m = spectrum.distinct_rank
    if k >= m:
        return 0.0
    target = beta_star(spectrum)
    mu = spectrum.distinct_eigenvalues
    orders = np.arange(k, m + 1)
    terms = target[orders - 1][None, :] * (mu[:, None] ** (orders + 1)[None, :] - mu[:, None] ** (k + 1))
    return math.sqrt(float(np.sum(terms.sum(axis=1) ** 2)))


def empirical_risk(beta_or_fit, moments: MomentEstimates, graph: SampledGraph,
                   pair_filter: PairFilter = None, intercept: float = 0.0) -> float:
    """Mean of (<beta, q-hat_ij> + intercept - a_ij)^2 over accepted pairs."""
    if isinstance(beta_or_fit, RegressionFit):
        beta, intercept = beta_or_fit.beta, beta_or_fit.intercept
    else:
        beta = np.asarray(beta_or_fit, dtype=float).ravel()
    if moments.n != graph.n:
        raise ParameterError(f"moments cover {moments.n} vertices, graph has {graph.n}")

    total, count = 0.0, 0
    for rows, cols in iter_pair_blocks(graph.n, pair_filter):
        residual = pair_scores(beta, moments, rows, cols, intercept) - graph.has_edge(rows, cols)
        total += float(residual @ residual)
        count += rows.size
    if count == 0:
        raise EmptyDataError("pair filter accepted no pairs")
    return total / count
