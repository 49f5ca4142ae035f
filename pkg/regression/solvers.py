import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.linalg
from django.conf import settings
from sklearn.cross_decomposition import PLSRegression

from graphons.graphs import PairSet, SampledGraph
from lggnn.estimators import MomentEstimates
from lggnn_lab.exceptions import EmptyDataError, ParameterError

from .space import BOX, SearchSpace
from .stats import PairFilter, SufficientStats, design_matrix

logger = logging.getLogger(__name__)

BOX_PG = "box_pg"
PLS = "pls"
RIDGE_FACTOR = 1e-10
MAX_STEP_HALVINGS = 60
DEFAULT_PLS_COMPONENTS = 3


@dataclass
class RegressionFit:
    """Coefficients beta-hat for p-hat_ij = <beta, q-hat_ij> (+ intercept for PLS)."""

    beta: np.ndarray
    space: Optional[SearchSpace]
    objective: float
    iterations: int
    converged: bool
    method: str
    intercept: float = 0.0
    components: Optional[int] = None
    warnings: List[str] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def beta_hat(self) -> np.ndarray:
        return self.beta

    @property
    def num_coefficients(self) -> int:
        return int(self.beta.size)

    def to_record(self) -> Dict[str, Any]:
        return {
            "method": self.method if self.components is None else f"{self.method}({self.components})",
            "beta": self.beta.tolist(),
            "intercept": self.intercept,
            "bounds": None if self.space is None else self.space.to_dict(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }


def _power_iteration(matrix: np.ndarray, iterations: int = 200) -> float:
    vector = np.ones(matrix.shape[0]) / np.sqrt(matrix.shape[0])
    for _ in range(iterations):
        product = matrix @ vector
        norm = np.linalg.norm(product)
        if norm == 0.0:
            return 0.0
        vector = product / norm
    return float(vector @ matrix @ vector)


def _floor_gram(gram: np.ndarray, warnings: List[str]) -> np.ndarray:
    gram = (gram + gram.T) / 2.0
    eigenvalues, eigenvectors = scipy.linalg.eigh(gram)
    if eigenvalues.min() >= 0.0:
        return gram
    scale = max(float(np.max(np.abs(eigenvalues))), 1e-300)
    if eigenvalues.min() < -1e-12 * scale:
        warnings.append("non_psd_gram")
        logger.warning(f"Gram matrix has eigenvalue {eigenvalues.min():.3e}; flooring at 0")
    return (eigenvectors * np.maximum(eigenvalues, 0.0)) @ eigenvectors.T


def _solve(matrix: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    try:
        solution, *_ = scipy.linalg.lstsq(matrix, rhs)
    except (scipy.linalg.LinAlgError, ValueError):
        return None
    return solution


def _refine_face(beta, gradient, hessian, linear, space: SearchSpace) -> Optional[np.ndarray]:
    """Exact minimizer on the face of F that beta currently occupies, projected back."""
    if space.mode == BOX:
        width = space.half_widths
        at_upper = (beta >= width * (1.0 - 1e-12)) & (gradient < 0)
        at_lower = (beta <= -width * (1.0 - 1e-12)) & (gradient > 0)
        free = ~(at_upper | at_lower)
        if not free.any():
            return None
        fixed = ~free
        rhs = linear[free] - hessian[np.ix_(free, fixed)] @ beta[fixed]
        solution = _solve(hessian[np.ix_(free, free)], rhs)
        if solution is None:
            return None
        candidate = beta.copy()
        candidate[free] = solution
        return space.project(candidate)

    if np.sum(np.abs(beta)) < space.radius * (1.0 - 1e-12):
        solution = _solve(hessian, linear)
        return None if solution is None else space.project(solution)
    support = np.abs(beta) > 0
    signs = np.sign(beta[support])
    size = int(support.sum())
    kkt = np.zeros((size + 1, size + 1))
    kkt[:size, :size] = hessian[np.ix_(support, support)]
    kkt[:size, size] = signs
    kkt[size, :size] = signs
    solution = _solve(kkt, np.append(linear[support], space.radius))
    if solution is None:
        return None
    candidate = np.zeros_like(beta)
    candidate[support] = solution[:size]
    return space.project(candidate)


def fit_box_constrained(stats: SufficientStats, space: SearchSpace,
                        tol: Optional[float] = None,
                        max_iter: Optional[int] = None) -> RegressionFit:
    """Minimize (beta^T G beta - 2 beta^T c + s) / N over the search space.

    Projected gradient with step 1 / lambda_max; each accepted step is
    followed by an exact solve on the current face, kept only when it lowers
    the objective. A ridge of 1e-10 times the mean diagonal of G / N picks
    the minimum-norm minimizer among ties.
    """
    tol = settings.LGGNN_SETTINGS["PG_TOL"] if tol is None else tol
    max_iter = settings.LGGNN_SETTINGS["PG_MAX_ITER"] if max_iter is None else max_iter
    if stats.pair_count == 0:
        raise EmptyDataError("no training pairs were accumulated")
    if space.num_coefficients != stats.num_features:
        raise ParameterError(
            f"search space has {space.num_coefficients} coefficients, statistics have {stats.num_features}"
        )

    warnings: List[str] = []
    scaled = _floor_gram(stats.gram, warnings) / stats.pair_count
    linear = 2.0 * stats.cross / stats.pair_count
    constant = stats.target_ss / stats.pair_count
    ridge = RIDGE_FACTOR * float(np.mean(np.diag(scaled)))
    hessian = 2.0 * scaled + 2.0 * ridge * np.eye(stats.num_features)

    def penalized(beta):
        return float(beta @ scaled @ beta - beta @ linear + constant + ridge * beta @ beta)

    threshold = tol * max(float(np.linalg.norm(linear)), 1e-300)
    lipschitz = _power_iteration(hessian)
    diagnostics = {"ridge": ridge, "lambda_max": lipschitz, "threshold": threshold, "step_halvings": 0}

    if lipschitz <= 0.0:
        beta = space.project(np.zeros(stats.num_features))
        return RegressionFit(
            beta=beta, space=space, objective=stats.objective(beta), iterations=0,
            converged=True, method=BOX_PG, warnings=warnings, diagnostics=diagnostics,
        )

    step = 1.0 / (1.05 * lipschitz)
    start = _solve(hessian, linear)
    beta = space.project(np.zeros(stats.num_features) if start is None else start)
    value = penalized(beta)
    converged = False
    iterations = 0
    mapped_norm = np.inf

    while True:
        gradient = hessian @ beta - linear
        mapped_norm = float(np.linalg.norm(beta - space.project(beta - step * gradient)) / step)
        if mapped_norm <= threshold:
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1

        slack = 1e-12 * (abs(value) + constant) + 1e-300
        candidate = space.project(beta - step * gradient)
        candidate_value = penalized(candidate)
        while candidate_value > value + slack and diagnostics["step_halvings"] < MAX_STEP_HALVINGS:
            step /= 2.0
            diagnostics["step_halvings"] += 1
            candidate = space.project(beta - step * gradient)
            candidate_value = penalized(candidate)
        if candidate_value > value + slack:
            warnings.append("objective_stalled")
            logger.warning(f"Projected gradient stalled after {iterations} iterations")
            break

        refined = _refine_face(candidate, hessian @ candidate - linear, hessian, linear, space)
        if refined is not None:
            refined_value = penalized(refined)
            if refined_value <= candidate_value:
                candidate, candidate_value = refined, refined_value
        beta, value = candidate, candidate_value

    diagnostics["projected_gradient_norm"] = mapped_norm
    diagnostics["step"] = step
    if not converged:
        logger.warning(
            f"Projected gradient stopped at {iterations} iterations with gradient-map norm {mapped_norm:.3e}"
        )
    fit = RegressionFit(
        beta=beta, space=space, objective=stats.objective(beta), iterations=iterations,
        converged=converged, method=BOX_PG, warnings=warnings, diagnostics=diagnostics,
    )
    logger.info(
        f"Box fit on {stats.pair_count} pairs: beta={np.round(beta, 6).tolist()} "
        f"objective={fit.objective:.6f} iterations={iterations}"
    )
    return fit


def fit_pls_design(features: np.ndarray, targets: np.ndarray, components: int) -> RegressionFit:
    """PLS1 on a materialized design; columns and response centred, not scaled."""
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float).ravel()
    if features.ndim != 2 or features.shape[0] != targets.size:
        raise ParameterError(f"design {features.shape} does not match {targets.size} responses")
    num_features = features.shape[1]
    if not 1 <= components <= num_features:
        raise ParameterError(f"PLS components must lie in 1..{num_features}, got {components}")

    warnings: List[str] = []
    varying = np.ptp(features, axis=0) > 0
    if not varying.all():
        dropped = np.flatnonzero(~varying).tolist()
        warnings.append(f"zero_variance_columns:{dropped}")
        logger.warning(f"PLS design columns {dropped} have zero variance; their loadings are 0")

    beta = np.zeros(num_features)
    target_mean = float(targets.mean())
    used = 0
    if np.ptp(targets) > 0 and varying.any():
        used = min(components, int(varying.sum()))
        if used < components:
            warnings.append(f"components_reduced:{used}")
        model = PLSRegression(n_components=used, scale=False)
        model.fit(features[:, varying], targets)
        beta[varying] = np.asarray(model.coef_, dtype=float).reshape(-1)
    intercept = target_mean - float(features.mean(axis=0) @ beta)

    residual = features @ beta + intercept - targets
    return RegressionFit(
        beta=beta, space=None, objective=float(np.mean(residual ** 2)), iterations=used,
        converged=True, method=PLS, intercept=intercept, components=components,
        warnings=warnings,
    )


def fit_pls(moments: MomentEstimates, graph: SampledGraph, components: Optional[int] = None,
            pair_filter: PairFilter = None) -> RegressionFit:
    if components is None:
        components = min(DEFAULT_PLS_COMPONENTS, moments.num_features)
    if not 1 <= components <= moments.num_features:
        raise ParameterError(
            f"PLS components must lie in 1..{moments.num_features}, got {components}"
        )
    features, targets = design_matrix(moments, graph, pair_filter)
    fit = fit_pls_design(features, targets, components)
    logger.info(
        f"PLS fit with {components} components on {targets.size} pairs: "
        f"beta={np.round(fit.beta, 6).tolist()} intercept={fit.intercept:.6f}"
    )
    return fit


def predict(fit: RegressionFit, moments: MomentEstimates, pairs: Optional[PairSet] = None,
            clamp: bool = False) -> np.ndarray:
    """p-hat_ij = <beta-hat, q-hat_ij> + intercept, unclipped unless clamp is set.

    Without pairs the result is a symmetric n x n matrix with a zero diagonal.
    """
    if fit.num_coefficients != moments.num_features:
        raise ParameterError(
            f"fit has {fit.num_coefficients} coefficients, moments provide {moments.num_features} orders"
        )
    if pairs is None:
        scores = np.triu(np.tensordot(fit.beta, moments.values, axes=1) + fit.intercept, k=1)
        scores = scores + scores.T
    else:
        scores = moments.features_for(pairs) @ fit.beta + fit.intercept
    return np.clip(scores, 0.0, 1.0) if clamp else scores


def threshold_edges(p_hat: np.ndarray, gamma: float, pairs: Optional[PairSet] = None) -> PairSet:
    """Predicted edge set {(i, j) : p-hat_ij >= gamma}."""
    if np.isnan(gamma):
        raise ParameterError("threshold must not be NaN")
    p_hat = np.asarray(p_hat, dtype=float)
    if pairs is not None:
        if p_hat.shape != (len(pairs),):
            raise ParameterError(f"{p_hat.shape} scores for {len(pairs)} pairs")
        return pairs.select(p_hat >= gamma)
    if p_hat.ndim != 2 or p_hat.shape[0] != p_hat.shape[1]:
        raise ParameterError("p_hat must be a square matrix when no pairs are given")
    n = p_hat.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    keep = p_hat[rows, cols] >= gamma
    return PairSet(rows[keep], cols[keep], n)
