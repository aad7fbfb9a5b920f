#
# Copyright (c) 2025 TUM Department of Electrical and Computer Engineering.
#
# This file is part of simulband.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""M-estimation engine.

Solves the stacked estimating equations ``sum_i g(O_i; theta) = 0`` with a damped Newton iteration and estimates
the empirical sandwich covariance ``B^-1 M B^-T / n`` of the root.

Estimating functions are vectorized over observations: ``g(data, theta)`` returns an ``(n, dim_theta)`` array whose
row ``i`` is ``g(O_i; theta)``.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from simulband.errors import InvalidArgument, NonConvergence, NonFiniteResidual, SingularJacobian
from simulband.logging import get_logger
from simulband.types import SolverStatus

logger = get_logger()

EPS = np.finfo(float).eps
CBRT_EPS = np.cbrt(EPS)
# reciprocal condition number below which the bread counts as singular
RCOND_LIMIT = 1e-13


@dataclass(frozen=True)
class EstimatingModel:
    """A stacked estimating function together with its parameter layout."""

    dim_theta: int
    g: Callable[[Any, np.ndarray], np.ndarray]
    interest_indices: Tuple[int, ...]
    initial_theta: np.ndarray
    names: Tuple[str, ...] = ()
    layout: Optional[Any] = None
    diagnose: Optional[Callable[[Any, np.ndarray], Dict[str, Any]]] = None

    def __post_init__(self):
        if self.dim_theta < 1:
            raise InvalidArgument("dim_theta must be positive")
        indices = tuple(int(i) for i in self.interest_indices)
        if len(indices) == 0:
            raise InvalidArgument("interest_indices must not be empty")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidArgument("interest_indices must be strictly increasing")
        if indices[0] < 0 or indices[-1] >= self.dim_theta:
            raise InvalidArgument("interest_indices out of bounds")
        object.__setattr__(self, "interest_indices", indices)
        initial = np.asarray(self.initial_theta, dtype=float).copy()
        if initial.shape != (self.dim_theta,):
            raise InvalidArgument(f"initial_theta must have shape ({self.dim_theta},), got {initial.shape}")
        initial.setflags(write=False)
        object.__setattr__(self, "initial_theta", initial)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"theta{i}" for i in range(self.dim_theta)))
        assert len(self.names) == self.dim_theta, "One name per parameter required"

    @property
    def interest_names(self) -> Tuple[str, ...]:
        return tuple(self.names[i] for i in self.interest_indices)

    def evaluate(self, data, theta: np.ndarray) -> np.ndarray:
        """Per-observation estimating functions, shape ``(n, dim_theta)``."""
        values = np.asarray(self.g(data, theta), dtype=float)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        assert values.shape[1] == self.dim_theta, f"g returned {values.shape[1]} columns, expected {self.dim_theta}"
        if not np.all(np.isfinite(values)):
            raise NonFiniteResidual("Estimating function produced NaN/inf (bad data or positivity violation?)")
        return values

    def mean_function(self, data) -> Callable[[np.ndarray], np.ndarray]:
        return lambda theta: self.evaluate(data, theta).mean(axis=0)


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-9
    max_iterations: int = 100
    max_halvings: int = 20
    # Newton steps below step_tolerance * (1 + |theta|) can no longer move the iterate
    step_tolerance: float = 1e-12

    @classmethod
    def from_settings(cls, settings):
        return cls(
            tolerance=settings.tolerance,
            max_iterations=settings.max_iterations,
            max_halvings=settings.max_halvings,
            step_tolerance=settings.step_tolerance,
        )


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    covariance: np.ndarray
    n: int
    root_norm: float
    iterations: int
    names: Tuple[str, ...] = ()
    interest_indices: Tuple[int, ...] = ()
    status: SolverStatus = SolverStatus.ROOT
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def block(self, indices: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Estimates and covariance restricted to ``indices``."""
        idx = np.asarray(indices, dtype=int)
        return self.theta_hat[idx].copy(), self.covariance[np.ix_(idx, idx)].copy()

    @property
    def interest(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.block(self.interest_indices)

    @property
    def interest_names(self) -> Tuple[str, ...]:
        return tuple(self.names[i] for i in self.interest_indices)

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def numerical_jacobian(f: Callable[[np.ndarray], np.ndarray], at, step: Optional[float] = None) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at ``at``.

    Parameters
    ----------
    f : Callable
        Vector function of a vector argument.
    at : array_like
        Evaluation point.
    step : float, optional
        Absolute step used for every coordinate. Defaults to ``cbrt(eps) * max(1, |at_j|)`` per coordinate.

    Returns
    -------
    jac : np.ndarray
        Matrix with ``jac[i, j] = d f_i / d x_j``.
    """
    x = np.atleast_1d(np.asarray(at, dtype=float))
    f0 = np.atleast_1d(np.asarray(f(x), dtype=float))
    if not np.all(np.isfinite(f0)):
        raise NonFiniteResidual("Function is not finite at the evaluation point")
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = step if step is not None else CBRT_EPS * max(1.0, abs(x[j]))
        x_hi = x.copy()
        x_lo = x.copy()
        x_hi[j] += h
        x_lo[j] -= h
        f_hi = np.atleast_1d(np.asarray(f(x_hi), dtype=float))
        f_lo = np.atleast_1d(np.asarray(f(x_lo), dtype=float))
        if not (np.all(np.isfinite(f_hi)) and np.all(np.isfinite(f_lo))):
            raise NonFiniteResidual(f"Function is not finite around coordinate {j}")
        jac[:, j] = (f_hi - f_lo) / (x_hi[j] - x_lo[j])
    return jac


def _check_invertible(matrix: np.ndarray, what: str):
    if matrix.size == 1:
        if abs(matrix[0, 0]) == 0.0:
            raise SingularJacobian(f"{what} is zero")
        return
    rcond = 1.0 / np.linalg.cond(matrix)
    if not np.isfinite(rcond) or rcond < RCOND_LIMIT:
        raise SingularJacobian(f"{what} is rank-deficient (rcond={rcond:.2e})")


def sandwich_covariance(model: EstimatingModel, data, theta_hat) -> np.ndarray:
    """Empirical sandwich covariance of the estimator, already scaled by ``1/n``."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    values = model.evaluate(data, theta_hat)
    n = values.shape[0]
    bread = -numerical_jacobian(model.mean_function(data), theta_hat)
    _check_invertible(bread, "Bread matrix")
    meat = values.T @ values / n
    bread_inv = scipy.linalg.inv(bread)
    cov = bread_inv @ meat @ bread_inv.T / n
    return (cov + cov.T) / 2.0


def _polish(mean_g, theta, residual, root_norm):
    """One extra Newton step from a converged point, kept unless it raises the residual.

    Linear estimating equations land within tolerance after one step but carry the rounding error of the
    finite-difference Jacobian. A second step removes it.
    """
    try:
        jac = numerical_jacobian(mean_g, theta)
        candidate = theta + scipy.linalg.solve(jac, -residual)
        cand_residual = mean_g(candidate)
    except (NonFiniteResidual, scipy.linalg.LinAlgError, ValueError):
        return theta, residual, root_norm
    cand_norm = float(np.max(np.abs(cand_residual)))
    if not np.all(np.isfinite(candidate)) or cand_norm > root_norm:
        return theta, residual, root_norm
    return candidate, cand_residual, cand_norm


def solve(model: EstimatingModel, data, options: Optional[SolverOptions] = None) -> FitResult:
    """Find the root of the stacked estimating equations and its sandwich covariance."""
    if options is None:
        options = SolverOptions()
    theta = model.initial_theta.copy()
    if not np.all(np.isfinite(theta)):
        raise InvalidArgument("initial_theta must be finite")
    mean_g = model.mean_function(data)
    n = model.evaluate(data, theta).shape[0]
    if n == 0:
        raise InvalidArgument("Cannot solve estimating equations without observations")

    residual = mean_g(theta)
    root_norm = float(np.max(np.abs(residual)))
    iterations = 0
    converged = root_norm <= options.tolerance
    converged_on = "root" if converged else None
    while not converged:
        if iterations >= options.max_iterations:
            raise NonConvergence("Iteration limit reached", root_norm, iterations)
        iterations += 1
        jac = numerical_jacobian(mean_g, theta)
        _check_invertible(jac, f"Jacobian at iteration {iterations}")
        step = scipy.linalg.solve(jac, -residual)
        scale = 1.0
        for _ in range(options.max_halvings + 1):
            candidate = theta + scale * step
            try:
                cand_residual = mean_g(candidate)
            except NonFiniteResidual:
                cand_residual = None
            if cand_residual is not None:
                cand_norm = float(np.max(np.abs(cand_residual)))
                if cand_norm < root_norm:
                    break
            scale /= 2.0
            logger.debug("Halving Newton step (iteration %d, scale %g)", iterations, scale)
        else:
            if np.max(np.abs(step)) <= options.step_tolerance * (1.0 + np.max(np.abs(theta))):
                converged, converged_on = True, "step"
                break
            raise NonConvergence("Step halving failed to reduce the residual", root_norm, iterations)
        small_step = np.max(np.abs(scale * step)) <= options.step_tolerance * (1.0 + np.max(np.abs(theta)))
        theta, residual, root_norm = candidate, cand_residual, cand_norm
        logger.debug("Newton iteration %d: root_norm=%.3e", iterations, root_norm)
        if root_norm <= options.tolerance:
            converged, converged_on = True, "root"
        elif small_step:
            converged, converged_on = True, "step"

    theta, residual, root_norm = _polish(mean_g, theta, residual, root_norm)
    if converged_on == "step":
        logger.debug("Converged on step size with root_norm=%.3e (tolerance %.1e)", root_norm, options.tolerance)
    covariance = sandwich_covariance(model, data, theta)
    status = SolverStatus(converged_on)
    diagnostics: Dict[str, Any] = {"converged_on": status.value}
    if model.diagnose is not None:
        diagnostics.update(model.diagnose(data, theta))
    theta.setflags(write=False)
    covariance.setflags(write=False)
    return FitResult(
        theta_hat=theta,
        covariance=covariance,
        n=n,
        root_norm=root_norm,
        iterations=iterations,
        names=model.names,
        interest_indices=model.interest_indices,
        status=status,
        diagnostics=diagnostics,
    )
