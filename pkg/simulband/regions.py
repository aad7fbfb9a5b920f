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
"""Confidence regions for parameter vectors.

Pointwise Wald intervals, Bonferroni and sup-t confidence bands (all of the form ``theta +- c * SE`` with a shared
critical value ``c``) and Wald confidence ellipsoids, all constructed from a point estimate and its covariance.
"""
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.stats import chi2, norm

from simulband.errors import (
    InvalidArgument,
    NegativeVariance,
    NonPsdCovariance,
    RegionOrderingError,
    SingularCovariance,
)
from simulband.estimators.predict import GridPrediction
from simulband.logging import get_logger
from simulband.types import BandKind
from simulband.utils import NUM_THREADS, resolve_seed

logger = get_logger()

DEFAULT_DRAWS = 10000
MIN_DRAWS = 1000
# cap on the number of standardized values held per Monte Carlo chunk
CHUNK_ELEMENTS = 2_000_000
MAX_CHUNK_DRAWS = 20000
ORDERING_SLACK = 0.01
CLIP_WARN_RATIO = 1e-8
CLIP_FAIL_RATIO = 1e-6
SYMMETRY_RTOL = 1e-8
# correlations are rounded to this many decimals so c * cov and cov factor identically
CORR_DECIMALS = 12


@dataclass(frozen=True)
class IntervalSet:
    """Per-parameter intervals sharing one critical value."""

    kind: BandKind
    critical_value: float
    estimate: np.ndarray
    standard_errors: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    names: Tuple[str, ...] = ()

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def k(self) -> int:
        return len(self.estimate)

    def contains(self, point) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all((self.lower <= point) & (point <= self.upper)))

    def covers(self, point) -> np.ndarray:
        """Per-coordinate coverage indicators."""
        point = np.asarray(point, dtype=float)
        return (self.lower <= point) & (point <= self.upper)


@dataclass(frozen=True)
class Ellipsoid:
    """Wald region ``{theta : (theta - center)^T V^-1 (theta - center) <= chisq_radius}``."""

    center: np.ndarray
    covariance: np.ndarray
    chisq_radius: float
    alpha: float
    boundary: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return len(self.center)

    @property
    def radius(self) -> float:
        return math.sqrt(self.chisq_radius)

    def mahalanobis_sq(self, point) -> float:
        diff = np.asarray(point, dtype=float) - self.center
        return float(diff @ scipy.linalg.solve(self.covariance, diff, assume_a="pos"))

    def contains(self, point) -> bool:
        return self.mahalanobis_sq(point) <= self.chisq_radius

    @property
    def volume(self) -> float:
        k = self.k
        unit_ball = math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)
        return unit_ball * self.chisq_radius ** (k / 2.0) * math.sqrt(np.linalg.det(self.covariance))

    @property
    def area(self) -> float:
        assert self.k == 2, "area is only defined for 2-dimensional ellipsoids"
        return self.volume


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")


def _as_cov(cov) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1]:
        raise InvalidArgument(f"Covariance must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise NonPsdCovariance("Covariance contains NaN/inf")
    return cov


def standard_errors(cov) -> np.ndarray:
    """Square roots of the variances; round-off negatives are clipped, real negatives raise."""
    cov = _as_cov(cov)
    variances = np.diag(cov).copy()
    scale = max(1.0, float(np.max(np.abs(variances)))) if variances.size else 1.0
    if np.any(variances < -1e-12 * scale):
        raise NegativeVariance(f"Negative variance on the diagonal: {variances[variances < 0]}")
    return np.sqrt(np.clip(variances, 0.0, None))


def pointwise_critical(alpha: float) -> float:
    _check_alpha(alpha)
    return float(norm.ppf(1.0 - alpha / 2.0))


def bonferroni_critical(k: int, alpha: float) -> float:
    """Two-sided normal quantile at ``1 - alpha / (2k)``."""
    if k < 1:
        raise InvalidArgument(f"k must be at least 1, got {k}")
    _check_alpha(alpha)
    return float(norm.ppf(1.0 - alpha / (2.0 * k)))


def band(theta, cov, critical_value: float, kind: BandKind = BandKind.SUPT, names: Sequence[str] = ()) -> IntervalSet:
    """``theta +- c * SE`` elementwise."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    se = standard_errors(cov)
    if se.shape != theta.shape:
        raise InvalidArgument(f"theta {theta.shape} and covariance {se.shape} do not match")
    if critical_value < 0:
        raise InvalidArgument(f"Critical value must be non-negative, got {critical_value}")
    half = critical_value * se
    return IntervalSet(
        kind=BandKind(kind),
        critical_value=float(critical_value),
        estimate=theta,
        standard_errors=se,
        lower=theta - half,
        upper=theta + half,
        names=tuple(names),
    )


def wald_intervals(theta, cov, alpha: float, names: Sequence[str] = ()) -> IntervalSet:
    return band(theta, cov, pointwise_critical(alpha), kind=BandKind.POINTWISE, names=names)


def mvn_factor(cov) -> np.ndarray:
    """Matrix ``L`` with ``L L^T = cov``.

    Uses the Cholesky factor when it exists. Otherwise negative eigenvalues are clipped to zero and only the
    directions with non-null variance are kept, so ``L`` may have fewer columns than rows.
    """
    cov = _as_cov(cov)
    scale = float(np.max(np.abs(cov))) if cov.size else 0.0
    if scale == 0.0:
        return np.zeros((cov.shape[0], 0))
    if not np.allclose(cov, cov.T, rtol=SYMMETRY_RTOL, atol=SYMMETRY_RTOL * scale):
        raise NonPsdCovariance("Covariance is not symmetric")
    try:
        return scipy.linalg.cholesky(cov, lower=True)
    except scipy.linalg.LinAlgError:
        pass
    eigvals, eigvecs = scipy.linalg.eigh((cov + cov.T) / 2.0)
    max_eig = float(eigvals[-1])
    min_eig = float(eigvals[0])
    if max_eig <= 0.0 or min_eig < -CLIP_FAIL_RATIO * max_eig:
        raise NonPsdCovariance(f"Covariance is not positive semi-definite (eigenvalues in [{min_eig}, {max_eig}])")
    if min_eig < -CLIP_WARN_RATIO * max_eig:
        logger.warning("Clipping negative eigenvalue %.3e (max eigenvalue %.3e)", min_eig, max_eig)
    keep = eigvals > max_eig * cov.shape[0] * np.finfo(float).eps
    return eigvecs[:, keep] * np.sqrt(eigvals[keep])


def _chunk_maxima(factor: np.ndarray, draws: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    z = rng.standard_normal((draws, factor.shape[1]))
    return np.max(np.abs(z @ factor.T), axis=1)


def supt_maxima(corr: np.ndarray, m: int, seed: int, parallel: Optional[int] = None) -> np.ndarray:
    """Maxima of absolute standardized multivariate normal draws.

    Draws are split into fixed-size chunks, each with its own spawned seed, so the result does not depend on the
    number of worker threads.
    """
    factor = mvn_factor(corr)
    k = corr.shape[0]
    if factor.shape[1] == 0:
        return np.zeros(m)
    chunk = max(1, min(MAX_CHUNK_DRAWS, CHUNK_ELEMENTS // k))
    sizes = [chunk] * (m // chunk)
    if m % chunk:
        sizes.append(m % chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = parallel if parallel is not None else NUM_THREADS
    if workers <= 1 or len(sizes) == 1:
        maxima = [_chunk_maxima(factor, size, child) for size, child in zip(sizes, children)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            maxima = list(executor.map(lambda args: _chunk_maxima(factor, *args), zip(sizes, children)))
    return np.concatenate(maxima)


def empirical_quantile(values: np.ndarray, level: float) -> float:
    """Order statistic at index ``ceil(level * m)`` (1-based) of ``values``."""
    m = len(values)
    index = int(math.ceil(round(level * m, 9))) - 1
    index = min(max(index, 0), m - 1)
    return float(np.partition(values, index)[index])


def supt_critical_value(
    cov,
    alpha: float,
    m: int = DEFAULT_DRAWS,
    seed: Optional[int] = None,
    parallel: Optional[int] = None,
    warn_few_draws: bool = True,
) -> float:
    """Monte Carlo sup-t critical value.

    1. draw ``delta_j ~ N(0, cov)`` for ``j = 1..m``,
    2. divide each draw by the standard errors ``sqrt(diag(cov))`` and keep ``max |delta_j'|``,
    3. return the ``(1 - alpha)`` empirical quantile of the maxima.

    Standardizing first means the draws come from the correlation matrix, rounded to ``CORR_DECIMALS`` places, so
    rescaling ``cov`` by a positive scalar leaves the result bit-identical. Coordinates with zero variance contribute
    nothing to the maximum.
    """
    _check_alpha(alpha)
    if m < MIN_DRAWS:
        raise InvalidArgument(f"m must be at least {MIN_DRAWS}, got {m}")
    if m < DEFAULT_DRAWS and warn_few_draws:
        logger.warning("Only %d Monte Carlo draws for the sup-t critical value, consider m >= %d", m, DEFAULT_DRAWS)
    cov = _as_cov(cov)
    se = standard_errors(cov)
    k = len(se)
    if k == 1:
        return pointwise_critical(alpha)
    active = se > 0.0
    if not np.all(active):
        logger.warning("%d coordinate(s) with zero variance excluded from the sup-t maximum", int(np.sum(~active)))
    if not np.any(active):
        return pointwise_critical(alpha)
    sub_cov = cov[np.ix_(active, active)]
    sub_se = se[active]
    corr = np.round(sub_cov / np.outer(sub_se, sub_se), CORR_DECIMALS)
    np.fill_diagonal(corr, 1.0)
    maxima = supt_maxima(corr, m, resolve_seed(seed), parallel=parallel)
    return empirical_quantile(maxima, 1.0 - alpha)


def critical_value(
    kind: Union[BandKind, str],
    cov,
    alpha: float,
    m: int = DEFAULT_DRAWS,
    seed: Optional[int] = None,
    parallel: Optional[int] = None,
) -> float:
    kind = BandKind(kind)
    if kind == BandKind.POINTWISE:
        return pointwise_critical(alpha)
    if kind == BandKind.BONFERRONI:
        return bonferroni_critical(_as_cov(cov).shape[0], alpha)
    return supt_critical_value(cov, alpha, m=m, seed=seed, parallel=parallel)


def check_ordering(bands: Dict[BandKind, IntervalSet], slack: float = ORDERING_SLACK):
    """pointwise <= sup-t <= Bonferroni critical values, up to Monte Carlo slack."""
    z = bands[BandKind.POINTWISE].critical_value
    c_supt = bands[BandKind.SUPT].critical_value
    c_bonf = bands[BandKind.BONFERRONI].critical_value
    if not (z - slack <= c_supt <= c_bonf + slack and z <= c_bonf):
        raise RegionOrderingError(
            f"Critical values out of order: pointwise={z:.4f}, sup-t={c_supt:.4f}, bonferroni={c_bonf:.4f}"
        )


def construct_bands(
    theta,
    cov,
    alpha: float,
    m: int = DEFAULT_DRAWS,
    seed: Optional[int] = None,
    parallel: Optional[int] = None,
    names: Sequence[str] = (),
) -> Dict[BandKind, IntervalSet]:
    """All three interval kinds for one (theta, cov, alpha) triple, ordering checked."""
    bands = {
        kind: band(theta, cov, critical_value(kind, cov, alpha, m=m, seed=seed, parallel=parallel), kind, names)
        for kind in BandKind
    }
    check_ordering(bands)
    return bands


def ellipsoid(theta, cov, alpha: float, n_boundary_points: int = 360) -> Ellipsoid:
    """Wald confidence ellipsoid; for two parameters the boundary is emitted as a closed polyline."""
    _check_alpha(alpha)
    center = np.atleast_1d(np.asarray(theta, dtype=float))
    cov = _as_cov(cov)
    k = len(center)
    if k < 2:
        raise InvalidArgument("An ellipsoid needs at least two parameters")
    if cov.shape != (k, k):
        raise InvalidArgument(f"theta ({k}) and covariance {cov.shape} do not match")
    cov = (cov + cov.T) / 2.0
    eigvals, eigvecs = scipy.linalg.eigh(cov)
    if eigvals[0] <= 0.0 or eigvals[0] <= 1e-12 * eigvals[-1]:
        raise SingularCovariance(f"Covariance is not positive definite (smallest eigenvalue {eigvals[0]:.3e})")
    chisq_radius = float(chi2.ppf(1.0 - alpha, k))
    boundary = None
    if k == 2:
        if n_boundary_points < 3:
            raise InvalidArgument("At least 3 boundary points are required")
        angles = np.linspace(0.0, 2.0 * np.pi, n_boundary_points, endpoint=False)
        circle = np.vstack([np.cos(angles), np.sin(angles)])
        boundary = center + math.sqrt(chisq_radius) * (eigvecs * np.sqrt(eigvals) @ circle).T
        boundary = np.vstack([boundary, boundary[:1]])
    return Ellipsoid(center=center, covariance=cov, chisq_radius=chisq_radius, alpha=alpha, boundary=boundary)


def mahalanobis_inside(center, cov, point, alpha: float) -> bool:
    """Rank-aware Wald membership: pseudo-inverse with as many chi-square degrees of freedom as the rank."""
    _check_alpha(alpha)
    cov = _as_cov(cov)
    diff = np.atleast_1d(np.asarray(point, dtype=float) - np.asarray(center, dtype=float))
    eigvals, eigvecs = scipy.linalg.eigh((cov + cov.T) / 2.0)
    tol = max(eigvals[-1], 0.0) * cov.shape[0] * 1e3 * np.finfo(float).eps
    keep = eigvals > tol
    rank = int(np.sum(keep))
    if rank == 0:
        return bool(np.allclose(diff, 0.0))
    proj = eigvecs[:, keep].T @ diff
    # deviations outside the column space are impossible under the model
    residual = diff - eigvecs[:, keep] @ proj
    if np.max(np.abs(residual)) > 1e-8 * max(1.0, float(np.max(np.abs(diff)))):
        return False
    distance = float(np.sum(proj**2 / eigvals[keep]))
    return distance <= float(chi2.ppf(1.0 - alpha, rank))


def band_for_grid(
    pred: GridPrediction,
    alpha: float,
    method: Union[BandKind, str] = BandKind.SUPT,
    m: int = DEFAULT_DRAWS,
    seed: Optional[int] = None,
    parallel: Optional[int] = None,
) -> GridPrediction:
    """Attach a band of the chosen kind over every grid point; sup-t uses the full grid covariance."""
    kind = BandKind(method)
    c = critical_value(kind, pred.covariance, alpha, m=m, seed=seed, parallel=parallel)
    names = tuple(f"x={x:g}" for x in pred.grid)
    bands = dict(pred.bands)
    bands[kind] = band(pred.estimate, pred.covariance, c, kind=kind, names=names)
    return dataclasses.replace(pred, bands=bands)


def hypervolume_ratio(band_a: IntervalSet, band_b: IntervalSet) -> float:
    """Volume of the hyperrectangle ``band_a`` relative to ``band_b``."""
    if band_a.k != band_b.k:
        raise InvalidArgument(f"Bands differ in dimension ({band_a.k} vs {band_b.k})")
    widths_b = band_b.widths
    if np.any(widths_b <= 0.0):
        raise InvalidArgument("Reference band has zero width")
    return float(np.prod(band_a.widths / widths_b))
