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
"""Repeated-sampling coverage study for the confidence regions."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from simulband.errors import InvalidArgument, SimulbandError
from simulband.logging import get_logger
from simulband.mest import EstimatingModel, SolverOptions, solve
from simulband.regions import (
    DEFAULT_DRAWS,
    MIN_DRAWS,
    band,
    bonferroni_critical,
    mahalanobis_inside,
    mvn_factor,
    pointwise_critical,
    supt_critical_value,
)
from simulband.types import BandKind
from simulband.utils import NUM_THREADS, resolve_seed

logger = get_logger()

ELLIPSOID = "ellipsoid"
METHODS = tuple(kind.value for kind in BandKind) + (ELLIPSOID,)


@dataclass(frozen=True)
class SimScenario:
    """Multivariate normal outcomes with equicorrelation ``rho`` and known means."""

    k: int = 2
    rho: float = 0.0
    variances: Optional[Sequence[float]] = None
    true_theta: Optional[Sequence[float]] = None
    n_per_rep: int = 500
    reps: int = 10000
    alpha: float = 0.05
    seed: Optional[int] = None
    m: int = DEFAULT_DRAWS

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgument(f"k must be at least 1, got {self.k}")
        if self.reps < 1:
            raise InvalidArgument(f"reps must be at least 1, got {self.reps}")
        if self.n_per_rep < 2:
            raise InvalidArgument(f"n_per_rep must be at least 2, got {self.n_per_rep}")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidArgument(f"|rho| must not exceed 1, got {self.rho}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgument(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.m < MIN_DRAWS:
            raise InvalidArgument(f"m must be at least {MIN_DRAWS}, got {self.m}")
        variances = np.ones(self.k) if self.variances is None else np.asarray(self.variances, dtype=float)
        if variances.shape != (self.k,) or np.any(variances <= 0.0):
            raise InvalidArgument(f"Expected {self.k} positive variances, got {self.variances}")
        truth = np.zeros(self.k) if self.true_theta is None else np.asarray(self.true_theta, dtype=float)
        if truth.shape != (self.k,):
            raise InvalidArgument(f"Expected {self.k} true means, got {self.true_theta}")
        object.__setattr__(self, "variances", tuple(float(v) for v in variances))
        object.__setattr__(self, "true_theta", tuple(float(t) for t in truth))
        object.__setattr__(self, "seed", resolve_seed(self.seed))

    @classmethod
    def from_settings(cls, sim_settings, alpha: float, seed: Optional[int] = None):
        return cls(
            k=sim_settings.k,
            rho=sim_settings.rho,
            variances=sim_settings.variances,
            true_theta=sim_settings.true_theta,
            n_per_rep=sim_settings.n_per_rep,
            reps=sim_settings.reps,
            alpha=alpha,
            seed=seed,
            m=sim_settings.m,
        )

    @property
    def covariance(self) -> np.ndarray:
        sd = np.sqrt(np.asarray(self.variances))
        corr = np.full((self.k, self.k), self.rho)
        np.fill_diagonal(corr, 1.0)
        return corr * np.outer(sd, sd)

    def replicate_seeds(self, rep: int):
        """(data, sup-t) seed pair for one replicate, independent of execution order."""
        data_seq, supt_seq = np.random.SeedSequence(self.seed, spawn_key=(rep,)).spawn(2)
        return data_seq, int(supt_seq.generate_state(1)[0])

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "rho": self.rho,
            "variances": list(self.variances),
            "true_theta": list(self.true_theta),
            "n_per_rep": self.n_per_rep,
            "reps": self.reps,
            "alpha": self.alpha,
            "seed": self.seed,
            "m": self.m,
        }


@dataclass
class ReplicateOutcome:
    covered: Dict[str, bool] = field(default_factory=dict)
    marginal: Dict[str, np.ndarray] = field(default_factory=dict)
    critical_values: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None


@dataclass
class CoverageReport:
    scenario: SimScenario
    simultaneous: Dict[str, float]
    marginal: Dict[str, List[float]]
    mean_critical_values: Dict[str, float]
    n_completed: int
    n_failed: int
    failures: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "simultaneous_coverage": dict(self.simultaneous),
            "marginal_coverage": {key: list(val) for key, val in self.marginal.items()},
            "mean_critical_values": dict(self.mean_critical_values),
            "n_completed": self.n_completed,
            "n_failed": self.n_failed,
            "failures": dict(self.failures),
        }


def mean_model(k: int) -> EstimatingModel:
    """Estimating equations ``Y_i - mu`` for the vector of means."""
    return EstimatingModel(
        dim_theta=k,
        g=lambda data, theta: data - theta,
        interest_indices=tuple(range(k)),
        initial_theta=np.zeros(k),
        names=tuple(f"mu{i + 1}" for i in range(k)),
    )


def run_replicate(
    scenario: SimScenario,
    rep: int,
    factor: np.ndarray,
    model: EstimatingModel,
    options: Optional[SolverOptions] = None,
) -> ReplicateOutcome:
    data_seq, supt_seed = scenario.replicate_seeds(rep)
    rng = np.random.default_rng(data_seq)
    truth = np.asarray(scenario.true_theta)
    sample = truth + rng.standard_normal((scenario.n_per_rep, factor.shape[1])) @ factor.T
    outcome = ReplicateOutcome()
    try:
        fit = solve(model, sample, options)
        theta, cov = fit.interest
        critical = {
            BandKind.POINTWISE: pointwise_critical(scenario.alpha),
            BandKind.BONFERRONI: bonferroni_critical(scenario.k, scenario.alpha),
            BandKind.SUPT: supt_critical_value(
                cov, scenario.alpha, m=scenario.m, seed=supt_seed, parallel=1, warn_few_draws=False
            ),
        }
        for kind, value in critical.items():
            intervals = band(theta, cov, value, kind=kind)
            hits = intervals.covers(truth)
            outcome.covered[kind.value] = bool(np.all(hits))
            outcome.marginal[kind.value] = hits
            outcome.critical_values[kind.value] = value
        outcome.covered[ELLIPSOID] = mahalanobis_inside(theta, cov, truth, scenario.alpha)
    except SimulbandError as ex:
        logger.debug("Replicate %d failed: %s", rep, ex)
        outcome.error = type(ex).__name__
    return outcome


def summarize(scenario: SimScenario, outcomes: Sequence[ReplicateOutcome]) -> CoverageReport:
    done = [o for o in outcomes if o.error is None]
    failures: Dict[str, int] = {}
    for o in outcomes:
        if o.error is not None:
            failures[o.error] = failures.get(o.error, 0) + 1
    n_failed = len(outcomes) - len(done)
    if not done:
        raise InvalidArgument(f"All {len(outcomes)} replicates failed: {failures}")
    if n_failed:
        logger.warning("%d of %d replicates failed and were excluded", n_failed, len(outcomes))
    simultaneous = {method: float(np.mean([o.covered[method] for o in done])) for method in METHODS}
    marginal = {
        kind.value: [float(x) for x in np.mean([o.marginal[kind.value] for o in done], axis=0)] for kind in BandKind
    }
    mean_critical = {kind.value: float(np.mean([o.critical_values[kind.value] for o in done])) for kind in BandKind}
    return CoverageReport(
        scenario=scenario,
        simultaneous=simultaneous,
        marginal=marginal,
        mean_critical_values=mean_critical,
        n_completed=len(done),
        n_failed=n_failed,
        failures=failures,
    )


def run_coverage(
    scenario: SimScenario,
    parallel: Optional[int] = None,
    show_progress: bool = False,
    options: Optional[SolverOptions] = None,
) -> CoverageReport:
    """Fraction of replicates in which each region contains the true mean vector.

    Replicate ``r`` always uses the seeds derived from ``(scenario.seed, r)``, so the report does not depend on how
    replicates are scheduled.
    """
    factor = mvn_factor(scenario.covariance)
    model = mean_model(scenario.k)
    workers = parallel if parallel is not None else NUM_THREADS
    logger.info(
        "Running %d replicates (k=%d, rho=%g, n=%d) on %d thread(s)",
        scenario.reps,
        scenario.k,
        scenario.rho,
        scenario.n_per_rep,
        workers,
    )
    pbar = tqdm(total=scenario.reps, disable=not show_progress, desc="replicates")

    def process(rep):
        outcome = run_replicate(scenario, rep, factor, model, options)
        pbar.update(1)
        return outcome

    try:
        if workers <= 1:
            outcomes = [process(rep) for rep in range(scenario.reps)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(process, range(scenario.reps)))
    finally:
        pbar.close()
    report = summarize(scenario, outcomes)
    logger.info(
        "Simultaneous coverage: %s",
        ", ".join(f"{method}={value:.4f}" for method, value in report.simultaneous.items()),
    )
    return report
