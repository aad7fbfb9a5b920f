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
"""Simulband Flow API."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from simulband import regions
from simulband.backends.json import writer as json_writer
from simulband.backends.svg import writer as svg_writer
from simulband.backends.table import writer as table_writer
from simulband.coverage import SimScenario, run_coverage
from simulband.errors import InvalidArgument, SingularCovariance
from simulband.estimators import (
    Dataset,
    SplineSpec,
    build_effects_model,
    build_emm_binary_ipw_model,
    build_emm_binary_model,
    build_emm_continuous_model,
    build_ipw_effects_model,
    linear_contrast,
    make_grid,
    predict_cace,
)
from simulband.frontends import ingest_csv
from simulband.logging import get_logger, run_log, timed
from simulband.mest import EstimatingModel, FitResult, SolverOptions, solve
from simulband.resources.resources import get_preset
from simulband.settings import DEFAULT_SETTINGS, ColumnSettings, SimulbandSettings, load_layer
from simulband.types import BandKind, Command, SplineKind
from simulband.utils import ensure_directory, resolve_seed

logger = get_logger()

RUN_LOG_NAME = "simulband.log"


@dataclass
class AnalysisOutput:
    """Everything an analysis hands to the writers."""

    command: Command
    payload: Dict[str, Any]
    names: List[str] = field(default_factory=list)
    bands: Optional[Dict[BandKind, regions.IntervalSet]] = None
    ellipsoid: Optional[regions.Ellipsoid] = None
    grid: Optional[Any] = None
    report: Optional[Any] = None


def volume_ratios(
    bands: Dict[BandKind, regions.IntervalSet], region: Optional[regions.Ellipsoid] = None
) -> Dict[str, float]:
    ret = {
        "bonferroni/supt": regions.hypervolume_ratio(bands[BandKind.BONFERRONI], bands[BandKind.SUPT]),
        "supt/pointwise": regions.hypervolume_ratio(bands[BandKind.SUPT], bands[BandKind.POINTWISE]),
        "bonferroni/pointwise": regions.hypervolume_ratio(bands[BandKind.BONFERRONI], bands[BandKind.POINTWISE]),
    }
    if region is not None:
        ret["ellipsoid/supt"] = region.volume / float(np.prod(bands[BandKind.SUPT].widths))
    return ret


class SimulbandFlow:
    def __init__(self, settings: Optional[SimulbandSettings] = None):
        if settings is None:
            settings = SimulbandSettings.from_dict(DEFAULT_SETTINGS)
        self.settings: SimulbandSettings = settings.validate()
        self.seed: int = resolve_seed(self.settings.bands.seed)
        # recorded settings name the seed actually used
        self.settings.bands.seed = self.seed
        self.solver_options = SolverOptions.from_settings(self.settings.solver)
        self.metrics: Dict[str, float] = {}

    @classmethod
    def from_sources(
        cls,
        config_file: Optional[Union[str, Path]] = None,
        preset: Optional[str] = None,
        overrides: Optional[dict] = None,
    ):
        """Settings layered as defaults < preset < config file < overrides (command line flags)."""
        preset_layer = get_preset(preset) if preset else None
        file_layer = None
        if config_file is not None:
            config_file = Path(config_file)
            if not config_file.is_file():
                raise InvalidArgument(f"Config file not found: {config_file}")
            file_layer = load_layer(config_file)
        return cls(SimulbandSettings.from_layers(DEFAULT_SETTINGS, preset_layer, file_layer, overrides))

    @property
    def alpha(self) -> float:
        return self.settings.bands.alpha

    @property
    def ipw(self) -> bool:
        return bool(self.settings.ipw)

    def _header(self, command: Command) -> Dict[str, Any]:
        return {
            "command": command.value,
            "ipw": self.ipw,
            "alpha": self.alpha,
            "m": self.settings.bands.m,
            "seed": self.seed,
        }

    def _confounders(self) -> List[str]:
        confounders = list(self.settings.columns.confounders)
        if self.ipw and len(confounders) == 0:
            raise InvalidArgument("Inverse probability weighting needs at least one confounder column")
        return confounders

    def mapping_for(self, outcomes: List[str], modifiers: List[str]) -> ColumnSettings:
        """Only the columns an analysis uses are typed, so unrelated missing values drop no rows."""
        cols = self.settings.columns
        return ColumnSettings(
            action=cols.action,
            outcomes=outcomes,
            modifiers=modifiers,
            confounders=self._confounders() if self.ipw else [],
            categorical=list(cols.categorical),
            bins=dict(cols.bins),
        )

    def load_data(self, mapping: ColumnSettings) -> Dataset:
        if not self.settings.data_path:
            raise InvalidArgument("No data file given (data_path)")
        return ingest_csv(self.settings.data_path, mapping)

    def fit(self, model: EstimatingModel, data: Dataset) -> FitResult:
        with timed(self.metrics, "solve_s"):
            fit = solve(model, data, self.solver_options)
        logger.info(
            "Solved %d estimating equations in %d iteration(s) (root_norm=%.2e)",
            model.dim_theta,
            fit.iterations,
            fit.root_norm,
        )
        return fit

    def construct(self, theta, cov, names) -> Dict[BandKind, regions.IntervalSet]:
        bands = self.settings.bands
        return regions.construct_bands(
            theta, cov, self.alpha, m=bands.m, seed=self.seed, parallel=bands.parallel, names=names
        )

    def _ellipsoid(self, theta, cov) -> Optional[regions.Ellipsoid]:
        if len(theta) < 2:
            return None
        try:
            return regions.ellipsoid(theta, cov, self.alpha, n_boundary_points=self.settings.bands.n_boundary_points)
        except SingularCovariance as err:
            if len(theta) == 2:
                raise
            logger.warning("Skipping the confidence ellipsoid: %s", err)
            return None

    def _coefficient_summary(self, data: Dataset, fit: FitResult):
        names = list(fit.interest_names)
        theta, cov = fit.interest
        bands = self.construct(theta, cov, names)
        region = self._ellipsoid(theta, cov)
        summary = {
            "data": {"source": data.source, **data.diagnostics},
            "fit": json_writer.fit_to_dict(fit),
            "interest": {"names": names, "estimate": theta, "covariance": cov},
            "regions": json_writer.regions_to_dict(bands, region),
            "hypervolume_ratios": volume_ratios(bands, region),
        }
        return names, bands, region, summary

    def effects(self) -> AnalysisOutput:
        """Average causal effects on two outcomes."""
        outcomes = list(self.settings.effects.outcomes or self.settings.columns.outcomes[:2])
        data = self.load_data(self.mapping_for(outcomes, []))
        if self.ipw:
            model = build_ipw_effects_model(data, outcomes, confounders=self._confounders())
        else:
            model = build_effects_model(data, outcomes)
        fit = self.fit(model, data)
        names, bands, region, summary = self._coefficient_summary(data, fit)
        payload = {**self._header(Command.EFFECTS), "outcomes": outcomes, **summary}
        return AnalysisOutput(Command.EFFECTS, payload, names=names, bands=bands, ellipsoid=region)

    def _modification_columns(self, section) -> tuple:
        outcome = section.outcome or (self.settings.columns.outcomes[:1] or [None])[0]
        modifier = section.modifier
        if outcome is None or modifier is None:
            raise InvalidArgument("Effect modification needs an outcome and a modifier column")
        return outcome, modifier

    def emm_binary(self) -> AnalysisOutput:
        """Modification of the effect by a binary variable, with stratum-specific effects."""
        outcome, modifier = self._modification_columns(self.settings.emm_binary)
        data = self.load_data(self.mapping_for([outcome], [modifier]))
        levels = np.unique(data.column(modifier))
        if not np.all(np.isin(levels, (0.0, 1.0))):
            raise InvalidArgument(f"Modifier '{modifier}' must be coded 0/1, found {levels[:5].tolist()}")
        if self.ipw:
            model = build_emm_binary_ipw_model(data, outcome, modifier, confounders=self._confounders())
        else:
            model = build_emm_binary_model(data, outcome, modifier)
        fit = self.fit(model, data)
        names, bands, region, summary = self._coefficient_summary(data, fit)
        effect, effect_cov = linear_contrast(fit, ("beta1", "beta3"), [[1.0, 0.0], [1.0, 1.0]])
        stratum_names = [f"effect|{modifier}=0", f"effect|{modifier}=1"]
        stratum_bands = self.construct(effect, effect_cov, stratum_names)
        payload = {
            **self._header(Command.EMM_BINARY),
            "outcome": outcome,
            "modifier": modifier,
            **summary,
            "stratum_effects": {
                "names": stratum_names,
                "estimate": effect,
                "covariance": effect_cov,
                "regions": json_writer.regions_to_dict(stratum_bands),
            },
        }
        return AnalysisOutput(Command.EMM_BINARY, payload, names=names, bands=bands, ellipsoid=region)

    def spline_spec(self, x) -> SplineSpec:
        spline = self.settings.spline
        if SplineKind(spline.kind) == SplineKind.LINEAR:
            return SplineSpec(kind=SplineKind.LINEAR)
        return SplineSpec.from_data(x, n_knots=spline.n_knots, knots=spline.knots, normalize=spline.normalize)

    def emm_continuous(self) -> AnalysisOutput:
        """Conditional average causal effect over a grid of a continuous modifier."""
        outcome, modifier = self._modification_columns(self.settings.emm_continuous)
        data = self.load_data(self.mapping_for([outcome], [modifier]))
        x = data.column(modifier)
        spec = self.spline_spec(x)
        model = build_emm_continuous_model(
            data, outcome, modifier, spec=spec, weighted_by=self._confounders() if self.ipw else None
        )
        fit = self.fit(model, data)
        names, bands, region, summary = self._coefficient_summary(data, fit)
        pred = predict_cace(fit, model.layout, make_grid(x, self.settings.grid.size))
        bset = self.settings.bands
        with timed(self.metrics, "grid_bands_s"):
            for kind in BandKind:
                pred = regions.band_for_grid(pred, self.alpha, kind, m=bset.m, seed=self.seed, parallel=bset.parallel)
        regions.check_ordering(pred.bands)
        payload = {
            **self._header(Command.EMM_CONTINUOUS),
            "outcome": outcome,
            "modifier": modifier,
            "spline": {"kind": spec.kind.value, "knots": list(spec.knots), "normalize": spec.normalize},
            **summary,
            "grid": {
                "size": pred.size,
                "x": pred.grid,
                "estimate": pred.estimate,
                "standard_errors": pred.standard_errors,
                "regions": json_writer.regions_to_dict(pred.bands),
            },
        }
        return AnalysisOutput(Command.EMM_CONTINUOUS, payload, names=names, bands=bands, ellipsoid=region, grid=pred)

    def simulate(self) -> AnalysisOutput:
        sim = self.settings.simulation
        scenario = SimScenario.from_settings(sim, self.alpha, seed=self.seed)
        report = run_coverage(scenario, parallel=self.settings.bands.parallel, show_progress=sim.show_progress)
        payload = {"command": Command.SIMULATE.value, **report.to_dict()}
        return AnalysisOutput(Command.SIMULATE, payload, report=report)

    def analyze(self, command: Union[Command, str]) -> AnalysisOutput:
        command = Command(command)
        handlers = {
            Command.EFFECTS: self.effects,
            Command.EMM_BINARY: self.emm_binary,
            Command.EMM_CONTINUOUS: self.emm_continuous,
            Command.SIMULATE: self.simulate,
        }
        logger.info("Running %s analysis", command.value)
        with timed(self.metrics, "time_s"):
            output = handlers[command]()
        logger.info("Completed %s analysis in %.2fs", command.value, self.metrics["time_s"])
        return output

    def write(self, output: AnalysisOutput, out_dir: Optional[Union[str, Path]] = None) -> Dict[str, Path]:
        out_dir = ensure_directory(out_dir if out_dir is not None else self.settings.output_path)
        written = {"result": json_writer.write_result(out_dir / "result.json", output.payload)}
        written["settings"] = self.settings.to_yaml_file(out_dir / "settings.yml")
        if output.command == Command.SIMULATE:
            written["table"] = table_writer.write_coverage_table(out_dir / "table.csv", output.report)
        else:
            written["table"] = table_writer.write_table(out_dir / "table.csv", output.bands, output.names)
        if output.command == Command.EFFECTS:
            content = svg_writer.render_effects_figure(output.bands, output.ellipsoid, output.names)
            written["figure"] = svg_writer.write_figure(out_dir / "figure.svg", content)
        elif output.command == Command.EMM_CONTINUOUS:
            written["grid"] = table_writer.write_grid(out_dir / "grid.csv", output.grid)
            payload = output.payload
            content = svg_writer.render_grid_figure(
                output.grid, xlabel=payload["modifier"], ylabel=f"Effect on {payload['outcome']}"
            )
            written["figure"] = svg_writer.write_figure(out_dir / "figure.svg", content)
        for key, path in written.items():
            logger.info("Wrote %s: %s", key, path)
        return written

    def run(self, command: Optional[Union[Command, str]] = None, out_dir: Optional[Union[str, Path]] = None):
        command = command if command is not None else self.settings.command
        if command is None:
            raise InvalidArgument("No command given")
        out_dir = ensure_directory(out_dir if out_dir is not None else self.settings.output_path)
        file_settings = self.settings.logging.file
        with run_log(out_dir / RUN_LOG_NAME, level=file_settings.level, rotate=file_settings.rotate):
            output = self.analyze(command)
            written = self.write(output, out_dir)
        return output, written
