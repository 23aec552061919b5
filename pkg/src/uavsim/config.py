"""Configuration file loading (YAML or JSON) into the per-module config types.

Top-level sections, all optional::

    scenario:       ScenarioConfig fields
    propagation:    {<scenario name>: overrides of PropagationParams}
    power_control:  PowerControlConfig fields, beta_table as [[threshold, dB], ...],
                    beta_above, aerial_target_mapping (same shape), p0_sweep
    ul:             UlConfig fields
    dl:             noise_density, noise_figure, required_sinr_normal, required_sinr_ce
    campaign:       drops, seed, workers, percentiles, dl_scenarios
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .deployment import ScenarioConfig, SCENARIOS
from .dl_engine import ChannelThresholds, DlConfig
from .experiments import UAV_P0_SWEEP
from .power_control import BetaTable, PowerControlConfig
from .propagation import PropagationParams, scenario_params, with_overrides
from .ul_engine import UlConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignConfig:
    drops: int = 20
    seed: int = 1
    workers: int = 1
    percentiles: tuple = (5, 20, 50, 95)
    dl_scenarios: tuple = ("RMa-AV", "UMa-AV")

    def __post_init__(self):
        object.__setattr__(self, "percentiles", tuple(self.percentiles))
        object.__setattr__(self, "dl_scenarios", tuple(self.dl_scenarios))
        if self.drops < 1:
            raise ValueError("drops must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for s in self.dl_scenarios:
            if s not in SCENARIOS:
                raise ValueError(f"unknown scenario {s!r}")


@dataclass(frozen=True)
class SimulationConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    propagation: dict = field(default_factory=dict)   # scenario -> override dict
    power_control: PowerControlConfig = field(default_factory=PowerControlConfig)
    p0_sweep: tuple = UAV_P0_SWEEP
    ul: UlConfig = field(default_factory=UlConfig)
    dl: DlConfig = field(default_factory=DlConfig)
    campaign: CampaignConfig = field(default_factory=CampaignConfig)

    def propagation_for(self, scenario: str) -> PropagationParams:
        base = scenario_params(scenario)
        overrides = self.propagation.get(scenario)
        return with_overrides(base, overrides) if overrides else base

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "propagation": {k: dict(v) for k, v in self.propagation.items()},
            "power_control": _pc_to_dict(self.power_control, self.p0_sweep),
            "ul": self.ul.to_dict(),
            "dl": self.dl.to_dict(),
            "campaign": {"drops": self.campaign.drops, "seed": self.campaign.seed,
                         "workers": self.campaign.workers,
                         "percentiles": list(self.campaign.percentiles),
                         "dl_scenarios": list(self.campaign.dl_scenarios)},
        }


def _pc_to_dict(pc: PowerControlConfig, sweep) -> dict:
    d = pc.to_dict()
    d["beta_above"] = d["beta_table"]["above"]
    d["beta_table"] = d["beta_table"]["rows"]
    mapping = d.pop("aerial_target_mapping")
    if mapping is not None:
        d["aerial_target_mapping"] = mapping["rows"]
        d["aerial_target_mapping_above"] = mapping["above"]
    d["p0_sweep"] = list(sweep)
    return d


def _check_keys(section: str, data: dict, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def _names(cls):
    return [f.name for f in fields(cls)]


def from_dict(data: dict | None) -> SimulationConfig:
    data = dict(data or {})
    _check_keys("top level", data, ["scenario", "propagation", "power_control", "ul", "dl", "campaign"])
    try:
        sc = dict(data.get("scenario") or {})
        _check_keys("scenario", sc, _names(ScenarioConfig))
        if "aerial_altitude_range" in sc:
            sc["aerial_altitude_range"] = tuple(sc["aerial_altitude_range"])
        scenario = ScenarioConfig(**sc)

        prop = dict(data.get("propagation") or {})
        _check_keys("propagation", prop, SCENARIOS)
        for name, overrides in prop.items():
            with_overrides(scenario_params(name), overrides)   # validate early

        pc = dict(data.get("power_control") or {})
        sweep = tuple(float(v) for v in pc.pop("p0_sweep", UAV_P0_SWEEP))
        beta_above = pc.pop("beta_above", 0.0)
        mapping_above = pc.pop("aerial_target_mapping_above", 0.0)
        _check_keys("power_control", pc, _names(PowerControlConfig))
        if "beta_table" in pc:
            pc["beta_table"] = BetaTable.from_rows(pc["beta_table"], beta_above)
        elif beta_above:
            pc["beta_table"] = replace(BetaTable(), above=float(beta_above))
        if pc.get("aerial_target_mapping") is not None:
            pc["aerial_target_mapping"] = BetaTable.from_rows(pc["aerial_target_mapping"], mapping_above)
        if "tpc_step_set" in pc:
            pc["tpc_step_set"] = tuple(pc["tpc_step_set"])
        power_control = PowerControlConfig(**pc)

        ul_d = dict(data.get("ul") or {})
        _check_keys("ul", ul_d, _names(UlConfig))
        ul = UlConfig(**ul_d)

        dl_d = dict(data.get("dl") or {})
        _check_keys("dl", dl_d, ["noise_density", "noise_figure", "required_sinr_normal", "required_sinr_ce"])
        defaults = ChannelThresholds()
        thresholds = ChannelThresholds(
            {**defaults.required_sinr_normal, **(dl_d.pop("required_sinr_normal", None) or {})},
            {**defaults.required_sinr_ce, **(dl_d.pop("required_sinr_ce", None) or {})})
        dl = DlConfig(thresholds=thresholds, **dl_d)

        camp = dict(data.get("campaign") or {})
        _check_keys("campaign", camp, _names(CampaignConfig))
        campaign = CampaignConfig(**camp)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return SimulationConfig(scenario, prop, power_control, sweep, ul, dl, campaign)


def load_config(path) -> SimulationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return from_dict(data)


def dump_config(config: SimulationConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)
