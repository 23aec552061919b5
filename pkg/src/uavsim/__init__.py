"""Snapshot system-level simulator for UAV interference in LTE macro networks."""

__version__ = "0.1.0"

from .deployment import ScenarioConfig, build_network, drop_ues
from .propagation import build_coupling_matrix
from .association import associate
from .power_control import PowerControlConfig, open_loop_power, beta_adjustment
from .ul_engine import UlConfig, run_ul_campaign
from .dl_engine import DlConfig, run_dl_campaign
from .link_budget import build_ce_table

__all__ = [
    "ScenarioConfig", "build_network", "drop_ues", "build_coupling_matrix", "associate",
    "PowerControlConfig", "open_loop_power", "beta_adjustment", "UlConfig", "run_ul_campaign",
    "DlConfig", "run_dl_campaign", "build_ce_table",
]
