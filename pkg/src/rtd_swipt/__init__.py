"""Rate-power tradeoff of THz SWIPT receivers with an RTD energy harvester."""

from .channel import LinkBudget, effective_amplitude_cap, large_scale_gain
from .distributions import GridPdf, MaxEntParams
from .eh_fitting import detect_breakpoints, fit_model
from .eh_model import EhModel, LogisticSegment, load_model, save_model, table_i_model
from .information import NoiseSpec, epi_rate, mutual_information
from .rate_power import ProblemInstance, RateSolution, monte_carlo_region, solve_mu2, solve_rate, sweep_baseline, sweep_region

__all__ = [
    "EhModel",
    "GridPdf",
    "LinkBudget",
    "LogisticSegment",
    "MaxEntParams",
    "NoiseSpec",
    "ProblemInstance",
    "RateSolution",
    "detect_breakpoints",
    "effective_amplitude_cap",
    "epi_rate",
    "fit_model",
    "large_scale_gain",
    "load_model",
    "monte_carlo_region",
    "mutual_information",
    "save_model",
    "solve_mu2",
    "solve_rate",
    "sweep_baseline",
    "sweep_region",
    "table_i_model",
]
