"""Rate-power solver: feasibility, regime dispatch, mu2 root, region sweeps.

For a peak output power P_max (largest psi reachable under the amplitude cap)
and a required average harvested power P_req:

* P_req <= P_max / 3: uniform output density, J* = 0.5 ln(1 + P_max / (2 pi e sigma^2)).
* P_max / 3 < P_req < P_max: output density exp(-mu0 + mu2 x^2) on [0, sqrt(P_max)],
  with mu2 the positive root of

      ln(1 + 2 mu2 P_req) + ln erfi(sqrt(mu2 P_max)) = 0.5 ln(4 P_max mu2 / pi) + mu2 P_max,

  and J* = 0.5 ln(1 + exp(2 mu0 - 2 mu2 P_req) / (2 pi e sigma^2)).

The root is searched in t = mu2 * P_max, where the equation reads
ln(1 + 2 t q) + ln(F(sqrt t) / sqrt t) = 0 with q = P_req / P_max and F the
Dawson integral; this form keeps full precision as t -> 0.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkBudget, effective_amplitude_cap, large_scale_gain, realization_rng, sample_small_scale
from .distributions import (
    DEFAULT_GRID,
    GridPdf,
    MaxEntParams,
    map_output_to_input_pdf,
    maxent_output_pdf,
    pushforward_input_to_output,
    truncated_gaussian_pdf,
    uniform_output_pdf,
)
from .eh_model import EhModel, p_max
from .errors import BracketError, BreakdownError, DomainError
from .information import NoiseSpec, differential_entropy, epi_rate, mutual_information
from .special_math import bisect, log_dawson_over_z, log_erfi

log = logging.getLogger(__name__)

MU2_T_LO = 1e-12
MU2_T_HI = 1.0
MU2_T_CAP = 1e8
LAST_POINT_FRACTION = 1.0 - 1e-6


@dataclass(frozen=True)
class ProblemInstance:
    a_bar: float
    h_mag: float
    sigma2: float
    p_req_bar: float
    model: EhModel

    def __post_init__(self):
        if not self.a_bar > 0:
            raise ValueError("a_bar must be positive")
        if not self.h_mag > 0:
            raise ValueError("h_mag must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not self.p_req_bar >= 0:
            raise ValueError("p_req_bar must be non-negative")
        if self.rho_cap > self.model.rho_max_w:
            raise BreakdownError("|h a_bar|^2 exceeds rho_max; cap the amplitude first")

    @property
    def rho_cap(self) -> float:
        return (self.h_mag * self.a_bar) ** 2

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.sigma2)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    p_max_bar: float


@dataclass(frozen=True, eq=False)
class RateSolution:
    j_star: float
    regime: str
    p_max_bar: float
    p_req_bar: float
    mu0: float = math.nan
    mu2: float = math.nan
    p_harv_realized: float = math.nan
    fx: GridPdf = None
    fs: GridPdf = None

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "j_star": self.j_star,
            "p_max_bar": self.p_max_bar,
            "p_req_bar": self.p_req_bar,
            "mu0": self.mu0,
            "mu2": self.mu2,
            "p_harv_realized": self.p_harv_realized,
        }


def check_feasibility(inst: ProblemInstance) -> Feasibility:
    pm = p_max(inst.model, inst.rho_cap)
    return Feasibility(inst.p_req_bar <= pm, pm)


def feasibility_witness(inst: ProblemInstance) -> float:
    """Amplitude s0 <= a_bar whose point mass harvests exactly P_req on average."""
    rho0 = inst.model.smallest_preimage(inst.p_req_bar, inst.rho_cap)
    return min(math.sqrt(rho0) / inst.h_mag, inst.a_bar)


def average_harvested_power(fs: GridPdf, model: EhModel, h_mag: float) -> float:
    """E_s{psi(|h s|^2)} for a transmit pdf supported within the breakdown cap."""
    if (h_mag * fs.hi) ** 2 > model.rho_max_w:
        raise BreakdownError(f"support reaches s = {fs.hi:.6g}, beyond the breakdown amplitude")
    if fs.lo < 0:
        raise ValueError("transmit amplitudes must be non-negative")
    return fs.expect(lambda s: model.psi((h_mag * s) ** 2))


# mu2 root ---------------------------------------------------------------


def mu2_condition_residual(mu2: float, p_max_bar: float, p_req_bar: float) -> float:
    """LHS - RHS of the mu2 condition, evaluated term by term as written."""
    z = math.sqrt(mu2 * p_max_bar)
    lhs = math.log1p(2.0 * mu2 * p_req_bar) + log_erfi(z)
    rhs = 0.5 * math.log(4.0 * p_max_bar * mu2 / math.pi) + mu2 * p_max_bar
    return lhs - rhs


def _scaled_residual(t: float, q: float) -> float:
    return math.log1p(2.0 * t * q) + log_dawson_over_z(math.sqrt(t))


def solve_mu2(p_max_bar: float, p_req_bar: float) -> float:
    """Positive root mu2 for P_req in [P_max/3, P_max); 0 at the lower end."""
    if not p_max_bar > 0:
        raise DomainError("p_max_bar must be positive")
    q = p_req_bar / p_max_bar
    if q < 1.0 / 3.0 * (1 - 1e-15) or q >= 1.0:
        raise DomainError(f"P_req/P_max = {q:.12g} outside [1/3, 1)")
    if q <= 1.0 / 3.0:
        return 0.0

    def g(t):
        return _scaled_residual(t, q)

    lo, hi = MU2_T_LO, MU2_T_HI
    g_lo = g(lo)
    if g_lo <= 0:
        # q is within rounding of 1/3; the root lies below the bracket start
        return 0.0 if g_lo < 0 else lo / p_max_bar
    signs = [g_lo > 0]
    g_hi = g(hi)
    signs.append(g_hi > 0)
    while g_hi > 0:
        hi *= 2.0
        if hi > MU2_T_CAP:
            raise BracketError(f"no sign change of the mu2 residual up to mu2 = {MU2_T_CAP:g}/P_max (q = {q:.12g})")
        g_hi = g(hi)
        signs.append(g_hi > 0)
        if g_hi > 0:
            lo = hi
    changes = sum(a != b for a, b in zip(signs, signs[1:]))
    if changes > 1:
        log.warning("mu2 residual changed sign %d times while bracketing; root may not be unique", changes)
    # bisect in ln t so the tolerance is relative for tiny roots near q = 1/3
    u = bisect(lambda v: g(math.exp(v)), math.log(lo), math.log(hi), tol=1e-15)
    return math.exp(u) / p_max_bar


def maxent_rate(params: MaxEntParams, sigma2: float) -> float:
    return epi_rate(params.mu0 - params.mu2 * params.p_req_bar, NoiseSpec(sigma2))


def uniform_rate(p_max_bar: float, sigma2: float) -> float:
    return 0.5 * math.log1p(p_max_bar / (2.0 * math.pi * math.e * sigma2))


# solver -----------------------------------------------------------------


def solve_rate(inst: ProblemInstance, grid_size: int = DEFAULT_GRID, with_pdfs: bool = True) -> RateSolution:
    feas = check_feasibility(inst)
    pm, preq = feas.p_max_bar, inst.p_req_bar
    if not feas.feasible or pm <= 0:
        return RateSolution(math.nan, "infeasible", pm, preq)
    if preq <= pm / 3.0:
        regime, mu0, mu2 = "uniform", 0.5 * math.log(pm), 0.0
        j_star = uniform_rate(pm, inst.sigma2)
        fx = uniform_output_pdf(pm, grid_size) if with_pdfs else None
    else:
        preq_eff = min(preq, pm * LAST_POINT_FRACTION)
        params = MaxEntParams.from_mu2(solve_mu2(pm, preq_eff), pm, preq_eff)
        regime, mu0, mu2 = "maxent", params.mu0, params.mu2
        j_star = maxent_rate(params, inst.sigma2)
        fx = maxent_output_pdf(params, grid_size) if with_pdfs else None
    if not with_pdfs:
        return RateSolution(j_star, regime, pm, preq, mu0, mu2)
    fs = map_output_to_input_pdf(fx, inst.model, inst.h_mag, grid_size, inst.a_bar)
    p_harv = average_harvested_power(fs, inst.model, inst.h_mag)
    return RateSolution(j_star, regime, pm, preq, mu0, mu2, p_harv, fx, fs)


@dataclass(frozen=True)
class RegionPoint:
    p_req: float
    j_star: float
    i_exact: float
    mu2: float
    regime: str
    p_harv: float = math.nan


REGION_HEADER = "p_req_W,j_star_nats,i_exact_nats,mu2,regime"


def region_levels(p_max_bar: float, n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    fr = np.linspace(0.0, 1.0, n_points)
    fr[-1] = LAST_POINT_FRACTION
    return fr * p_max_bar


def sweep_region(
    a_bar: float,
    h_mag: float,
    sigma2: float,
    model: EhModel,
    n_points: int = 50,
    grid_size: int = DEFAULT_GRID,
    with_mi: bool = True,
) -> list:
    """Rate-power boundary on a uniform P_req grid over [0, P_max).

    i_exact is the mutual information of the optimised output pdf; uniform-regime
    points share one pdf, so it is evaluated once for them.
    """
    pm = p_max(model, (h_mag * a_bar) ** 2)
    noise = NoiseSpec(sigma2)
    rows = []
    uniform_mi = None
    for preq in region_levels(pm, n_points):
        inst = ProblemInstance(a_bar, h_mag, sigma2, float(preq), model)
        sol = solve_rate(inst, grid_size, with_pdfs=with_mi)
        i_exact = math.nan
        if with_mi:
            if sol.regime == "uniform":
                if uniform_mi is None:
                    uniform_mi = mutual_information(sol.fx, noise)
                i_exact = uniform_mi
            else:
                i_exact = mutual_information(sol.fx, noise)
        rows.append(RegionPoint(float(preq), sol.j_star, i_exact, sol.mu2, sol.regime, sol.p_harv_realized))
    return rows


@dataclass(frozen=True)
class BaselinePoint:
    sigma_s: float
    p_harv: float
    i_exact: float
    j_epi: float


BASELINE_HEADER = "sigma_s,p_harv_W,i_exact_nats,j_epi_nats"


def sweep_baseline(
    a_bar: float,
    h_mag: float,
    sigma2: float,
    model: EhModel,
    sigma_s_list,
    grid_size: int = DEFAULT_GRID,
    samples: int = 200_000,
) -> list:
    """Truncated-Gaussian transmit symbols (mean a_bar/2 on [0, a_bar]) for each sigma_s."""
    sigma_s_list = list(sigma_s_list)
    if not sigma_s_list:
        raise ValueError("sigma_s_list must not be empty")
    noise = NoiseSpec(sigma2)
    out = []
    for sigma_s in sigma_s_list:
        fs = truncated_gaussian_pdf(a_bar, float(sigma_s), grid_size)
        fx = pushforward_input_to_output(fs, model, h_mag, grid_size, samples)
        out.append(
            BaselinePoint(
                float(sigma_s),
                average_harvested_power(fs, model, h_mag),
                mutual_information(fx, noise),
                epi_rate(differential_entropy(fx), noise),
            )
        )
    return out


# Monte Carlo ------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloRow:
    fraction: float
    p_req: float
    j_star: float
    i_exact: float
    mu2: float
    regime: str
    n_realizations: int
    seed: int


MONTE_CARLO_HEADER = REGION_HEADER + ",n_realizations,seed"


@dataclass(frozen=True)
class _Realization:
    A: float
    sigma2: float
    model: EhModel
    n_points: int
    grid_size: int
    with_mi: bool
    h_mag: float


def _solve_realization(r: _Realization) -> list:
    a_bar = effective_amplitude_cap(r.A, r.h_mag, r.model.rho_max_w)
    return sweep_region(a_bar, r.h_mag, r.sigma2, r.model, r.n_points, r.grid_size, r.with_mi)


def monte_carlo_region(
    lb: LinkBudget,
    A: float,
    sigma2: float,
    model: EhModel,
    n_real: int = 1000,
    seed: int = 0,
    mode: str = "relative",
    n_points: int = 20,
    grid_size: int = DEFAULT_GRID,
    with_mi: bool = True,
    workers: int = 1,
) -> list:
    """Region averaged over Rician fading.

    ``relative``: every realization sweeps P_req over the same fractions of its own
    P_max; (P_req, J*, I) are averaged per fraction. ``fixed-abar``: no fading,
    |h| = large-scale gain and A is the requested peak amplitude.
    """
    if n_real < 1:
        raise ValueError("n_real must be >= 1")
    h_ls = large_scale_gain(lb)
    if mode == "fixed-abar":
        gains = [h_ls]
    elif mode == "relative":
        gains = [h_ls * sample_small_scale(lb.rician_k, realization_rng(seed, i)) for i in range(n_real)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    jobs = [_Realization(A, sigma2, model, n_points, grid_size, with_mi, h) for h in gains]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            tables = list(ex.map(_solve_realization, jobs))
    else:
        tables = [_solve_realization(j) for j in jobs]
    fractions = np.linspace(0.0, 1.0, n_points)
    fractions[-1] = LAST_POINT_FRACTION
    rows = []
    for k, fr in enumerate(fractions):
        pts = [t[k] for t in tables]
        rows.append(
            MonteCarloRow(
                float(fr),
                math.fsum(p.p_req for p in pts) / len(pts),
                math.fsum(p.j_star for p in pts) / len(pts),
                math.fsum(p.i_exact for p in pts) / len(pts) if with_mi else math.nan,
                math.fsum(p.mu2 for p in pts) / len(pts),
                pts[0].regime,
                len(gains),
                seed,
            )
        )
    return rows
