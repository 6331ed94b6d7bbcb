"""Discretised densities for the transmit amplitude s and the output amplitude x.

A :class:`GridPdf` is piecewise constant on M equal cells of [lo, hi]. Cell
values are exact cell averages wherever a closed form exists, so masses and
CDFs are exact for the represented distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .eh_model import EhModel, p_max
from .errors import InconsistencyError, RangeError
from .special_math import dawson_over_z

DEFAULT_GRID = 4001


@dataclass(frozen=True, eq=False)
class GridPdf:
    lo: float
    hi: float
    density: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("density must be a non-empty 1-d array")
        if not self.lo < self.hi:
            raise ValueError("GridPdf requires lo < hi")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("density must be finite and non-negative")
        d.setflags(write=False)
        object.__setattr__(self, "density", d)

    @classmethod
    def from_masses(cls, lo, hi, masses):
        masses = np.asarray(masses, dtype=float)
        return cls(lo, hi, masses * (masses.size / (hi - lo)))

    @property
    def size(self) -> int:
        return self.density.size

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.size

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.size + 1)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def masses(self) -> np.ndarray:
        return self.density * self.step

    def mass(self) -> float:
        return float(np.sum(self.masses))

    def normalized(self) -> "GridPdf":
        return GridPdf(self.lo, self.hi, self.density / self.mass())

    def cdf(self, x):
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        return np.interp(x, self.edges, cum)

    def moment(self, k: int) -> float:
        """E{x^k}, exact for the piecewise-constant density."""
        e = self.edges
        lo, hi = e[:-1], e[1:]
        # (hi^(k+1) - lo^(k+1)) / (hi - lo) expanded, so narrow cells do not cancel
        avg = sum(hi**j * lo ** (k - j) for j in range(k + 1)) / (k + 1)
        return float(np.dot(self.masses, avg))

    def mean(self) -> float:
        return self.moment(1)

    def expect(self, g) -> float:
        """E{g(x)} with a three-point Simpson rule inside every cell."""
        e = self.edges
        mid = 0.5 * (e[:-1] + e[1:])
        ge = np.asarray(g(e), dtype=float)
        gm = np.asarray(g(mid), dtype=float)
        cell_avg = (ge[:-1] + 4.0 * gm + ge[1:]) / 6.0
        return float(np.dot(self.masses, cell_avg))

    def to_csv(self, path, header="x,density") -> None:
        rows = "\n".join(f"{x:.17g},{d:.17g}" for x, d in zip(self.centers, self.density))
        Path(path).write_text(f"{header}\n{rows}\n")


def total_variation(p: GridPdf, q: GridPdf) -> float:
    """0.5 * int |p - q|, evaluated on the union of both cell partitions."""
    pts = np.union1d(p.edges, q.edges)
    fp = np.diff(p.cdf(pts)) / np.diff(pts)
    fq = np.diff(q.cdf(pts)) / np.diff(pts)
    return 0.5 * float(np.sum(np.abs(fp - fq) * np.diff(pts)))


def point_mass(x0: float, width: float = None) -> GridPdf:
    """Single-cell spike of mass 1 at ``x0``, clipped to x >= 0."""
    if width is None:
        width = 1e-9 * max(abs(x0), 1e-30)
    lo = max(0.0, x0 - 0.5 * width)
    hi = lo + width
    return GridPdf(lo, hi, np.array([1.0 / (hi - lo)]))


# output-side optimal densities ------------------------------------------


@dataclass(frozen=True)
class MaxEntParams:
    mu0: float
    mu2: float
    p_max_bar: float
    p_req_bar: float

    def __post_init__(self):
        if not self.mu2 >= 0:
            raise ValueError("mu2 must be non-negative")
        if not 0 <= self.p_req_bar <= self.p_max_bar:
            raise ValueError("need 0 <= p_req_bar <= p_max_bar")

    @classmethod
    def from_mu2(cls, mu2, p_max_bar, p_req_bar):
        """Attach mu0 = mu2 P_max + ln(sqrt(P_max) / (1 + 2 mu2 P_req))."""
        mu0 = mu2 * p_max_bar + math.log(math.sqrt(p_max_bar)) - math.log1p(2.0 * mu2 * p_req_bar)
        return cls(mu0, mu2, p_max_bar, p_req_bar)

    def log_density(self, x):
        """-mu0 + mu2 x^2, arranged as mu2 (x^2 - P_max) + (mu2 P_max - mu0) so nothing overflows."""
        x = np.asarray(x, dtype=float)
        return self.mu2 * (x * x - self.p_max_bar) + (self.mu2 * self.p_max_bar - self.mu0)

    def density(self, x):
        return np.exp(self.log_density(x))

    def entropy(self) -> float:
        return self.mu0 - self.mu2 * self.p_req_bar

    def _antiderivative(self, x):
        # int_0^x exp(-mu0 + mu2 t^2) dt = exp(-mu0 + mu2 x^2) * x * F(z)/z, z = sqrt(mu2) x
        x = np.asarray(x, dtype=float)
        return self.density(x) * x * dawson_over_z(math.sqrt(self.mu2) * x)


def uniform_output_pdf(p_max_bar: float, M: int = DEFAULT_GRID) -> GridPdf:
    """Uniform density 1/sqrt(P_max) on [0, sqrt(P_max)]."""
    if not p_max_bar > 0:
        raise ValueError("p_max_bar must be positive")
    a = math.sqrt(p_max_bar)
    return GridPdf(0.0, a, np.full(M, 1.0 / a))


MAXENT_SUPPORT_NATS = 40.0


def maxent_support(params: MaxEntParams) -> tuple:
    """Interval carrying all but ~exp(-40) of the maxent mass.

    For large mu2 the density is a spike at sqrt(P_max); the grid starts where
    the density has dropped MAXENT_SUPPORT_NATS below its peak, so a fixed cell
    count still resolves the spike.
    """
    a = math.sqrt(params.p_max_bar)
    if params.mu2 <= 0:
        return 0.0, a
    return math.sqrt(max(0.0, params.p_max_bar - MAXENT_SUPPORT_NATS / params.mu2)), a


def maxent_output_pdf(params: MaxEntParams, M: int = DEFAULT_GRID) -> GridPdf:
    """Cell averages of exp(-mu0 + mu2 x^2) over its effective support in [0, sqrt(P_max)].

    Raises InconsistencyError when (mu0, mu2) do not normalise to within 1e-4.
    """
    lo, a = maxent_support(params)
    total = float(params._antiderivative(a))
    if abs(total - 1.0) > 1e-4:
        raise InconsistencyError(f"maxent density integrates to {total:.8g}, expected 1")
    edges = np.linspace(lo, a, M + 1)
    masses = np.diff(params._antiderivative(edges))
    # the first cell also carries the (negligible) mass below lo
    masses[0] += float(params._antiderivative(lo))
    return GridPdf.from_masses(lo, a, np.maximum(masses, 0.0))


def truncated_gaussian_pdf(a_bar: float, sigma_s: float, M: int = DEFAULT_GRID) -> GridPdf:
    """N(a_bar/2, sigma_s^2) restricted to [0, a_bar] and renormalised."""
    if not (a_bar > 0 and sigma_s > 0):
        raise ValueError("a_bar and sigma_s must be positive")
    z = (np.linspace(0.0, a_bar, M + 1) - 0.5 * a_bar) / sigma_s
    zl, zh = z[:-1], z[1:]
    # difference the tail that is small on each side to keep relative precision
    masses = np.where(zl + zh > 0, ndtr(-zl) - ndtr(-zh), ndtr(zh) - ndtr(zl))
    masses = np.maximum(masses, 0.0)
    return GridPdf.from_masses(0.0, a_bar, masses / masses.sum())


# maps between s-space and x-space ---------------------------------------


def _x_of_s(model: EhModel, h_mag: float, s):
    """Smallest-branch output amplitude sqrt(max psi on [0, |h s|^2])."""
    rho = np.minimum((h_mag * np.asarray(s, dtype=float)) ** 2, model.rho_max_w)
    return np.sqrt(model.running_max(rho))


def map_output_to_input_pdf(fx: GridPdf, model: EhModel, h_mag: float, M: int = None, a_bar: float = None) -> GridPdf:
    """Transmit pdf f_s realising the output pdf f_x on the smallest-amplitude branch.

    Every x is produced by s(x) = sqrt(rho*(x^2)) / |h| with rho* the smallest
    preimage of x^2 under psi, so F_s(s) = F_x(sqrt(max_{r <= |h s|^2} psi(r))).
    """
    if fx.lo < 0:
        raise RangeError("output amplitudes must be non-negative")
    rho_cap = model.rho_max_w if a_bar is None else min(model.rho_max_w, (h_mag * a_bar) ** 2)
    reachable = p_max(model, rho_cap)
    if fx.hi**2 > reachable * (1.0 + 1e-12):
        raise RangeError(f"x = {fx.hi:.6g} needs harvested power above the reachable {reachable:.6g} W")
    target = min(fx.hi**2, reachable)
    s_top = math.sqrt(model.smallest_preimage(target, rho_cap)) / h_mag
    s_lo = math.sqrt(model.smallest_preimage(fx.lo**2, rho_cap)) / h_mag
    if a_bar is not None:
        s_top = min(s_top, a_bar)
    M = fx.size if M is None else M
    edges = np.linspace(s_lo, s_top, M + 1)
    F = fx.cdf(_x_of_s(model, h_mag, edges))
    F[0], F[-1] = 0.0, fx.cdf(fx.hi)
    return GridPdf.from_masses(s_lo, s_top, np.maximum(np.diff(F), 0.0))


def pushforward_input_to_output(
    fs: GridPdf, model: EhModel, h_mag: float, bins: int = DEFAULT_GRID, samples: int = 200_000
) -> GridPdf:
    """Histogram of x = sqrt(psi(|h s|^2)) under f_s; valid on non-monotone psi.

    Each cell of f_s is cut into ``samples / M`` equal pieces; piece j carries its
    mass uniformly over [x(s_j), x(s_{j+1})] (linear map inside the piece), which
    avoids the aliasing of binning point samples. Peaks of psi inside a piece are
    handled by depositing over the piece's sorted end values.
    """
    per_cell = max(1, -(-samples // fs.size))
    u = np.arange(per_cell + 1) / per_cell
    s = fs.edges[:-1, None] + fs.step * u[None, :]
    x = np.sqrt(model.psi(np.minimum((h_mag * s) ** 2, model.rho_max_w)))
    w = np.repeat(fs.masses / per_cell, per_cell)
    a = np.minimum(x[:, :-1], x[:, 1:]).ravel()
    b = np.maximum(x[:, :-1], x[:, 1:]).ravel()
    x_hi = math.sqrt(model.running_max((h_mag * fs.hi) ** 2))
    if x_hi <= 0:
        return GridPdf.from_masses(0.0, 1e-300, np.concatenate(([1.0], np.zeros(bins - 1))))
    step = x_hi / bins
    a, b = np.minimum(a, x_hi) / step, np.minimum(b, x_hi) / step
    ia = np.minimum(a.astype(np.int64), bins - 1)
    ib = np.minimum(b.astype(np.int64), bins - 1)
    one = ia == ib
    counts = np.bincount(ia[one], weights=w[one], minlength=bins)
    # pieces spanning several bins: partial end bins plus a constant rate in between
    m = ~one
    rate = w[m] / (b[m] - a[m])
    counts += np.bincount(ia[m], weights=rate * (ia[m] + 1 - a[m]), minlength=bins)
    counts += np.bincount(ib[m], weights=rate * (b[m] - ib[m]), minlength=bins)
    fill = np.bincount(ia[m] + 1, weights=rate, minlength=bins + 1) - np.bincount(ib[m], weights=rate, minlength=bins + 1)
    counts += np.cumsum(fill)[:bins]
    return GridPdf.from_masses(0.0, x_hi, counts)
