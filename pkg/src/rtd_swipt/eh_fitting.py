"""Fit the piecewise logistic EH model to tabulated (rho, P_h) transfer data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .eh_model import RHO_UNITS, EhModel, LogisticSegment
from .errors import FitError, InvariantError, SchemaError


@dataclass(frozen=True)
class TransferSample:
    rho: float
    p_h: float

    def __post_init__(self):
        if not (self.rho >= 0 and self.p_h >= 0):
            raise ValueError("transfer samples need rho >= 0 and p_h >= 0")


@dataclass
class FitReport:
    model: EhModel
    rmse: float
    per_segment_rmse: list
    iterations: int
    per_segment_iterations: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        lines = ["segment,rmse,iterations"]
        for n, (r, it) in enumerate(zip(self.per_segment_rmse, self.per_segment_iterations), start=1):
            lines.append(f"{n},{r:.17g},{it}")
        Path(path).write_text("\n".join(lines) + "\n")


def _as_arrays(samples, p_h=None):
    if p_h is not None:
        return np.asarray(samples, dtype=float), np.asarray(p_h, dtype=float)
    rho = np.array([s.rho for s in samples], dtype=float)
    return rho, np.array([s.p_h for s in samples], dtype=float)


def read_transfer_csv(path):
    """Read ``rho,p_h`` rows (watts); '#' lines are comments.

    Returns (rho, p_h) arrays sorted by rho. Malformed rows raise SchemaError
    naming the line.
    """
    rho, p_h = [], []
    header_seen = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if [c.strip() for c in line.split(",")] != ["rho", "p_h"]:
                raise SchemaError(f"line {lineno}", f"expected header 'rho,p_h', got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"line {lineno}", f"expected 2 columns, got {len(parts)}")
        try:
            r, p = float(parts[0]), float(parts[1])
        except ValueError:
            raise SchemaError(f"line {lineno}", f"non-numeric value in {line!r}") from None
        if not (math.isfinite(r) and math.isfinite(p)) or r < 0 or p < 0:
            raise SchemaError(f"line {lineno}", "values must be finite and non-negative")
        rho.append(r)
        p_h.append(p)
    if not header_seen:
        raise SchemaError("line 1", "missing header 'rho,p_h'")
    order = np.argsort(rho, kind="stable")
    return np.asarray(rho)[order], np.asarray(p_h)[order]


def write_transfer_csv(path, rho, p_h, comment=None) -> None:
    lines = [f"# {comment}"] if comment else []
    lines.append("rho,p_h")
    lines += [f"{r:.17g},{p:.17g}" for r, p in zip(rho, p_h)]
    Path(path).write_text("\n".join(lines) + "\n")


def detect_breakpoints(samples, p_h=None, window: int = 5) -> list:
    """Interior extrema of the moving-average-smoothed transfer curve.

    ``samples`` is a list of TransferSample sorted by rho, or a rho array
    together with ``p_h``. Returns the rho values (W) of sign changes of the
    smoothed discrete derivative; empty for monotone data.
    """
    rho, p = _as_arrays(samples, p_h)
    if rho.size < 9:
        raise ValueError("need at least 9 samples to detect breakpoints")
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    smooth = np.convolve(p, np.ones(window) / window, mode="valid")
    slope = np.sign(np.diff(smooth))
    # flat steps inherit the previous direction
    for i in range(1, slope.size):
        if slope[i] == 0:
            slope[i] = slope[i - 1]
    half = window // 2
    out = []
    for k in range(1, slope.size):
        if slope[k] != 0 and slope[k - 1] != 0 and slope[k] != slope[k - 1]:
            # smoothing shifts lopsided peaks; pin to the raw extremum nearby
            i = k + half
            lo, hi = max(0, i - window), min(p.size, i + window + 1)
            j = lo + int(np.argmax(p[lo:hi]) if slope[k - 1] > 0 else np.argmin(p[lo:hi]))
            out.append(float(rho[j]))
    return out


# fitting ----------------------------------------------------------------

_CHUNK_EVALS = 2000


def _segment_curve(v, u, phi, sign):
    B = phi + sign * math.exp(v[0])
    alpha, beta, theta = math.exp(v[1]), math.exp(v[2]), math.exp(v[3])
    return B + (phi - B) * (1.0 + theta * u**alpha) ** (-beta)


def _initial_points(u, p, phi, sign, restarts, rng):
    span = max(abs(p.max() - phi), abs(phi - p.min()), 1e-30)
    u_mid = max(np.median(u[u > 0]) if np.any(u > 0) else 1.0, 1e-30)
    starts = []
    for k in range(restarts):
        if k == 0:
            gap, alpha, beta, level = 1.05, 1.5, 0.8, 100.0
        else:
            gap = math.exp(rng.uniform(0.0, math.log(2.0)))
            alpha = math.exp(rng.uniform(math.log(0.5), math.log(3.0)))
            beta = math.exp(rng.uniform(math.log(0.2), math.log(2.0)))
            level = math.exp(rng.uniform(math.log(0.1), math.log(1e4)))
        theta = level / u_mid**alpha
        starts.append(np.log([span * gap, alpha, beta, theta]))
    return starts


def _fit_segment(u, p, phi, sign, scale, restarts, max_evals, rng):
    def objective(v):
        with np.errstate(over="ignore", invalid="ignore"):
            r = (_segment_curve(v, u, phi, sign) - p) / scale
        val = float(np.mean(r * r))
        return val if math.isfinite(val) else 1e300

    best = None
    for k, v0 in enumerate(_initial_points(u, p, phi, sign, restarts, rng)):
        history = []
        # Nelder-Mead in chunks, each restarted from the best vertex with a
        # function tolerance relative to the current objective: with noisy data
        # the objective floors at the noise variance and an absolute target would
        # sit below its roundoff. Restarting also unsticks the flat 5PL directions.
        x, evals, converged, fun = np.asarray(v0, dtype=float), 0, False, objective(v0)
        while evals < max_evals and not converged:
            res = minimize(
                objective,
                x,
                method="Nelder-Mead",
                callback=lambda xk: history.append(objective(xk)),
                options={
                    "maxfev": min(_CHUNK_EVALS, max_evals - evals),
                    "xatol": 1e-10,
                    "fatol": max(1e-24, 1e-12 * fun),
                    "adaptive": True,
                },
            )
            evals += res.nfev
            converged = res.status == 0
            if res.fun <= fun:
                x, fun = res.x, float(res.fun)
        cand = (fun, k, x, evals, converged, history)
        # lowest restart index wins ties
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def fit_model(
    samples,
    breakpoints,
    rho_max,
    p_h=None,
    rho_unit: str = "mW",
    seed: int = 0,
    restarts: int = 16,
    max_evals: int = 20_000,
) -> FitReport:
    """Least-squares fit of every segment's (B, alpha, beta, theta).

    Segments are fitted left to right; each one's start value Phi is the
    previous fitted segment's end value, and the sign of B - Phi follows the
    increasing/decreasing alternation. Parameters are optimised in log space
    (positivity) by Nelder-Mead with ``restarts`` starts drawn from ``seed``.
    Breakpoints and rho_max are in watts.
    """
    rho, p = _as_arrays(samples, p_h)
    if rho_unit not in RHO_UNITS:
        raise SchemaError("units.rho", f"unknown unit {rho_unit!r}")
    scale_w = RHO_UNITS[rho_unit]
    bps = [float(b) for b in breakpoints]
    if any(not 0 < b < rho_max for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise ValueError("breakpoints must be strictly increasing inside (0, rho_max)")
    edges_m = [0.0, *(b / scale_w for b in bps), rho_max / scale_w]
    rho_m = rho / scale_w
    y_scale = max(float(np.max(np.abs(p))), 1e-300)
    rng = np.random.default_rng(seed)

    segments, seg_rmse, seg_iters, histories = [], [], [], []
    converged_all = True
    phi = 0.0
    for n, (lo, hi) in enumerate(zip(edges_m[:-1], edges_m[1:])):
        last = n == len(edges_m) - 2
        mask = (rho_m >= lo) & ((rho_m <= hi) if last else (rho_m < hi))
        if mask.sum() < 5:
            raise ValueError(f"segment {n + 1} has {int(mask.sum())} samples; need >= 5")
        u, y = rho_m[mask] - lo, p[mask]
        sign = 1.0 if n % 2 == 0 else -1.0
        fun, _, v, evals, converged, history = _fit_segment(u, y, phi, sign, y_scale, restarts, max_evals, rng)
        converged_all &= converged
        B = phi + sign * math.exp(v[0])
        seg = LogisticSegment(B, *np.exp(v[1:]).tolist(), lo, hi, phi)
        segments.append(seg)
        seg_rmse.append(math.sqrt(fun) * y_scale)
        seg_iters.append(evals)
        histories.append(history)
        phi = seg.right_value()

    try:
        model = EhModel(tuple(segments), edges_m[-1], rho_unit)
    except InvariantError as exc:
        raise FitError(f"fitted model violates an invariant: {exc}") from exc
    resid = model.psi(np.minimum(rho, model.rho_max_w)) - p
    report = FitReport(
        model,
        float(math.sqrt(np.mean(resid * resid))),
        seg_rmse,
        int(sum(seg_iters)),
        seg_iters,
        histories,
    )
    if not converged_all:
        raise FitError("Nelder-Mead hit the evaluation limit on every restart", best=report)
    return report
