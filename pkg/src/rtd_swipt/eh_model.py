"""Piecewise 5-parameter-logistic energy-harvesting transfer function.

Harvested power psi(rho) is built from N monotone segments

    phi_n(rho) = B_n + (Phi_n - B_n) * (1 + theta_n * u^alpha_n)^(-beta_n),
    u = rho - rho_{n-1}   (model units),

on [rho_{n-1}, rho_n) (the last segment is closed at rho_max). Phi_1 = 0 and
Phi_n is the value of the previous segment at its right boundary, so psi is
continuous by construction. Odd segments increase, even segments decrease.

Segment boundaries are stored in the model's declared ``rho_unit`` (the unit
the fitted theta values refer to, and the unit of model files), so a model
round-trips through its file bit-exactly. Evaluation functions take received
power in watts; ``breakpoints_w`` / ``rho_max_w`` give the boundaries in watts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BreakdownError, InvariantError, RangeError, SchemaError

RHO_UNITS = {"W": 1.0, "mW": 1e-3}


@dataclass(frozen=True)
class LogisticSegment:
    B: float
    alpha: float
    beta: float
    theta: float
    rho_lo: float
    rho_hi: float
    phi: float

    @property
    def increasing(self) -> bool:
        return self.B > self.phi

    def __call__(self, rho):
        u = np.maximum(np.asarray(rho, dtype=float) - self.rho_lo, 0.0)
        val = self.B + (self.phi - self.B) * (1.0 + self.theta * u**self.alpha) ** (-self.beta)
        return float(val) if np.ndim(val) == 0 else val

    def right_value(self) -> float:
        """Limit of the segment at rho_hi (the next segment's Phi)."""
        return self(self.rho_hi)

    def inverse(self, target):
        """Closed-form 5PL inverse; ``target`` must lie between phi and B."""
        t = np.asarray(target, dtype=float)
        # (1 - w)^(-1/beta) - 1 via expm1/log1p: no cancellation for targets near Phi
        w = (t - self.phi) / (self.B - self.phi)
        with np.errstate(divide="ignore"):
            inner = np.maximum(np.expm1(-np.log1p(-w) / self.beta), 0.0) / self.theta
        rho = self.rho_lo + inner ** (1.0 / self.alpha)
        return float(rho) if np.ndim(rho) == 0 else rho


@dataclass(frozen=True)
class EhModel:
    segments: tuple
    rho_max: float
    rho_unit: str = "mW"
    power_unit: str = "W"

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        _check_invariants(self)

    # construction -----------------------------------------------------

    @classmethod
    def from_parameters(cls, params, breakpoints, rho_max, rho_unit="mW"):
        """Build a model from per-segment (B, alpha, beta, theta) tuples.

        ``breakpoints`` are the interior boundaries rho_1 < ... < rho_{N-1}
        and ``rho_max`` the breakdown bound, both in ``rho_unit``. Phi values
        are propagated left to right.
        """
        if rho_unit not in RHO_UNITS:
            raise SchemaError("units.rho", f"unknown unit {rho_unit!r}")
        params = [tuple(float(v) for v in p) for p in params]
        edges = [0.0, *(float(b) for b in breakpoints), float(rho_max)]
        if len(params) != len(edges) - 1:
            raise SchemaError("segments", f"expected {len(edges) - 1} segments, got {len(params)}")
        segments = []
        phi = 0.0
        for (B, alpha, beta, theta), lo, hi in zip(params, edges[:-1], edges[1:]):
            seg = LogisticSegment(B, alpha, beta, theta, lo, hi, phi)
            segments.append(seg)
            if hi > lo:
                phi = seg.right_value()
        return cls(tuple(segments), float(rho_max), rho_unit)

    # views ------------------------------------------------------------

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def breakpoints(self) -> list:
        return [s.rho_lo for s in self.segments[1:]]

    @property
    def parameters(self) -> list:
        return [(s.B, s.alpha, s.beta, s.theta) for s in self.segments]

    @property
    def rho_scale(self) -> float:
        """Watts per model unit of received power."""
        return RHO_UNITS[self.rho_unit]

    @property
    def rho_max_w(self) -> float:
        return self.rho_max * self.rho_scale

    @property
    def breakpoints_w(self) -> list:
        return [b * self.rho_scale for b in self.breakpoints]

    def to_model_units(self, rho_w):
        """Convert watts to model units, clipped into [0, rho_max]."""
        return np.minimum(np.asarray(rho_w, dtype=float) / self.rho_scale, self.rho_max)

    def with_rho_max(self, rho_max):
        return EhModel.from_parameters(self.parameters, self.breakpoints, rho_max, self.rho_unit)

    # evaluation -------------------------------------------------------

    def segment_index(self, rho_m):
        """Index of the segment owning ``rho_m`` (model units).

        Boundaries belong to the right segment, rho_max to the last one.
        """
        return np.searchsorted(np.asarray(self.breakpoints), rho_m, side="right")

    def psi(self, rho):
        """Harvested power (W) at received power ``rho`` (W); vectorised."""
        r = np.asarray(rho, dtype=float)
        if np.any(r < 0):
            raise ValueError("received power must be non-negative")
        if np.any(r > self.rho_max_w):
            raise BreakdownError(
                f"received power {float(np.max(r)):.6g} W exceeds breakdown bound {self.rho_max_w:.6g} W"
            )
        out = self.psi_model_units(self.to_model_units(r))
        out = np.where(r == 0, 0.0, out)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = psi

    def psi_model_units(self, r):
        """psi with the argument already in model units, no range checks."""
        r = np.asarray(r, dtype=float)
        if self.n_segments == 1:
            out = self.segments[0](r)
        else:
            idx = self.segment_index(r)
            out = np.empty(r.shape)
            for n, seg in enumerate(self.segments):
                mask = idx == n
                if np.any(mask):
                    out[mask] = seg(r[mask])
        return out

    def peak_values(self):
        """(rho_n in W, psi limit) at the right end of every increasing segment."""
        return [(s.rho_hi * self.rho_scale, s.right_value()) for s in self.segments if s.increasing]

    def running_max(self, rho):
        """max_{r in [0, rho]} psi(r); vectorised over ``rho``."""
        r = np.asarray(rho, dtype=float)
        out = np.asarray(self.psi(r), dtype=float)
        for rho_n, val in self.peak_values():
            out = np.where(r >= rho_n, np.maximum(out, val), out)
        return float(out) if np.ndim(out) == 0 else out

    def smallest_preimage(self, target, rho_cap=None):
        """Smallest rho <= rho_cap (both W) with psi(rho) = target.

        psi is continuous with psi(0) = 0, so the first crossing of any level
        lies on an increasing segment and the closed-form inverse applies.
        """
        cap_w = self.rho_max_w if rho_cap is None else min(float(rho_cap), self.rho_max_w)
        cap = float(self.to_model_units(cap_w))
        target = float(target)
        if target <= 0:
            return 0.0
        for seg in self.segments:
            if seg.rho_lo > cap:
                break
            if not seg.increasing:
                continue
            hi = min(seg.rho_hi, cap)
            top = seg(hi)
            if target <= top:
                rho_m = min(max(seg.inverse(target), seg.rho_lo), hi)
                return min(rho_m * self.rho_scale, cap_w)
        raise RangeError(f"target {target:.6g} W is not reached on [0, {cap_w:.6g}] W")


def _check_invariants(model: EhModel):
    segs = model.segments
    if len(segs) < 1:
        raise InvariantError("segment-count", "model needs at least one segment")
    if model.rho_unit not in RHO_UNITS:
        raise InvariantError("units", f"unknown rho unit {model.rho_unit!r}")
    if model.power_unit != "W":
        raise InvariantError("units", f"unsupported power unit {model.power_unit!r}")
    if segs[0].rho_lo != 0.0:
        raise InvariantError("partition", "first segment must start at rho = 0")
    if segs[-1].rho_hi != model.rho_max:
        raise InvariantError("partition", "last segment must end at rho_max")
    if segs[0].phi != 0.0:
        raise InvariantError("continuity", "Phi_1 must be 0")
    for n, seg in enumerate(segs):
        if not seg.rho_lo < seg.rho_hi:
            raise InvariantError("ordering", f"segment {n + 1}: rho_lo must be < rho_hi")
        for name in ("alpha", "beta", "theta"):
            v = getattr(seg, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvariantError("positivity", f"segment {n + 1}: {name} must be positive")
        if n > 0:
            prev = segs[n - 1]
            if prev.rho_hi != seg.rho_lo:
                raise InvariantError("partition", f"segments {n} and {n + 1} are not adjacent")
            if not math.isclose(seg.phi, prev.right_value(), rel_tol=1e-12, abs_tol=0.0):
                raise InvariantError("continuity", f"segment {n + 1}: Phi differs from previous segment end")
        want_increasing = n % 2 == 0
        if seg.B == seg.phi or seg.increasing != want_increasing:
            kind = "increasing" if want_increasing else "decreasing"
            raise InvariantError("alternation", f"segment {n + 1} must be {kind} (check B against Phi)")


# module-level operations ------------------------------------------------


def eval_psi(model: EhModel, rho):
    return model.psi(rho)


def p_max(model: EhModel, rho_cap: float) -> float:
    """Largest harvested power reachable with received power in [0, rho_cap]."""
    if rho_cap < 0:
        raise ValueError("rho_cap must be non-negative")
    return model.running_max(min(float(rho_cap), model.rho_max_w))


def invert_first_segment(model: EhModel, target: float, rho_cap=None) -> float:
    """Unique received power (W) in the first segment with psi(rho) = target."""
    seg = model.segments[0]
    hi = seg.rho_hi if rho_cap is None else min(seg.rho_hi, float(model.to_model_units(rho_cap)))
    top = seg(hi)
    if target < 0 or target > top * (1 + 1e-15):
        raise RangeError(f"target {target:.6g} W outside first-segment range [0, {top:.6g}] W")
    if target == 0:
        return 0.0
    return min(seg.inverse(target), hi) * model.rho_scale


TABLE_I = dict(
    params=[(7.16e-5, 1.432, 0.778, 2174.86), (2.5e-5, 1.841, 0.445, 956.75)],
    breakpoints=[1.8],
    rho_max=2.4,
    rho_unit="mW",
)


def table_i_model() -> EhModel:
    """Tuned RTD model: N = 2, rho_1 = 1.8 mW, rho_max = 2.4 mW."""
    return EhModel.from_parameters(**TABLE_I)


# persistence ------------------------------------------------------------


def _num(x: float) -> str:
    return format(float(x), ".17g")


def dumps_model(model: EhModel) -> str:
    bps = ", ".join(_num(b) for b in model.breakpoints)
    segs = ",\n".join(
        "    {"
        + ", ".join(f'"{k}": {_num(v)}' for k, v in zip(("B", "alpha", "beta", "theta"), p))
        + "}"
        for p in model.parameters
    )
    return (
        "{\n"
        f'  "units": {{"rho": "{model.rho_unit}", "power": "{model.power_unit}"}},\n'
        f'  "rho_max": {_num(model.rho_max)},\n'
        f'  "breakpoints": [{bps}],\n'
        f'  "segments": [\n{segs}\n  ]\n'
        "}\n"
    )


def save_model(model: EhModel, path) -> None:
    _check_invariants(model)
    Path(path).write_text(dumps_model(model))


def _require(obj, key, path, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing field")
    val = obj[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise SchemaError(f"{path}.{key}" if path else key, "expected a number")
        return float(val)
    if not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return val


def loads_model(text: str) -> EhModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    units = _require(data, "units", "", dict)
    rho_unit = _require(units, "rho", "units", str)
    power_unit = _require(units, "power", "units", str)
    if rho_unit not in RHO_UNITS:
        raise SchemaError("units.rho", f"unknown unit {rho_unit!r}")
    if power_unit != "W":
        raise SchemaError("units.power", f"unsupported unit {power_unit!r}")
    rho_max = _require(data, "rho_max", "", float)
    bps = _require(data, "breakpoints", "", list)
    for i, b in enumerate(bps):
        if isinstance(b, bool) or not isinstance(b, (int, float)):
            raise SchemaError(f"breakpoints[{i}]", "expected a number")
    segs = _require(data, "segments", "", list)
    params = []
    for i, s in enumerate(segs):
        params.append(tuple(_require(s, k, f"segments[{i}]", float) for k in ("B", "alpha", "beta", "theta")))
    if len(params) != len(bps) + 1:
        raise SchemaError("segments", f"expected {len(bps) + 1} segments for {len(bps)} breakpoints")
    edges = [0.0, *[float(b) for b in bps], rho_max]
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        if not lo < hi:
            raise InvariantError("ordering", f"segment {i + 1}: rho_lo must be < rho_hi")
    return EhModel.from_parameters(params, [float(b) for b in bps], rho_max, rho_unit)


def load_model(path) -> EhModel:
    return loads_model(Path(path).read_text())
