"""Free-space link budget and Rician small-scale fading."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class LinkBudget:
    """Line-of-sight THz link; defaults are the evaluation setup of the RTD study."""

    g_tx: float = 100.0
    g_rx: float = 100.0
    f_c: float = 100e9
    d: float = 0.3
    c_l: float = SPEED_OF_LIGHT
    rician_k: float = 1.0

    def __post_init__(self):
        for name in ("g_tx", "g_rx", "f_c", "d", "c_l"):
            if not getattr(self, name) > 0:
                raise ValueError(f"LinkBudget.{name} must be positive")
        if not self.rician_k >= 0:
            raise ValueError("LinkBudget.rician_k must be non-negative")


@dataclass(frozen=True)
class ChannelDraw:
    h_mag: float

    def __post_init__(self):
        if not self.h_mag >= 0:
            raise ValueError("h_mag must be non-negative")


def large_scale_gain(lb: LinkBudget) -> float:
    """Amplitude gain c_l / (4 pi d f_c) * sqrt(G_T G_R)."""
    return lb.c_l / (4.0 * math.pi * lb.d * lb.f_c) * math.sqrt(lb.g_tx * lb.g_rx)


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for realization ``index``, derived from ``seed``.

    Streams depend only on (seed, index), so realizations can be drawn in
    any order or in parallel without changing results.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def sample_small_scale(rician_k: float, rng: np.random.Generator, size=None):
    """Draw |h_hat| with h_hat = sqrt(K/(K+1)) + w, w ~ CN(0, 1/(K+1)).

    E|h_hat|^2 = 1 for every K; K = 0 is Rayleigh fading.
    """
    if rician_k < 0:
        raise ValueError("rician_k must be non-negative")
    los = math.sqrt(rician_k / (rician_k + 1.0))
    std = math.sqrt(0.5 / (rician_k + 1.0))
    re = rng.normal(los, std, size)
    im = rng.normal(0.0, std, size)
    return np.hypot(re, im) if size is not None else float(math.hypot(re, im))


def draw_channel(lb: LinkBudget, rng: np.random.Generator) -> ChannelDraw:
    return ChannelDraw(large_scale_gain(lb) * sample_small_scale(lb.rician_k, rng))


def effective_amplitude_cap(A: float, h_mag: float, rho_max: float) -> float:
    """min(A, sqrt(rho_max)/|h|), rounded down so that (|h| A_bar)^2 <= rho_max holds exactly."""
    if not (A > 0 and h_mag > 0 and rho_max > 0):
        raise ValueError("A, h_mag and rho_max must be positive")
    a_bar = min(A, math.sqrt(rho_max) / h_mag)
    while (h_mag * a_bar) ** 2 > rho_max:
        a_bar = math.nextafter(a_bar, 0.0)
    return a_bar
