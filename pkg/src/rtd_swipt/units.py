"""Parsing of unit-suffixed scalars used in configs and on the command line."""

from __future__ import annotations

import re

_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"

_POWER = {"": 1.0, "W": 1.0, "mW": 1e-3, "uW": 1e-6, "nW": 1e-9}
_FREQ = {"": 1.0, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_LENGTH = {"": 1.0, "m": 1.0, "cm": 1e-2, "mm": 1e-3}
_VOLT = {"": 1.0, "V": 1.0, "mV": 1e-3}


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _split(text: str):
    m = re.fullmatch(_NUM + r"\s*([A-Za-z]*)", str(text).strip())
    if not m:
        raise ValueError(f"cannot parse quantity {text!r}")
    return float(m.group(1)), m.group(2)


def _scaled(text, table, what):
    value, suffix = _split(text)
    if suffix not in table:
        raise ValueError(f"unknown {what} unit {suffix!r} in {text!r}")
    return value * table[suffix]


def parse_power(text) -> float:
    """Watts from '1e-8', '1e-8W', '0.01mW' or '-50dBm'."""
    value, suffix = _split(text)
    if suffix == "dBm":
        return dbm_to_watts(value)
    if suffix not in _POWER:
        raise ValueError(f"unknown power unit {suffix!r} in {text!r}")
    return value * _POWER[suffix]


def parse_gain(text) -> float:
    """Linear gain from '100' or '20dB'."""
    value, suffix = _split(text)
    if suffix == "dB":
        return 10.0 ** (value / 10.0)
    if suffix:
        raise ValueError(f"unknown gain unit {suffix!r} in {text!r}")
    return value


def parse_frequency(text) -> float:
    return _scaled(text, _FREQ, "frequency")


def parse_length(text) -> float:
    return _scaled(text, _LENGTH, "length")


def parse_voltage(text) -> float:
    return _scaled(text, _VOLT, "voltage")
