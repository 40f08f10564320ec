"""Unit conventions and conversions.

All frequencies are angular frequencies in rad/ns, all times in ns.
Lab-frequency inputs (MHz, GHz, kHz) convert via 2*pi and the appropriate
power of ten, e.g. X MHz -> 2*pi*X*1e-3 rad/ns.
"""

import math

TWO_PI = 2.0 * math.pi


def mhz(x: float) -> float:
    """X MHz as angular frequency in rad/ns."""
    return TWO_PI * x * 1e-3


def ghz(x: float) -> float:
    """X GHz as angular frequency in rad/ns."""
    return TWO_PI * x


def khz(x: float) -> float:
    """X kHz as angular frequency in rad/ns."""
    return TWO_PI * x * 1e-6
