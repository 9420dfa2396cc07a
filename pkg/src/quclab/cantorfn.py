"""Finite-level Cantor (devil's staircase) function with exact piece tables.

``CantorProfile(level)`` realizes the level-L middle-thirds approximant
h_L : [0,1] -> [0,1] as an explicit piecewise-affine table (2^L ramps of
width 3^-L and slope (3/2)^L, flat in the removed gaps), extended to all
t >= 0 by h(t + k) = k + h(t).  The antiderivative H_L(t) = int_0^t h_L is
evaluated in closed form per piece, so downstream integrands built from
H_L carry no quadrature error.

sup_t |h_L - h_{L+1}| = 2^-L / 6, hence |h_L - h| <= 2^-L / 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


def _build_tables(level: int):
    """Breakpoints, left values, slopes and cumulative integrals on [0, 1].

    Pieces alternate ramp / gap: ramp starts are the left endpoints of the
    level-L Cantor intervals (ternary digits in {0, 2}), enumerated by an
    L-bit counter.
    """
    n_ramps = 1 << level
    bits = ((np.arange(n_ramps)[:, None] >> np.arange(level - 1, -1, -1)) & 1).astype(float)
    pow3 = 3.0 ** -np.arange(1, level + 1)
    pow2 = 2.0 ** -np.arange(1, level + 1)
    ramp_left = (2.0 * bits * pow3).sum(axis=1)
    ramp_val = (bits * pow2).sum(axis=1)
    width = 3.0 ** -level
    slope = 1.5 ** level

    order = np.argsort(ramp_left)
    ramp_left = ramp_left[order]
    ramp_val = ramp_val[order]

    # Interleave ramps with the gaps that follow them; the final "gap" is the
    # single point t = 1, kept as a zero-length sentinel piece of value 1.
    breaks = np.empty(2 * n_ramps + 1)
    vals = np.empty(2 * n_ramps + 1)
    slopes = np.empty(2 * n_ramps + 1)
    breaks[0::2][:n_ramps] = ramp_left
    breaks[1::2] = ramp_left + width
    breaks[-1] = 1.0
    vals[0::2][:n_ramps] = ramp_val
    vals[1::2] = ramp_val + 2.0 ** -level
    vals[-1] = 1.0
    slopes[0::2][:n_ramps] = slope
    slopes[1::2] = 0.0
    slopes[-1] = 0.0

    seg = np.diff(breaks, append=1.0)
    seg_int = vals * seg + 0.5 * slopes * seg * seg
    cumint = np.concatenate([[0.0], np.cumsum(seg_int)])[:-1]
    return breaks, vals, slopes, cumint


@dataclass(frozen=True)
class CantorProfile:
    """Level-L Cantor function, its slope field and exact antiderivative."""

    level: int
    _breaks: np.ndarray = field(repr=False, default=None)
    _vals: np.ndarray = field(repr=False, default=None)
    _slopes: np.ndarray = field(repr=False, default=None)
    _cumint: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.level < 1:
            raise InputError("level must be >= 1")
        if self.level > 26:
            raise InputError("level > 26 would need more than 2^27 table rows")
        breaks, vals, slopes, cumint = _build_tables(self.level)
        object.__setattr__(self, "_breaks", breaks)
        object.__setattr__(self, "_vals", vals)
        object.__setattr__(self, "_slopes", slopes)
        object.__setattr__(self, "_cumint", cumint)

    def _pieces(self, frac: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self._breaks, frac, side="right") - 1,
                       0, len(self._breaks) - 1)

    def h(self, t):
        """h_L(t) for t >= 0 (integer-shift extension h(t+k) = k + h(t))."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise InputError("the profile is defined for t >= 0")
        k = np.floor(t)
        frac = t - k
        j = self._pieces(frac)
        val = self._vals[j] + self._slopes[j] * (frac - self._breaks[j])
        out = k + np.minimum(val, 1.0)
        return float(out) if out.ndim == 0 else out

    def h_prime(self, t):
        """Slope of h_L; right-continuous at breakpoints ((3/2)^L on ramps, 0 in gaps)."""
        t = np.asarray(t, dtype=float)
        frac = t - np.floor(t)
        out = self._slopes[self._pieces(frac)]
        return float(out) if np.ndim(out) == 0 else out

    def H(self, t):
        """H_L(t) = int_0^t h_L, exact per affine/flat piece.

        For t = k + s with integer k and s in [0,1):
        H(t) = k(k-1)/2 + k H(1) + k s + H(s), with H(1) = 1/2 by symmetry.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise InputError("the profile is defined for t >= 0")
        k = np.floor(t)
        s = t - k
        j = self._pieces(s)
        ds = s - self._breaks[j]
        h_unit = self._cumint[j] + self._vals[j] * ds + 0.5 * self._slopes[j] * ds * ds
        out = 0.5 * k * (k - 1.0) + 0.5 * k + k * s + h_unit
        return float(out) if out.ndim == 0 else out

    @property
    def ramp_width(self) -> float:
        return 3.0 ** -self.level

    @property
    def ramp_slope(self) -> float:
        return 1.5 ** self.level

    def breakpoints_in(self, lo: float, hi: float) -> np.ndarray:
        """All kink abscissae of h_L inside [lo, hi] (for quadrature splitting)."""
        if hi <= lo:
            return np.empty(0)
        out = []
        for k in range(int(np.floor(lo)), int(np.floor(hi)) + 1):
            b = k + self._breaks
            out.append(b[(b >= lo) & (b <= hi)])
        return np.unique(np.concatenate(out)) if out else np.empty(0)


def cantor_h(level: int, t):
    """Level-L Cantor function value(s); thin wrapper over CantorProfile."""
    return CantorProfile(level).h(t)
