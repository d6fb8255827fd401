"""Working precision and double-double phase reduction.

High-level quantities (coefficients, bounds) are computed with mpmath at
the package working precision (``DEFAULT_DPS`` digits unless changed with
``set_dps``).  Long exponential sums are evaluated with
numpy: ``log n`` is tabulated once as a double-double pair (hi, lo) from a
40+ digit mpmath value, the phase ``tau * log n`` is formed with an
error-free product, and only the reduced fractional part goes through
double-precision trig.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

import mpmath
import numpy as np
from mpmath import mp, mpf

DEFAULT_DPS = 40
MIN_DPS = 30
_dps = DEFAULT_DPS

# 2**27 + 1, Dekker's splitting constant for binary64
_SPLITTER = 134217729.0
EPS = 2.0 ** -53


def get_dps() -> int:
    return _dps


def set_dps(dps: int) -> None:
    """Set the package-wide working precision used when no explicit ``dps`` is given."""
    global _dps
    if int(dps) < MIN_DPS:
        raise ValueError(f"precision must be at least {MIN_DPS} digits, got {dps}")
    _dps = int(dps)


@contextmanager
def workdps(dps: int | None = None):
    """Run a block at ``dps`` decimal digits (default: the package working precision)."""
    dps = _dps if dps is None else int(dps)
    if dps < MIN_DPS:
        raise ValueError(f"precision must be at least {MIN_DPS} digits, got {dps}")
    with mp.workdps(dps):
        yield


def to_mpf(x) -> mpf:
    """Convert ``x`` exactly (floats keep their binary value, strings are parsed)."""
    return mpf(x) if not isinstance(x, mpf) else x


def to_dd(x) -> tuple[float, float]:
    """Split an mpmath number into a double-double pair with hi + lo == x to ~106 bits."""
    x = to_mpf(x)
    hi = float(x)
    lo = float(x - hi)
    return hi, lo


def split(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Error-free product: returns (p, e) with p + e == a * b exactly."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def two_sum(a, b) -> tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


class LogTable:
    """Lazily grown table of log(n) for n = 0, 1, 2, ... as double-double pairs.

    Entry 0 is a placeholder (log 0 is never requested).  The table is shared
    process-wide and guarded by a lock; growth doubles the size so repeated
    requests amortise.
    """

    def __init__(self, dps: int = DEFAULT_DPS):
        self._dps = dps
        self._table = (np.zeros(1), np.zeros(1))
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._table[0])

    def _grow(self, n_max: int) -> None:
        old_hi, old_lo = self._table
        size = max(n_max + 1, 2 * len(old_hi), 1024)
        start = len(old_hi)
        hi = np.empty(size - start)
        lo = np.empty(size - start)
        with mp.workdps(self._dps):
            log = mpmath.log
            for i, n in enumerate(range(start, size)):
                v = log(n)
                h = float(v)
                hi[i] = h
                lo[i] = float(v - h)
        self._table = (np.concatenate([old_hi, hi]), np.concatenate([old_lo, lo]))

    def lookup(self, n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = np.asarray(n, dtype=np.int64)
        if n.size and n.min() < 1:
            raise ValueError("log table only covers positive integers")
        top = int(n.max()) if n.size else 0
        if top >= len(self):
            with self._lock:
                if top >= len(self):
                    self._grow(top)
        hi, lo = self._table
        return hi[n], lo[n]


LOG_TABLE = LogTable()


def frac_turns(tau: tuple[float, float], log_hi: np.ndarray, log_lo: np.ndarray) -> np.ndarray:
    """Fractional part in [0, 1) of ``tau * log`` with both factors double-double.

    The absolute error is a few units of 2**-53 plus 2**-104 * |tau * log|,
    so phases up to ~1e13 turns keep ~16 correct fractional digits.
    """
    th, tl = tau
    p, e = two_prod(th, log_hi)
    e = e + (th * log_lo + tl * log_hi)
    f = p - np.floor(p)
    f = f + e
    return f - np.floor(f)


def frac_rounding_bound(max_turns: float) -> float:
    """Bound on the absolute error of ``frac_turns`` for phases up to ``max_turns``."""
    return 8.0 * EPS + 4.0 * 2.0 ** -104 * abs(max_turns)
