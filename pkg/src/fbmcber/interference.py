"""Intrinsic interference of an FBMC grid.

The element eps[m, n] is the real projection of the pulse at subcarrier
offset m and half-symbol time offset n onto the reference pulse.  With
the quarter-turn phase map phi[m, n] = (pi/2)(m + n) it reduces to

    eps[m, n] = cos(phi[m, n]) * sum_k p[k - n*M/2] * p[k] * cos(2*pi*m*kbar/M)

with kbar = k - (L_p - 1)/2.  The phase cosine is one of {1, 0, -1} and
is applied exactly, so elements with odd m + n are exactly zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .filters import PrototypeFilter

__all__ = [
    "FbmcGrid",
    "Pulse",
    "InterferenceTable",
    "pulse",
    "inner_product",
    "epsilon",
    "build_set",
    "set_size",
    "truncate",
    "sir",
    "ordered_magnitudes",
    "export_table_csv",
]

NULL_THRESHOLD = 1e-15

_COS_QUARTER = (1.0, 0.0, -1.0, 0.0)
_SIN_QUARTER = (0.0, 1.0, 0.0, -1.0)


@dataclass(frozen=True)
class FbmcGrid:
    """Subcarrier/half-symbol lattice with phase map phi = (pi/2)(m + n)."""

    subcarriers: int
    filter: PrototypeFilter

    def __post_init__(self):
        if self.subcarriers < 2 or self.subcarriers % 2:
            raise ValueError(
                f"subcarrier count must be even and >= 2, got {self.subcarriers}"
            )
        k, m = self.filter.overlap, self.subcarriers
        if self.filter.length not in (k * m - 1, k * m, k * m + 1):
            raise ValueError(
                f"filter length {self.filter.length} incompatible with "
                f"K={k}, M={m} (expected K*M-1, K*M or K*M+1)"
            )

    @property
    def half_symbol(self) -> int:
        return self.subcarriers // 2

    @property
    def time_span(self) -> int:
        """Largest |n| with a possibly nonzero element, per the set bound."""
        return -(-(self.filter.length - 1) // self.half_symbol) - 1


@dataclass(frozen=True)
class Pulse:
    """Complex pulse samples with their start index on the global axis."""

    start: int
    samples: np.ndarray

    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)


def pulse(grid: FbmcGrid, m: int, n: int) -> Pulse:
    """Pulse p[m, n]: shifted by n*M/2, modulated to subcarrier m."""
    if not 0 <= m < grid.subcarriers:
        raise ValueError(f"subcarrier index {m} outside [0, {grid.subcarriers})")
    taps = grid.filter.coeffs
    lp = taps.size
    start = n * grid.half_symbol
    k = np.arange(lp) + start
    kbar = k - (lp - 1) / 2.0
    phase = 2.0 * np.pi * m * kbar / grid.subcarriers + 0.5 * np.pi * (m + n)
    return Pulse(start, taps * np.exp(1j * phase))


def inner_product(a: Pulse, b: Pulse) -> complex:
    """<a|b> = sum a[k] conj(b[k]) over the overlapping support."""
    lo = max(a.start, b.start)
    hi = min(a.start + a.samples.size, b.start + b.samples.size)
    if hi <= lo:
        return 0.0 + 0.0j
    return complex(
        np.vdot(b.samples[lo - b.start : hi - b.start],
                a.samples[lo - a.start : hi - a.start])
    )


def epsilon(grid: FbmcGrid, m: int, n: int) -> float:
    """Interference element eps[m, n]; (0, 0) gives the pulse energy."""
    cos_phi = _COS_QUARTER[(m + n) % 4]
    if cos_phi == 0.0:
        return 0.0
    taps = grid.filter.coeffs
    lp = taps.size
    shift = n * grid.half_symbol
    lo = max(0, shift)
    hi = min(lp, lp + shift)
    if hi <= lo:
        return 0.0
    k = np.arange(lo, hi)
    kbar = k - (lp - 1) / 2.0
    overlap = taps[lo:hi] * taps[lo - shift : hi - shift]
    s = float(np.dot(overlap, np.cos(2.0 * np.pi * m * kbar / grid.subcarriers)))
    return cos_phi * s


@dataclass(frozen=True)
class InterferenceTable:
    """Nonzero-candidate interference elements of a grid.

    Entries cover 0 <= m < M, |n| <= time span, m + n even, excluding
    (0, 0).  Entries whose magnitude falls below NULL_THRESHOLD are kept
    but flagged through null_mask().
    """

    m: np.ndarray
    n: np.ndarray
    eps: np.ndarray
    eps00: float
    grid: FbmcGrid

    def __post_init__(self):
        for name in ("m", "n", "eps"):
            arr = getattr(self, name)
            arr = np.asarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.eps.size

    def null_mask(self) -> np.ndarray:
        return np.abs(self.eps) < NULL_THRESHOLD

    def interference_energy(self) -> float:
        return float(np.dot(self.eps, self.eps))


def build_set(grid: FbmcGrid) -> InterferenceTable:
    """All interference elements allowed by support and parity."""
    span = grid.time_span
    ms, ns, vals = [], [], []
    for n in range(-span, span + 1):
        for m in range(grid.subcarriers):
            if (m + n) % 2 or (m == 0 and n == 0):
                continue
            ms.append(m)
            ns.append(n)
            vals.append(epsilon(grid, m, n))
    return InterferenceTable(
        np.array(ms, dtype=np.int64),
        np.array(ns, dtype=np.int64),
        np.array(vals, dtype=np.float64),
        epsilon(grid, 0, 0),
        grid,
    )


def set_size(M: int, L_p: int) -> int:
    """Element count M*(ceil((L_p-1)/(M/2)) - 1/2) - 1; degenerate -> 0."""
    if M < 2 or M % 2:
        raise ValueError(f"subcarrier count must be even and >= 2, got {M}")
    if L_p <= M // 2:
        raise ValueError(f"filter length {L_p} must exceed M/2 = {M // 2}")
    span_blocks = -(-(L_p - 1) // (M // 2))
    count = M * span_blocks - M // 2 - 1
    if count <= 0:
        warnings.warn(
            f"degenerate geometry (M={M}, L_p={L_p}): no interference elements",
            stacklevel=2,
        )
        return 0
    return count


def truncate(table: InterferenceTable, kmax: int) -> InterferenceTable:
    """Keep the kmax largest-|eps| entries (numerical nulls dropped).

    Ties are broken by (|n| asc, m asc, n asc) so the selection is
    deterministic across platforms.
    """
    if not 0 <= kmax <= len(table):
        raise ValueError(f"kmax={kmax} outside [0, {len(table)}]")
    live = ~table.null_mask()
    mags = np.abs(table.eps)
    order = np.lexsort((table.n[live], table.m[live],
                        np.abs(table.n[live]), -mags[live]))
    keep = order[:kmax]
    return InterferenceTable(
        table.m[live][keep], table.n[live][keep], table.eps[live][keep],
        table.eps00, table.grid,
    )


def sir(table: InterferenceTable) -> float:
    """Self-interference ratio 10*log10(eps00^2 / sum eps^2) in dB."""
    energy = table.interference_energy()
    if energy == 0.0:
        return math.inf
    return 10.0 * math.log10(table.eps00**2 / energy)


def ordered_magnitudes(table: InterferenceTable) -> np.ndarray:
    """|eps| sorted descending (the decay profile of the table)."""
    return np.sort(np.abs(table.eps))[::-1]


def export_table_csv(table: InterferenceTable, path):
    """CSV with columns m, n, epsilon (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write("m,n,epsilon\n")
        for m, n, e in zip(table.m, table.n, table.eps):
            fh.write(f"{m},{n},{e:.17e}\n")
