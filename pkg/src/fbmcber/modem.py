"""Baseband mapping and multiplexing chains.

Gray PAM/QAM bit mapping, FBMC synthesis/analysis by direct pulse
superposition, and cyclic-prefix OFDM with unitary transforms.  Bit
groups are LSB-first; the Gray codeword of ascending level index i is
i ^ (i >> 1), identical for PAM and each QAM dimension.
"""

from __future__ import annotations

import numpy as np

from .constellations import PamConstellation, QamConstellation
from .errors import RangeError, ShapeError
from .interference import FbmcGrid

__all__ = [
    "pam_map",
    "pam_demap",
    "qam_map",
    "qam_demap",
    "fbmc_synthesize",
    "fbmc_analyze",
    "fbmc_signal_length",
    "ofdm_modulate",
    "ofdm_demodulate",
    "PulseBank",
]

_I4 = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])


def _bits_matrix(bits, bits_per_symbol: int) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.size % bits_per_symbol:
        raise ShapeError(
            f"bit count {bits.size} not divisible by {bits_per_symbol}"
        )
    return bits.reshape(-1, bits_per_symbol)


def _gray_inverse(pam: PamConstellation) -> np.ndarray:
    inv = np.empty(pam.order, dtype=np.int64)
    inv[pam.gray_codes] = np.arange(pam.order)
    return inv


def pam_map(bits, pam: PamConstellation) -> np.ndarray:
    """Gray-coded PAM levels from bits (LSB-first groups of N_b)."""
    groups = _bits_matrix(bits, pam.bits_per_symbol)
    codes = groups @ (1 << np.arange(pam.bits_per_symbol))
    return pam.levels[_gray_inverse(pam)[codes]]


def pam_demap(values, pam: PamConstellation) -> np.ndarray:
    """Minimum-distance slicing then Gray decode, LSB-first bits."""
    values = np.asarray(values, dtype=np.float64).ravel()
    idx = np.clip(np.rint((values + pam.order - 1) / 2.0), 0, pam.order - 1)
    codes = pam.gray_codes[idx.astype(np.int64)]
    shifts = np.arange(pam.bits_per_symbol)
    return ((codes[:, None] >> shifts) & 1).ravel()


def qam_map(bits, qam: QamConstellation) -> np.ndarray:
    """Square QAM symbols; first N_b bits map in-phase, next N_b quadrature."""
    groups = _bits_matrix(bits, qam.bits_per_symbol)
    half = qam.pam.bits_per_symbol
    i_part = pam_map(groups[:, :half].ravel(), qam.pam)
    q_part = pam_map(groups[:, half:].ravel(), qam.pam)
    return i_part + 1j * q_part


def qam_demap(values, qam: QamConstellation) -> np.ndarray:
    values = np.asarray(values).ravel()
    i_bits = pam_demap(values.real, qam.pam).reshape(values.size, -1)
    q_bits = pam_demap(values.imag, qam.pam).reshape(values.size, -1)
    return np.concatenate([i_bits, q_bits], axis=1).ravel()


# ---------------------------------------------------------------------------
# FBMC

class PulseBank:
    """Modulated prototypes and per-slot phase factors of a grid.

    bank.q[m, j] = p[j] * exp(2j*pi*m*(j - (L_p-1)/2)/M); the pulse at
    slot (m, n) is chi[m, n] * q[m] placed at sample offset n*M/2 with
    chi[m, n] = i**(2*m*n + m + n).
    """

    def __init__(self, grid: FbmcGrid):
        self.grid = grid
        taps = grid.filter.coeffs
        lp = taps.size
        m = np.arange(grid.subcarriers)[:, None]
        jbar = np.arange(lp)[None, :] - (lp - 1) / 2.0
        self.q = taps[None, :] * np.exp(
            2j * np.pi * m * jbar / grid.subcarriers
        )

    def chi(self, n_symbols: int) -> np.ndarray:
        m = np.arange(self.grid.subcarriers)[:, None]
        n = np.arange(n_symbols)[None, :]
        return _I4[(2 * m * n + m + n) % 4]


def fbmc_signal_length(grid: FbmcGrid, n_symbols: int) -> int:
    return (n_symbols - 1) * grid.half_symbol + grid.filter.length


def fbmc_synthesize(symbols, grid: FbmcGrid, bank: PulseBank | None = None):
    """Superpose all pulses: s = sum_{m,n} a[m,n] p[m,n].

    symbols may be (M, N) for one frame or (B, M, N) for a batch; the
    returned signal is (L,) or (B, L) accordingly.
    """
    a = np.asarray(symbols)
    if np.iscomplexobj(a):
        raise ShapeError("FBMC symbols must be real-valued PAM amplitudes")
    single = a.ndim == 2
    if single:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != grid.subcarriers:
        raise ShapeError(
            f"symbol array must be (M, N) or (B, M, N) with M={grid.subcarriers}, "
            f"got {np.asarray(symbols).shape}"
        )
    bank = bank or PulseBank(grid)
    n_symbols = a.shape[2]
    weighted = a * bank.chi(n_symbols)[None, :, :]
    per_slot = np.einsum("bmn,mj->bnj", weighted, bank.q)
    signal = np.zeros((a.shape[0], fbmc_signal_length(grid, n_symbols)),
                      dtype=np.complex128)
    lp = grid.filter.length
    for n in range(n_symbols):
        start = n * grid.half_symbol
        signal[:, start : start + lp] += per_slot[:, n, :]
    return signal[0] if single else signal


def fbmc_analyze_frame(signal, grid: FbmcGrid, n_symbols: int,
                       bank: PulseBank | None = None) -> np.ndarray:
    """Complex projections <x|p[m,n]> for all slots of a frame (pre-slicing)."""
    x = np.asarray(signal, dtype=np.complex128)
    single = x.ndim == 1
    if single:
        x = x[None]
    needed = fbmc_signal_length(grid, n_symbols)
    if x.shape[1] < needed:
        raise RangeError(f"signal length {x.shape[1]} < required {needed}")
    bank = bank or PulseBank(grid)
    lp = grid.filter.length
    qh = bank.q.conj().T
    out = np.empty((x.shape[0], grid.subcarriers, n_symbols), dtype=np.complex128)
    for n in range(n_symbols):
        start = n * grid.half_symbol
        out[:, :, n] = x[:, start : start + lp] @ qh
    out *= bank.chi(n_symbols).conj()[None, :, :]
    return out[0] if single else out


def fbmc_analyze(signal, grid: FbmcGrid, m0: int, n0: int) -> float:
    """Re<x | p[m0, n0]>: the real statistic of one slot."""
    if not 0 <= m0 < grid.subcarriers:
        raise RangeError(f"subcarrier index {m0} outside [0, {grid.subcarriers})")
    x = np.asarray(signal, dtype=np.complex128)
    lp = grid.filter.length
    start = n0 * grid.half_symbol
    if start < 0 or start + lp > x.size:
        raise RangeError(
            f"pulse support [{start}, {start + lp}) outside signal of {x.size}"
        )
    bank = PulseBank(grid)
    chi = _I4[(2 * m0 * n0 + m0 + n0) % 4]
    return float((x[start : start + lp] @ bank.q[m0].conj() * chi.conj()).real)


# ---------------------------------------------------------------------------
# OFDM

def ofdm_modulate(symbols, n_cp: int) -> np.ndarray:
    """Unitary IFFT per column plus cyclic prefix, serialized symbol-major."""
    x = np.asarray(symbols, dtype=np.complex128)
    if x.ndim != 2:
        raise ShapeError(f"symbol matrix must be 2-D, got shape {x.shape}")
    if not 0 <= n_cp <= x.shape[0]:
        raise ShapeError(f"cyclic prefix {n_cp} outside [0, {x.shape[0]}]")
    body = np.fft.ifft(x, axis=0, norm="ortho")
    with_cp = np.concatenate([body[body.shape[0] - n_cp :], body], axis=0)
    return with_cp.T.ravel()


def ofdm_demodulate(signal, subcarriers: int, n_cp: int) -> np.ndarray:
    """Strip prefixes and apply the unitary FFT per symbol."""
    x = np.asarray(signal, dtype=np.complex128).ravel()
    block = subcarriers + n_cp
    if x.size == 0 or x.size % block:
        raise ShapeError(
            f"signal length {x.size} not a multiple of M + N_cp = {block}"
        )
    frames = x.reshape(-1, block)[:, n_cp:]
    return np.fft.fft(frames, axis=1, norm="ortho").T
