"""Closed-form bit error probabilities.

Single-carrier Gray-coded PAM over AWGN and frequency-flat Rayleigh
channels (adjacent-symbol approximation and exact weighted forms), OFDM
with a cyclic-prefix SNR penalty, and FBMC links where the residual
self-interference of the prototype filter is averaged by enumerating
every amplitude combination of a truncated interference table.

gamma_b is the normalized SNR (bit energy over noise density), linear
scale throughout; dB conversion happens at the CLI boundary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import enumeration
from .constellations import PamConstellation, QamConstellation
from .errors import ConstellationError

__all__ = [
    "q_function",
    "cho_weight",
    "cho_weights",
    "collapsed_cho_weights",
    "pam_awgn_approx",
    "pam_awgn_exact",
    "pam_rayleigh_approx",
    "pam_rayleigh_exact",
    "ofdm_awgn",
    "ofdm_rayleigh",
    "fbmc_awgn_approx",
    "fbmc_awgn_exact",
    "fbmc_rayleigh_approx",
    "fbmc_rayleigh_exact",
    "BepCurve",
    "export_curve_csv",
    "db_to_linear",
    "linear_to_db",
]

log = logging.getLogger(__name__)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=np.float64))


def q_function(x):
    """Standard normal tail probability Q(x) = erfc(x / sqrt(2)) / 2."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def cho_weight(i: int, k: int, order: int) -> int:
    """Signed weight w[i, k, N] of the exact Gray-coded PAM BEP sum."""
    pam = PamConstellation(order)
    if not 1 <= k <= pam.bits_per_symbol:
        raise IndexError(f"bit index k={k} outside [1, {pam.bits_per_symbol}]")
    imax = (order - (order >> k)) - 1
    if not 0 <= i <= imax:
        raise IndexError(f"term index i={i} outside [0, {imax}]")
    half = 1 << (k - 1)
    lead = (i * half) // order
    # floor(i*half/order + 1/2) without float rounding
    shifted = (2 * i * half + order) // (2 * order)
    return (-1) ** lead * (half - shifted)


def cho_weights(order: int):
    """All (i, k, weight) triples for the exact PAM BEP of this order."""
    pam = PamConstellation(order)
    out = []
    for k in range(1, pam.bits_per_symbol + 1):
        for i in range(order - (order >> k)):
            out.append((i, k, cho_weight(i, k, order)))
    return out


def collapsed_cho_weights(order: int):
    """Thresholds 2i+1 with their summed weights (zero sums dropped).

    The double (k, i) sum only enters through the threshold 2i+1, so
    merging equal thresholds cuts the kernel evaluations roughly 3x.
    """
    acc: dict[int, int] = {}
    for i, _, w in cho_weights(order):
        acc[2 * i + 1] = acc.get(2 * i + 1, 0) + w
    thetas = np.array(sorted(t for t, w in acc.items() if w != 0), dtype=np.float64)
    weights = np.array([acc[int(t)] for t in thetas], dtype=np.float64)
    return thetas, weights


def _snr_scale(order: int) -> float:
    """6 log2(N) / (N^2 - 1): squared Q argument per unit gamma_b."""
    pam = PamConstellation(order)
    return 6.0 * pam.bits_per_symbol / (order**2 - 1)


def _one_minus_sqrt_ratio(x):
    """1 - sqrt(x / (x + 1)) without cancellation for large x."""
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / ((1.0 + x) * (1.0 + np.sqrt(x / (1.0 + x))))


# ---------------------------------------------------------------------------
# Single-carrier PAM

def pam_awgn_approx(order: int, gamma_b):
    """Adjacent-symbol approximation for Gray PAM over AWGN."""
    pam = PamConstellation(order)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    pre = 2.0 * (order - 1) / (order * pam.bits_per_symbol)
    return pre * q_function(np.sqrt(_snr_scale(order) * gamma))


def pam_awgn_exact(order: int, gamma_b):
    """Exact Gray PAM BEP over AWGN (weighted Q-function sum)."""
    pam = PamConstellation(order)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    c = np.sqrt(_snr_scale(order) * gamma)
    thetas, weights = collapsed_cho_weights(order)
    total = sum(w * q_function(t * c) for t, w in zip(thetas, weights))
    return 2.0 / (order * pam.bits_per_symbol) * total


def pam_rayleigh_approx(order: int, gamma_b):
    """Adjacent-symbol approximation for Gray PAM over flat Rayleigh fading."""
    pam = PamConstellation(order)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    pre = (order - 1) / (order * pam.bits_per_symbol)
    return pre * _one_minus_sqrt_ratio(0.5 * _snr_scale(order) * gamma)


def pam_rayleigh_exact(order: int, gamma_b):
    """Exact Gray PAM BEP over flat Rayleigh fading."""
    pam = PamConstellation(order)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    half_scale = 0.5 * _snr_scale(order) * gamma
    thetas, weights = collapsed_cho_weights(order)
    total = sum(
        w * _one_minus_sqrt_ratio(t * t * half_scale)
        for t, w in zip(thetas, weights)
    )
    return 1.0 / (order * pam.bits_per_symbol) * total


# ---------------------------------------------------------------------------
# OFDM baseline (square QAM, per-dimension PAM, cyclic-prefix SNR penalty)

def _ofdm_args(qam_order: int, subcarriers: int, n_cp: int):
    qam = QamConstellation(qam_order)
    if subcarriers < 1:
        raise ConstellationError(f"need at least one subcarrier, got {subcarriers}")
    if n_cp < 0:
        raise ConstellationError(f"cyclic prefix length must be >= 0, got {n_cp}")
    return qam.pam, subcarriers / (subcarriers + n_cp)


def ofdm_awgn(qam_order: int, subcarriers: int, n_cp: int, gamma_b):
    """Exact QAM-over-OFDM BEP with the cyclic-prefix SNR reduction."""
    pam, cp_factor = _ofdm_args(qam_order, subcarriers, n_cp)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    order = pam.order
    c = np.sqrt(
        3.0 * math.log2(qam_order) / (qam_order - 1) * cp_factor * gamma
    )
    total = 0.0
    for i, _, w in cho_weights(order):
        total = total + w * q_function((2 * i + 1) * c)
    return 2.0 / (order * pam.bits_per_symbol) * total


def ofdm_rayleigh(qam_order: int, subcarriers: int, n_cp: int, gamma_b):
    """Exact QAM-over-OFDM BEP for flat per-subcarrier Rayleigh fading."""
    pam, cp_factor = _ofdm_args(qam_order, subcarriers, n_cp)
    gamma = np.asarray(gamma_b, dtype=np.float64)
    order = pam.order
    base = 3.0 * math.log2(qam_order) / (2.0 * (qam_order - 1)) * cp_factor * gamma
    total = 0.0
    for i, _, w in cho_weights(order):
        total = total + w * _one_minus_sqrt_ratio((2 * i + 1) ** 2 * base)
    return 1.0 / (order * pam.bits_per_symbol) * total


# ---------------------------------------------------------------------------
# FBMC: average the PAM forms over the enumerated interference offsets

def _approx_weights(order: int):
    return np.array([1.0]), np.array([float(order - 1)])


def _fbmc_bep(order, table, gamma_b, thetas, weights, kind,
              budget, workers, chunk):
    pam = PamConstellation(order)
    gamma = np.atleast_1d(np.asarray(gamma_b, dtype=np.float64))
    if np.any(gamma <= 0):
        raise ValueError("gamma_b must be positive")
    eps = np.asarray(table.eps, dtype=np.float64)
    scales = np.sqrt(0.5 * _snr_scale(order) * gamma)
    totals = enumeration.reduce_offsets(
        eps, order, scales, thetas, weights, kind,
        budget=budget, workers=workers, chunk=chunk,
    )
    count = order ** eps.size
    probs = 2.0 / (order * pam.bits_per_symbol) * totals / count
    clipped = np.clip(probs, 0.0, 1.0)
    if np.any(probs < -1e-12) or np.any(probs > 1.0 + 1e-12):
        log.warning("BEP outside [0, 1] clamped (max deviation %.3g)",
                    float(np.max(np.abs(probs - clipped))))
    if np.isscalar(gamma_b) or np.ndim(gamma_b) == 0:
        return float(clipped[0])
    return clipped


def fbmc_awgn_approx(order, table, gamma_b, *, budget=enumeration.DEFAULT_BUDGET,
                     workers=None, chunk=enumeration.DEFAULT_CHUNK):
    """Approximate FBMC BEP over AWGN for a truncated interference table."""
    thetas, weights = _approx_weights(order)
    return _fbmc_bep(order, table, gamma_b, thetas, weights,
                     "awgn", budget, workers, chunk)


def fbmc_awgn_exact(order, table, gamma_b, *, budget=enumeration.DEFAULT_BUDGET,
                    workers=None, chunk=enumeration.DEFAULT_CHUNK):
    """Exact FBMC BEP over AWGN for a truncated interference table."""
    thetas, weights = collapsed_cho_weights(order)
    return _fbmc_bep(order, table, gamma_b, thetas, weights,
                     "awgn", budget, workers, chunk)


def fbmc_rayleigh_approx(order, table, gamma_b, *, budget=enumeration.DEFAULT_BUDGET,
                         workers=None, chunk=enumeration.DEFAULT_CHUNK):
    """Approximate FBMC BEP over flat Rayleigh fading."""
    thetas, weights = _approx_weights(order)
    return _fbmc_bep(order, table, gamma_b, thetas, weights,
                     "rayleigh", budget, workers, chunk)


def fbmc_rayleigh_exact(order, table, gamma_b, *, budget=enumeration.DEFAULT_BUDGET,
                        workers=None, chunk=enumeration.DEFAULT_CHUNK):
    """Exact FBMC BEP over flat Rayleigh fading."""
    thetas, weights = collapsed_cho_weights(order)
    return _fbmc_bep(order, table, gamma_b, thetas, weights,
                     "rayleigh", budget, workers, chunk)


# ---------------------------------------------------------------------------
# Curve container

@dataclass
class BepCurve:
    """Sampled analytic BEP curve with its model identification."""

    model: str
    ebn0_db: np.ndarray
    prob: np.ndarray
    filter_label: str = ""
    kmax: int | None = None
    n_cp: int | None = None

    def __post_init__(self):
        self.ebn0_db = np.asarray(self.ebn0_db, dtype=np.float64)
        self.prob = np.atleast_1d(np.asarray(self.prob, dtype=np.float64))


def export_curve_csv(curve: BepCurve, path):
    """CSV with columns ebn0_db, bep, model, filter, kmax."""
    kmax = "" if curve.kmax is None else str(curve.kmax)
    with open(path, "w") as fh:
        fh.write("ebn0_db,bep,model,filter,kmax\n")
        for db, p in zip(curve.ebn0_db, curve.prob):
            fh.write(f"{db:.6g},{p:.14e},{curve.model},{curve.filter_label},{kmax}\n")
