"""Monte Carlo BER measurement over AWGN and flat Rayleigh channels.

Noise is calibrated so the real decision statistic sees variance N0/2
with gamma_b = E_s / (N_b * N0); OFDM additionally pays the cyclic
prefix SNR penalty through its time-domain noise density.  Rayleigh
fading uses unit-variance complex gains with genie one-tap
zero-forcing: a common flat gain per FBMC frame (which the projection
step passes through exactly) and i.i.d. per-subcarrier gains for OFDM.

Randomness is drawn from counter-based substreams: the generator of
batch b of SNR point i is seeded with (master_seed, i, b), so results
are bit-for-bit reproducible and independent of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constellations import PamConstellation, QamConstellation, SnrPoint
from .interference import FbmcGrid
from .modem import (
    PulseBank,
    fbmc_analyze_frame,
    fbmc_synthesize,
    pam_demap,
    pam_map,
    qam_demap,
    qam_map,
)

__all__ = [
    "ChannelModel",
    "StopRule",
    "SimPoint",
    "SimResult",
    "PamSystem",
    "OfdmSystem",
    "FbmcSystem",
    "apply_channel",
    "run_ber",
    "z_scores",
]


@dataclass(frozen=True)
class ChannelModel:
    """kind 'awgn' or 'rayleigh'; coherence = fade blocks per redraw unit.

    Rayleigh coherence counts symbols for PAM, OFDM symbols for OFDM and
    whole frames for FBMC (the pulse support must see a constant gain).
    """

    kind: str
    coherence: int = 1

    def __post_init__(self):
        if self.kind not in ("awgn", "rayleigh"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.coherence < 1:
            raise ValueError(f"coherence must be >= 1, got {self.coherence}")


@dataclass(frozen=True)
class StopRule:
    """Stop at min_errors bit errors, but never beyond max_bits.

    min_frames additionally demands independent frame replicates; under
    block fading each frame is one fade draw, so high-BER points would
    otherwise stop after a handful of fades and the BER estimate would
    be fade-sampling limited.  target_rel_se, when set, keeps going
    until the frame-replicate standard error drops below that fraction
    of the BER estimate (deep-fade error bursts make equal-error-count
    points much noisier at high SNR).
    """

    min_errors: int = 300
    max_bits: int = 20_000_000
    min_frames: int = 1
    target_rel_se: float | None = None


@dataclass
class SimPoint:
    ebn0_db: float
    bits: int
    errors: int
    ber: float
    ci95: float
    se_block: float
    upper_bound_only: bool = False


@dataclass
class SimResult:
    points: list[SimPoint]
    seed: int
    config: dict = field(default_factory=dict)

    @property
    def ebn0_db(self) -> np.ndarray:
        return np.array([p.ebn0_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("ebn0_db,bits,errors,ber,ci95\n")
            for p in self.points:
                fh.write(
                    f"{p.ebn0_db:.6g},{p.bits},{p.errors},"
                    f"{p.ber:.10e},{p.ci95:.6e}\n"
                )


def _cnoise(rng, n0: float, shape) -> np.ndarray:
    if n0 == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    sigma = math.sqrt(n0 / 2.0)
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _cgain(rng, shape) -> np.ndarray:
    return math.sqrt(0.5) * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    )


def _repeat_fades(rng, draws_shape, coherence, total, axis=-1):
    gains = _cgain(rng, draws_shape)
    gains = np.repeat(gains, coherence, axis=axis)
    index = [slice(None)] * gains.ndim
    index[axis] = slice(0, total)
    return gains[tuple(index)]


def apply_channel(signal, channel: ChannelModel, n0: float, rng, gains=None):
    """Faded/noisy copy of a time signal plus the gain actually applied.

    AWGN returns (signal + noise, None).  Rayleigh applies a flat
    complex gain (drawn unit-variance unless `gains` overrides it) and
    then adds noise.
    """
    x = np.asarray(signal, dtype=np.complex128)
    if channel.kind == "awgn":
        return x + _cnoise(rng, n0, x.shape), None
    h = _cgain(rng, ()) if gains is None else np.asarray(gains)
    return h * x + _cnoise(rng, n0, x.shape), h


# ---------------------------------------------------------------------------
# Systems

@dataclass(frozen=True)
class PamSystem:
    """Single-carrier PAM; per-symbol fades in Rayleigh mode."""

    order: int
    frame_symbols: int = 4096

    @property
    def constellation(self) -> PamConstellation:
        return PamConstellation(self.order)

    @property
    def frame_bits(self) -> int:
        return self.frame_symbols * self.constellation.bits_per_symbol

    def noise_density(self, gamma_b: float) -> float:
        return SnrPoint(gamma_b).noise_density(self.constellation)

    def describe(self) -> dict:
        return {"system": "pam", "order": self.order,
                "frame_symbols": self.frame_symbols}

    def simulate_frames(self, channel, gamma_b, frames, rng) -> np.ndarray:
        pam = self.constellation
        n0 = self.noise_density(gamma_b)
        n = frames * self.frame_symbols
        bits = rng.integers(0, 2, n * pam.bits_per_symbol, dtype=np.int8)
        a = pam_map(bits, pam)
        if channel.kind == "awgn":
            y = a + rng.normal(0.0, math.sqrt(n0 / 2.0), n)
        else:
            draws = -(-n // channel.coherence)
            h = _repeat_fades(rng, draws, channel.coherence, n)
            x = h * a + _cnoise(rng, n0, n)
            y = (x / h).real
        wrong = bits != pam_demap(y, pam)
        return wrong.reshape(frames, self.frame_bits).sum(axis=1)


@dataclass(frozen=True)
class OfdmSystem:
    """Cyclic-prefix OFDM with square QAM; per-subcarrier fades."""

    qam_order: int
    subcarriers: int
    n_cp: int
    frame_symbols: int = 32

    @property
    def constellation(self) -> QamConstellation:
        return QamConstellation(self.qam_order)

    @property
    def frame_bits(self) -> int:
        return (self.subcarriers * self.frame_symbols
                * self.constellation.bits_per_symbol)

    def noise_density(self, gamma_b: float) -> float:
        qam = self.constellation
        cp_penalty = (self.subcarriers + self.n_cp) / self.subcarriers
        return qam.symbol_energy * cp_penalty / (qam.bits_per_symbol * gamma_b)

    def describe(self) -> dict:
        return {"system": "ofdm", "qam_order": self.qam_order,
                "subcarriers": self.subcarriers, "n_cp": self.n_cp,
                "frame_symbols": self.frame_symbols}

    def simulate_frames(self, channel, gamma_b, frames, rng) -> np.ndarray:
        qam = self.constellation
        m, nsym = self.subcarriers, self.frame_symbols
        n0 = self.noise_density(gamma_b)
        bits = rng.integers(0, 2, frames * self.frame_bits, dtype=np.int8)
        x = qam_map(bits, qam).reshape(frames, m, nsym)
        if channel.kind == "rayleigh":
            draws = -(-nsym // channel.coherence)
            h = _repeat_fades(rng, (frames, m, draws), channel.coherence, nsym)
            x = h * x
        body = np.fft.ifft(x, axis=1, norm="ortho")
        with_cp = np.concatenate([body[:, m - self.n_cp :, :], body], axis=1)
        rx = with_cp + _cnoise(rng, n0, with_cp.shape)
        y = np.fft.fft(rx[:, self.n_cp :, :], axis=1, norm="ortho")
        if channel.kind == "rayleigh":
            y = y / h
        wrong = bits != qam_demap(y.ravel(), qam)
        return wrong.reshape(frames, self.frame_bits).sum(axis=1)


@dataclass(frozen=True)
class FbmcSystem:
    """FBMC/PAM frames; the first and last 2K symbol columns carry data
    but are excluded from counting (truncated edge interference)."""

    order: int
    grid: FbmcGrid
    frame_symbols: int = 48

    def __post_init__(self):
        if self.frame_symbols <= 2 * self.edge_columns:
            raise ValueError(
                f"frame needs more than {2 * self.edge_columns} symbol columns"
            )

    @property
    def edge_columns(self) -> int:
        return 2 * self.grid.filter.overlap

    @property
    def data_columns(self) -> int:
        return self.frame_symbols - 2 * self.edge_columns

    @property
    def constellation(self) -> PamConstellation:
        return PamConstellation(self.order)

    @property
    def frame_bits(self) -> int:
        return (self.grid.subcarriers * self.data_columns
                * self.constellation.bits_per_symbol)

    def noise_density(self, gamma_b: float) -> float:
        return SnrPoint(gamma_b).noise_density(self.constellation)

    def describe(self) -> dict:
        filt = self.grid.filter
        return {"system": "fbmc", "order": self.order,
                "subcarriers": self.grid.subcarriers,
                "filter": filt.label, "overlap": filt.overlap,
                "filter_length": filt.length,
                "frame_symbols": self.frame_symbols}

    def simulate_frames(self, channel, gamma_b, frames, rng) -> np.ndarray:
        pam = self.constellation
        m, nsym = self.grid.subcarriers, self.frame_symbols
        bps = pam.bits_per_symbol
        n0 = self.noise_density(gamma_b)
        bank = PulseBank(self.grid)
        bits = rng.integers(0, 2, frames * m * nsym * bps, dtype=np.int8)
        a = pam_map(bits, pam).reshape(frames, m, nsym)
        s = fbmc_synthesize(a, self.grid, bank)
        if channel.kind == "rayleigh":
            draws = -(-frames // channel.coherence)
            h = _repeat_fades(rng, draws, channel.coherence, frames)
            x = h[:, None] * s + _cnoise(rng, n0, s.shape)
        else:
            h = None
            x = s + _cnoise(rng, n0, s.shape)
        proj = fbmc_analyze_frame(x, self.grid, nsym, bank)
        if h is not None:
            proj = proj / h[:, None, None]
        lo, hi = self.edge_columns, nsym - self.edge_columns
        data = proj.real[:, :, lo:hi]
        tx_bits = bits.reshape(frames, m, nsym, bps)[:, :, lo:hi, :]
        wrong = tx_bits.ravel() != pam_demap(data.ravel(), pam)
        return wrong.reshape(frames, self.frame_bits).sum(axis=1)


# ---------------------------------------------------------------------------
# Runner

def _batch_frames(batch_idx: int, frame_bits: int) -> int:
    """Deterministic growth schedule, about 2e5 bits doubling to 4e6."""
    target = min(200_000 * 2**batch_idx, 4_000_000)
    return max(1, round(target / frame_bits))


def run_ber(system, channel: ChannelModel, ebn0_db, stop: StopRule | None = None,
            seed: int = 0) -> SimResult:
    """Simulate until min_errors bit errors or max_bits bits per point."""
    stop = stop or StopRule()
    ebn0_db = np.atleast_1d(np.asarray(ebn0_db, dtype=np.float64))
    points = []
    for idx, db in enumerate(ebn0_db):
        gamma = 10.0 ** (db / 10.0)
        bits = errors = frames_done = 0
        frame_errors = []
        batch_idx = 0
        while True:
            frames = _batch_frames(batch_idx, system.frame_bits)
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(idx, batch_idx))
            )
            errs = system.simulate_frames(channel, gamma, frames, rng)
            frame_errors.append(errs)
            bits += frames * system.frame_bits
            errors += int(errs.sum())
            frames_done += frames
            batch_idx += 1
            if bits >= stop.max_bits:
                break
            if errors < stop.min_errors or frames_done < stop.min_frames:
                continue
            if stop.target_rel_se is not None and errors:
                per_frame = np.concatenate(frame_errors)
                se = per_frame.std(ddof=1) / math.sqrt(per_frame.size)
                if se > stop.target_rel_se * per_frame.mean():
                    continue
            break
        ber = errors / bits
        ci95 = 1.96 * math.sqrt(max(ber * (1.0 - ber), 0.0) / bits)
        per_frame = np.concatenate(frame_errors)
        if per_frame.size > 1:
            se_block = float(
                per_frame.std(ddof=1)
                / math.sqrt(per_frame.size) / system.frame_bits
            )
        else:
            se_block = ci95 / 1.96
        points.append(SimPoint(
            ebn0_db=float(db), bits=bits, errors=errors, ber=ber,
            ci95=ci95, se_block=se_block,
            upper_bound_only=(errors == 0),
        ))
    config = {
        **system.describe(),
        "channel": channel.kind,
        "coherence": channel.coherence,
        "min_errors": stop.min_errors,
        "max_bits": stop.max_bits,
        "min_frames": stop.min_frames,
        "target_rel_se": stop.target_rel_se,
        "ebn0_db": [float(x) for x in ebn0_db],
    }
    return SimResult(points=points, seed=seed, config=config)


def z_scores(result: SimResult, probs) -> np.ndarray:
    """(BER - BEP) / SE per point.

    SE is the largest of the frame-replicate standard error (valid under
    block fading), the binomial standard error, and the standard error
    implied by the analytic probability, so a zero-error point scores
    against the expected count instead of dividing by zero.
    """
    probs = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    if probs.size != len(result.points):
        raise ValueError(f"{probs.size} probabilities for "
                         f"{len(result.points)} simulated points")
    out = np.empty(probs.size)
    for i, (point, bep) in enumerate(zip(result.points, probs)):
        binom = point.ci95 / 1.96
        implied = math.sqrt(max(bep * (1.0 - bep), 0.0) / point.bits)
        se = max(point.se_block, binom, implied, 1e-300)
        out[i] = (point.ber - bep) / se
    return out
