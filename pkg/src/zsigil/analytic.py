"""Analytic layer: GUE matrices, zeta-regularized determinants, Riemann zeros,
and the per-block chain factor N_i = det(G_i) * det_zeta(A_i) * prod gamma_k.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._zeros import RIEMANN_ZERO_GAMMAS
from .errors import GenerationError, NumericFailure

DET_FLOOR = 1e-6
MAX_ATTEMPTS = 64


# ---------------------------------------------------------------- GUE


@dataclass(frozen=True, eq=False)
class GueMatrix:
    entries: np.ndarray
    det: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def hermitian_from_normals(z: np.ndarray) -> np.ndarray:
    """Map standard normals of shape (..., 2, n, n) to Hermitian matrices.

    X = z[0] + i z[1] and H = (X + X^*) / 2, so the diagonal of H is N(0, 1)
    and off-diagonal real and imaginary parts are each N(0, 1/2).
    """
    x = z[..., 0, :, :] + 1j * z[..., 1, :, :]
    return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))


def sample_gue(n: int, rng) -> GueMatrix:
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    for _ in range(MAX_ATTEMPTS):
        h = hermitian_from_normals(rng.standard_normal((2, n, n)))
        det = float(np.linalg.det(h).real)
        if abs(det) >= DET_FLOOR:
            return GueMatrix(h, det)
    raise GenerationError(f"GUE determinant below {DET_FLOOR} for {MAX_ATTEMPTS} draws")


def semicircle_cdf(x):
    """CDF of the semicircle law on [-2, 2]."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + (x * np.sqrt(4.0 - x * x) / 4.0 + np.arcsin(x / 2.0)) / np.pi


# ------------------------------------------------------ spectral zeta


@dataclass(frozen=True)
class PowerLawSpectrum:
    """Diagonal trace-class operator with eigenvalues c * j**(-beta)."""

    c: float
    beta: float = 2.0
    truncation: int = 1000

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("spectral scale c must be positive")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1 for a trace-class spectrum")
        if self.truncation < 1:
            raise ValueError("truncation must be positive")

    def eigenvalues(self, count: int | None = None) -> np.ndarray:
        j = np.arange(1, (count or self.truncation) + 1, dtype=float)
        return self.c * j ** (-self.beta)


def spectral_zeta_det(spectrum: PowerLawSpectrum) -> float:
    """Closed form det_zeta = exp(-zeta_A'(0)) = (2 pi)^(beta/2) / sqrt(c).

    Uses zeta_A(s) = c^(-s) zeta(beta s) together with zeta(0) = -1/2 and
    zeta'(0) = -log(2 pi) / 2.
    """
    if not spectrum.beta > 1:
        raise ValueError("beta must exceed 1")
    return (2.0 * math.pi) ** (spectrum.beta / 2.0) / math.sqrt(spectrum.c)


def riemann_zeta_continued(s: float, terms: int = 1000, rounds: int = 40) -> float:
    """Riemann zeta for real s != 1 through the alternating eta series.

    Partial sums of sum (-1)^(n-1) n^(-s) are smoothed by repeated averaging of
    neighbours, which sums the series well outside its half-plane of
    convergence. Raises NumericFailure when doubling the smoothing depth moves
    the result by more than 1e-10.
    """
    if s == 1.0:
        raise ValueError("zeta has a pole at s = 1")
    if terms < 2 * rounds + 2:
        raise ValueError("need more terms than averaging rounds")
    n = np.arange(1, terms + 1, dtype=float)
    signs = np.where(n % 2 == 1, 1.0, -1.0)
    partial = np.cumsum(signs * np.exp(-s * np.log(n)))

    def smooth(k: int) -> float:
        window = partial[-(k + 1):]
        for _ in range(k):
            window = 0.5 * (window[1:] + window[:-1])
        return float(window[0])

    eta, eta_coarse = smooth(rounds), smooth(rounds // 2)
    if not np.isfinite(eta) or abs(eta - eta_coarse) > 1e-10 * max(1.0, abs(eta)):
        raise NumericFailure(f"eta series did not settle at s={s} ({eta} vs {eta_coarse})")
    return eta / (1.0 - 2.0 ** (1.0 - s))


def spectral_zeta_det_numeric(spectrum: PowerLawSpectrum, step: float = 1e-5) -> float:
    """Independent estimate of det_zeta by numerical continuation.

    zeta_A(s) = c^(-s) zeta(beta s) is evaluated at s = +-step with the
    eta-series continuation and differentiated by central difference.
    """
    if spectrum.truncation < 1000:
        raise ValueError("numeric continuation needs truncation >= 1000")

    def zeta_a(s: float) -> float:
        return spectrum.c ** (-s) * riemann_zeta_continued(spectrum.beta * s, terms=spectrum.truncation)

    deriv = (zeta_a(step) - zeta_a(-step)) / (2.0 * step)
    return math.exp(-deriv)


# ------------------------------------------------------ Riemann zeros


@dataclass(frozen=True)
class ZetaZeroTable:
    gammas: tuple[float, ...] = RIEMANN_ZERO_GAMMAS

    def __post_init__(self):
        g = np.asarray(self.gammas)
        if g.size == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise ValueError("zero table must be positive and strictly increasing")

    def __len__(self) -> int:
        return len(self.gammas)

    def __getitem__(self, k: int) -> float:
        """The k-th zero ordinate, 1-based."""
        if not 1 <= k <= len(self.gammas):
            raise IndexError(f"zero index {k} outside 1..{len(self.gammas)}")
        return self.gammas[k - 1]


def gamma_product(table: ZetaZeroTable, indices) -> float:
    """Product of the selected zero ordinates (1-based indices)."""
    indices = list(indices)
    if not indices:
        raise ValueError("empty zero selection")
    return math.prod(table[int(k)] for k in indices)


# ------------------------------------------------------ chain factors


@dataclass(frozen=True)
class ChainParams:
    gue_size: int = 4
    beta: float = 2.0
    c_range: tuple[float, float] = (0.5, 2.0)
    zeros_per_block: int = 3
    magnitude_guard: tuple[float, float] = (1e-100, 1e100)
    table: ZetaZeroTable = field(default_factory=ZetaZeroTable)

    def __post_init__(self):
        if not 1 <= self.zeros_per_block <= len(self.table):
            raise ValueError("zeros_per_block out of range")
        if self.gue_size < 1:
            raise ValueError("gue_size must be >= 1")


@dataclass(frozen=True)
class ChainFactor:
    index: int
    value: float
    det_g: float
    det_zeta: float
    gamma_product: float
    spectral_scale: float
    zero_indices: tuple[int, ...]


def chain_factor_value(det_g: float, spectrum: PowerLawSpectrum, zero_indices, table: ZetaZeroTable) -> float:
    """N = det(G) * det_zeta(A) * prod gamma_k for explicit components."""
    return det_g * spectral_zeta_det(spectrum) * gamma_product(table, zero_indices)


def _index_stream(seed: bytes, index: int, attempt: int, n_bytes: int) -> bytes:
    tag = b"zsigil/chain" + seed + index.to_bytes(8, "little") + attempt.to_bytes(2, "little")
    return hashlib.shake_256(tag).digest(n_bytes)


def _uniforms(raw: np.ndarray) -> np.ndarray:
    # 53-bit mantissa from each 64-bit word, centred so values avoid 0 and 1
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _draw_components(seed: bytes, indices: np.ndarray, attempts: np.ndarray, params: ChainParams):
    n = params.gue_size
    k = params.zeros_per_block
    n_words = 2 * n * n + 1 + k
    buf = b"".join(_index_stream(seed, int(i), int(a), 8 * n_words) for i, a in zip(indices, attempts))
    u = _uniforms(np.frombuffer(buf, dtype="<u8").reshape(len(indices), n_words))

    h = hermitian_from_normals(ndtri(u[:, : 2 * n * n]).reshape(-1, 2, n, n))
    det_g = np.linalg.det(h).real

    lo, hi = params.c_range
    scale = lo + (hi - lo) * u[:, 2 * n * n]

    # distinct zero indices: successive picks from the shrinking remainder
    total = len(params.table)
    picks = np.empty((len(indices), k), dtype=np.int64)
    for col in range(k):
        raw = np.floor(u[:, 2 * n * n + 1 + col] * (total - col)).astype(np.int64)
        for prev in np.sort(picks[:, :col], axis=1).T:
            raw = raw + (raw >= prev)
        picks[:, col] = raw
    return det_g, scale, picks + 1


def derive_chain_arrays(message_seed: bytes, count: int, params: ChainParams | None = None) -> dict:
    """Vectorized chain derivation; returns component arrays keyed by name.

    Each index i is driven only by SHAKE-256(message_seed || i || attempt), so
    factors are independent of one another and of ``count``.
    """
    params = params or ChainParams()
    if len(message_seed) != 32:
        raise ValueError("message seed must be 32 bytes")
    if count < 0:
        raise ValueError("count must be >= 0")
    n, k = params.gue_size, params.zeros_per_block
    det_g = np.empty(count)
    scale = np.empty(count)
    zeros = np.empty((count, k), dtype=np.int64)
    attempts = np.zeros(count, dtype=np.int64)
    gammas = np.asarray(params.table.gammas)
    lo_guard, hi_guard = params.magnitude_guard
    pending = np.arange(count)
    while pending.size:
        if attempts[pending].max() >= MAX_ATTEMPTS:
            raise GenerationError("chain factor outside guard after resample budget")
        dg, sc, zi = _draw_components(message_seed, pending, attempts[pending], params)
        det_g[pending], scale[pending], zeros[pending] = dg, sc, zi
        det_zeta = (2.0 * math.pi) ** (params.beta / 2.0) / np.sqrt(sc)
        value = dg * det_zeta * np.prod(gammas[zi - 1], axis=1)
        ok = (np.abs(dg) >= DET_FLOOR) & (np.abs(value) >= lo_guard) & (np.abs(value) <= hi_guard)
        attempts[pending[~ok]] += 1
        pending = pending[~ok]
    det_zeta = (2.0 * math.pi) ** (params.beta / 2.0) / np.sqrt(scale)
    gprod = np.prod(gammas[zeros - 1], axis=1)
    return {
        "value": det_g * det_zeta * gprod,
        "det_g": det_g,
        "det_zeta": det_zeta,
        "gamma_product": gprod,
        "scale": scale,
        "zero_indices": zeros,
    }


def chain_values(message_seed: bytes, count: int, params: ChainParams | None = None) -> np.ndarray:
    """Just the N_0 .. N_{count-1} values."""
    return derive_chain_arrays(message_seed, count, params)["value"]


def derive_chain(message_seed: bytes, count: int, params: ChainParams | None = None) -> list[ChainFactor]:
    if count < 1:
        raise ValueError("chain length must be >= 1")
    arr = derive_chain_arrays(message_seed, count, params)
    return [
        ChainFactor(
            index=i,
            value=float(arr["value"][i]),
            det_g=float(arr["det_g"][i]),
            det_zeta=float(arr["det_zeta"][i]),
            gamma_product=float(arr["gamma_product"][i]),
            spectral_scale=float(arr["scale"][i]),
            zero_indices=tuple(int(z) for z in arr["zero_indices"][i]),
        )
        for i in range(count)
    ]
