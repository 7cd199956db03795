"""Key generation and serial blockwise encryption / decryption.

Block i (0-based) is encrypted as c_i = m_i * N_i * e_i, where N_i is the
chain factor at position i of the header-seeded chain (the factor "preceding"
block i+1 in 1-based numbering). Decryption inverts it through the fiber
operation: m_i = tr(star(c_i, d_i) / N_i) / r.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

import numpy as np

from .analytic import ChainParams, chain_values
from .codec import decode_blocks, encode_text
from .errors import CapacityError, GenerationError, IntegrityError, KeyDerivationError, MalformedPlaintextError
from .fiber_algebra import FiberOperation, derive_operation, forward_key, normalized_trace, star
from .manifold import (
    FourierSection,
    ManifoldPoint,
    TangentVector,
    TorusModel,
    evaluate_section,
    sample_point,
    sample_section,
)

FORMAT_VERSION = 1
DEFAULT_MAX_BLOCKS = 65536
DEFAULT_CUTOFF = 2
KEY_RANGE = (1e-3, 1e3)
ROUNDING_MARGIN = 1e-3
MAX_PLAINTEXT_BLOCK = 0x10000 + 1
MAX_ATTEMPTS = 64


@dataclass(frozen=True, eq=False)
class BlockSecret:
    """The hidden per-block triple (point, section, operation) and its keys."""

    index: int
    point: ManifoldPoint
    section: FourierSection
    op: FiberOperation
    private: TangentVector
    public: TangentVector


def block_subseed(secret_seed: bytes, index: int) -> bytes:
    return hashlib.sha256(b"zsigil/block" + secret_seed + index.to_bytes(8, "little")).digest()


def derive_block(
    model: TorusModel, secret_seed: bytes, index: int, cutoff: int = DEFAULT_CUTOFF, degenerate: bool = False
) -> BlockSecret:
    subseed = block_subseed(secret_seed, index)
    rng = np.random.default_rng(np.frombuffer(subseed, dtype="<u4"))
    lo, hi = KEY_RANGE
    for _ in range(MAX_ATTEMPTS):
        p = sample_point(model, rng)
        sec = sample_section(model, cutoff, rng, at=p)
        op = derive_operation(model, p, subseed, degenerate=degenerate)
        d = evaluate_section(sec, p)
        try:
            e = forward_key(op, d)
        except KeyDerivationError:
            continue
        mags = np.abs(e.components)
        if np.all((mags >= lo) & (mags <= hi)):
            return BlockSecret(index, p, sec, op, d, e)
    raise GenerationError(f"block {index}: no admissible key pair after {MAX_ATTEMPTS} attempts")


@dataclass(frozen=True, eq=False)
class PublicKey:
    model: TorusModel
    keys: np.ndarray  # (max_blocks, r)

    def __post_init__(self):
        keys = np.array(self.keys, dtype=float)
        if keys.ndim != 2 or keys.shape[1] != self.model.r or keys.shape[0] < 1:
            raise ValueError(f"public key table must have shape (D_max, {self.model.r})")
        mags = np.abs(keys)
        if not np.all(np.isfinite(keys)) or np.any(mags < KEY_RANGE[0]) or np.any(mags > KEY_RANGE[1]):
            raise ValueError("public key components outside [1e-3, 1e3]")
        keys.setflags(write=False)
        object.__setattr__(self, "keys", keys)

    @property
    def r(self) -> int:
        return self.model.r

    @property
    def max_blocks(self) -> int:
        return self.keys.shape[0]


@dataclass(eq=False)
class KeyPair:
    public: PublicKey
    secret_seed: bytes
    cutoff: int = DEFAULT_CUTOFF
    degenerate: bool = False
    _blocks: dict = field(default_factory=dict, repr=False)
    _arrays: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.secret_seed) != 32:
            raise ValueError("secret seed must be 32 bytes")

    @property
    def model(self) -> TorusModel:
        return self.public.model

    @property
    def max_blocks(self) -> int:
        return self.public.max_blocks

    def block(self, index: int) -> BlockSecret:
        if not 0 <= index < self.max_blocks:
            raise IndexError(f"block {index} outside key capacity {self.max_blocks}")
        if index not in self._blocks:
            self._blocks[index] = derive_block(self.model, self.secret_seed, index, self.cutoff, self.degenerate)
        return self._blocks[index]

    def decryption_arrays(self, count: int):
        """Stacked (frames, frame inverses, eta(d)) for blocks 0..count-1."""
        have = 0 if self._arrays is None else self._arrays[0].shape[0]
        if count > have:
            new = [self.block(i) for i in range(have, count)]
            parts = (
                np.array([b.op.frame for b in new]).reshape(-1, self.model.r, self.model.r),
                np.array([b.op.frame_inv for b in new]).reshape(-1, self.model.r, self.model.r),
                np.array([b.op.eta(b.private.components) for b in new]).reshape(-1, self.model.r),
            )
            if self._arrays is None:
                self._arrays = parts
            else:
                self._arrays = tuple(np.concatenate([old, p]) for old, p in zip(self._arrays, parts))
        return tuple(a[:count] for a in self._arrays)


def keygen(
    model: TorusModel,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
    seed: bytes | None = None,
    cutoff: int = DEFAULT_CUTOFF,
    degenerate: bool = False,
) -> KeyPair:
    if max_blocks < 1:
        raise ValueError("max_blocks must be >= 1")
    secret_seed = secrets.token_bytes(32) if seed is None else bytes(seed)
    if len(secret_seed) != 32:
        raise ValueError("seed must be 32 bytes")
    blocks = [derive_block(model, secret_seed, i, cutoff, degenerate) for i in range(max_blocks)]
    public = PublicKey(model, np.array([b.public.components for b in blocks]))
    pair = KeyPair(public, secret_seed, cutoff, degenerate)
    pair._blocks.update(enumerate(blocks))
    return pair


@dataclass(frozen=True, eq=False)
class CiphertextMessage:
    r: int
    message_seed: bytes
    blocks: np.ndarray  # (D, r)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        blocks = np.array(self.blocks, dtype=float).reshape(-1, self.r)
        if not np.all(np.isfinite(blocks)):
            raise ValueError("ciphertext blocks must be finite")
        if len(self.message_seed) != 32:
            raise ValueError("message seed must be 32 bytes")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def D(self) -> int:
        return self.blocks.shape[0]


def encrypt_block(m: int, chain_factor: float, e: np.ndarray) -> np.ndarray:
    return (m * chain_factor) * np.asarray(e, dtype=float)


def decrypt_block(op: FiberOperation, d: TangentVector, c: np.ndarray, chain_factor: float) -> float:
    return normalized_trace(star(op, TangentVector(op.base, c), d) / chain_factor)


def encrypt(
    pub: PublicKey, text: str, message_seed: bytes | None = None, params: ChainParams | None = None
) -> CiphertextMessage:
    """Serial encryption: block i is scaled by chain position i and key e_i."""
    m = encode_text(text).blocks
    if m.shape[0] > pub.max_blocks:
        raise CapacityError(f"message needs {m.shape[0]} blocks, key serves {pub.max_blocks}")
    seed = secrets.token_bytes(32) if message_seed is None else bytes(message_seed)
    chain = chain_values(seed, m.shape[0], params)
    c = (m * chain)[:, None] * pub.keys[: m.shape[0]]
    return CiphertextMessage(pub.r, seed, c)


def recover_blocks(key: KeyPair, ct: CiphertextMessage, chain: np.ndarray | None = None) -> np.ndarray:
    """Unrounded plaintext estimates tr(star(c_i, d_i) / N_i) / r for every block.

    ``chain`` overrides the header-derived factors (used by experiments that
    decrypt against the wrong chain positions).
    """
    if ct.r != key.model.r:
        raise ValueError(f"ciphertext dimension {ct.r} does not match key dimension {key.model.r}")
    if ct.D > key.max_blocks:
        raise CapacityError(f"ciphertext has {ct.D} blocks, key serves {key.max_blocks}")
    if ct.D == 0:
        return np.zeros(0)
    if chain is None:
        chain = chain_values(ct.message_seed, ct.D)
    frames, inverses, eta_d = key.decryption_arrays(ct.D)
    products = (frames * (ct.blocks * eta_d)[:, None, :]) @ inverses
    products /= np.asarray(chain)[:, None, None]
    return np.trace(products, axis1=1, axis2=2) / ct.r


def round_blocks(estimates: np.ndarray, margin: float = ROUNDING_MARGIN) -> tuple[np.ndarray, np.ndarray]:
    """Nearest integers and a mask of blocks that pass the integrity check."""
    rounded = np.rint(estimates)
    ok = (np.abs(estimates - rounded) < margin) & (rounded >= 1) & (rounded <= MAX_PLAINTEXT_BLOCK)
    return rounded.astype(np.int64), ok


def decrypt(key: KeyPair, ct: CiphertextMessage) -> str:
    estimates = recover_blocks(key, ct)
    rounded, ok = round_blocks(estimates)
    if not np.all(ok):
        bad = np.flatnonzero(~ok)
        raise IntegrityError(f"{bad.size} of {ct.D} blocks fail the rounding margin (first: block {bad[0]})")
    try:
        return decode_blocks(rounded)
    except MalformedPlaintextError as exc:
        raise IntegrityError(str(exc)) from exc
