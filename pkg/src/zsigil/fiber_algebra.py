"""Fiberwise key operation on T_pM and its exact inverse keys.

The reference realization is

    star_p(u, v) = C_p . diag(u) . diag(eta_p(v)) . C_p^{-1}

with a point-dependent frame C_p and the strictly increasing cubic keymap
eta_p(v)_j = a_j v_j + b_j v_j^3. Since eta_p is a bijection of R in each
component, every public key with nonzero components has exactly one private
partner d with star_p(e, d) = 1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, InverseUndefinedError, KeyDerivationError
from .manifold import ManifoldPoint, TangentVector, TorusModel

DET_FLOOR = 1e-6
# not required by the identity law itself, keeps star() well below its 1e-9 budget
COND_CEILING = 1e6
ZERO_THRESHOLD = 1e-12
IDENTITY_TOL = 1e-9
MAX_ATTEMPTS = 64


@dataclass(frozen=True, eq=False)
class FiberOperation:
    base: ManifoldPoint
    frame: np.ndarray
    keymap_a: np.ndarray
    keymap_b: np.ndarray

    def __post_init__(self):
        r = self.base.model.r
        frame = np.array(self.frame, dtype=float)
        a = np.array(self.keymap_a, dtype=float)
        b = np.array(self.keymap_b, dtype=float)
        if frame.shape != (r, r) or a.shape != (r,) or b.shape != (r,):
            raise ValueError("frame must be r x r and keymap coefficients length r")
        if abs(np.linalg.det(frame)) < DET_FLOOR:
            raise ValueError("frame is (numerically) singular")
        if np.any(a <= 0) or np.any(b < 0):
            raise ValueError("keymap needs a > 0 and b >= 0")
        for arr in (frame, a, b):
            arr.setflags(write=False)
        inv = np.linalg.inv(frame)
        inv.setflags(write=False)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "keymap_a", a)
        object.__setattr__(self, "keymap_b", b)
        object.__setattr__(self, "frame_inv", inv)

    @property
    def r(self) -> int:
        return self.frame.shape[0]

    def eta(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self.keymap_a * v + self.keymap_b * v**3

    def eta_inv(self, y: np.ndarray) -> np.ndarray:
        return solve_keymap(self.keymap_a, self.keymap_b, y)

    def same_as(self, other: FiberOperation) -> bool:
        return (
            self.base == other.base
            and np.array_equal(self.frame, other.frame)
            and np.array_equal(self.keymap_a, other.keymap_a)
            and np.array_equal(self.keymap_b, other.keymap_b)
        )


def solve_keymap(a, b, y) -> np.ndarray:
    """Unique real root x of b x^3 + a x - y = 0 (a > 0, b >= 0), componentwise.

    Cardano's formula in its cancellation-free form, followed by two Newton
    steps to bring the residual to rounding level.
    """
    a, b, y = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (a, b, y)))
    shape = a.shape
    a, b, y = a.ravel(), b.ravel(), y.ravel()
    x = y / a
    cubic = b > 1e-12 * a
    if np.any(cubic):
        p = a[cubic] / b[cubic]
        q = -y[cubic] / b[cubic]
        t = -q / 2.0
        disc = np.sqrt(t * t + (p / 3.0) ** 3)
        big = np.cbrt(t + np.where(t >= 0, disc, -disc))
        x = x.copy()
        x[cubic] = big - p / (3.0 * big)
    for _ in range(2):
        x = x - (b * x**3 + a * x - y) / (3.0 * b * x**2 + a)
    return x.reshape(shape)


def _point_rng(tag: bytes, secret_seed: bytes) -> np.random.Generator:
    digest = hashlib.sha256(tag + secret_seed).digest()
    return np.random.default_rng(np.frombuffer(digest, dtype="<u4"))


def derive_operation(
    model: TorusModel, p: ManifoldPoint, secret_seed: bytes, degenerate: bool = False
) -> FiberOperation:
    """Fiber operation at ``p``, a deterministic function of (p, secret_seed).

    Pre-frame entries and keymap offsets come from a generator seeded by
    ``secret_seed``; each is then modulated by a trigonometric polynomial in
    the coordinates of ``p``. ``degenerate=True`` returns the identity
    configuration (C = I, a = 1, b = 0) used in worked examples.
    """
    if len(secret_seed) != 32:
        raise ValueError("secret seed must be 32 bytes")
    if p.model != model:
        raise ValueError("point does not belong to this model")
    r = model.r
    if degenerate:
        return FiberOperation(p, np.eye(r), np.ones(r), np.zeros(r))

    rng = _point_rng(b"zsigil/fiber", secret_seed)
    u = p.unit_coords
    two_pi = 2.0 * np.pi

    # keymap: a in [0.5, 2] (log-uniform mix), b in [0, 1]
    a_off, b_off, a_ph, b_ph = rng.random((4, r))
    a_mix = 0.5 * (a_off + 0.5 * (1.0 + np.sin(two_pi * (u + a_ph))))
    b_mix = 0.5 * (b_off + 0.5 * (1.0 + np.cos(two_pi * (np.roll(u, -1) + b_ph))))
    keymap_a = 0.5 * 4.0**a_mix
    keymap_b = np.clip(b_mix, 0.0, 1.0)

    # entry (j, k) is scaled by 1 + sin(2 pi (u_j + 2 u_k) + phase_jk) / 2
    mixed = u[:, None] + 2.0 * u[None, :]
    for _ in range(MAX_ATTEMPTS):
        pre = rng.standard_normal((r, r))
        phase = rng.random((r, r))
        frame = pre * (1.0 + 0.5 * np.sin(two_pi * (mixed + phase)))
        if abs(np.linalg.det(frame)) >= DET_FLOOR and np.linalg.cond(frame) <= COND_CEILING:
            return FiberOperation(p, frame, keymap_a, keymap_b)
    raise GenerationError(f"no invertible frame after {MAX_ATTEMPTS} attempts")


def _check_base(op: FiberOperation, *vectors: TangentVector):
    for v in vectors:
        if v.base != op.base:
            raise ValueError("tangent vector is not based at the operation's base point")


def star(op: FiberOperation, u: TangentVector, v: TangentVector) -> np.ndarray:
    """u star_p v as an r x r endomorphism of T_pM."""
    _check_base(op, u, v)
    weights = u.components * op.eta(v.components)
    return (op.frame * weights) @ op.frame_inv


def inverse_key(op: FiberOperation, e: TangentVector) -> TangentVector:
    """The unique d with star(op, e, d) = identity."""
    _check_base(op, e)
    comps = e.components
    if np.any(np.abs(comps) < ZERO_THRESHOLD):
        raise InverseUndefinedError("public key has a zero component; star is undefined there")
    return TangentVector(op.base, op.eta_inv(1.0 / comps))


def forward_key(op: FiberOperation, d: TangentVector) -> TangentVector:
    """Public key e with e_j = 1 / eta_p(d)_j."""
    _check_base(op, d)
    eta = op.eta(d.components)
    if np.any(np.abs(eta) < ZERO_THRESHOLD):
        raise KeyDerivationError("keymap vanishes at this private key")
    return TangentVector(op.base, 1.0 / eta)


def normalized_trace(x: np.ndarray) -> float:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"normalized trace needs a square matrix, got shape {x.shape}")
    return float(np.trace(x)) / x.shape[0]
