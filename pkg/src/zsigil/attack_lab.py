"""Adversary-cost laboratory.

Grover query and gate estimates for an unstructured search space, a yes/no
marking oracle over candidate private keys, desk-scale exhaustive search on
planted instances, serialization-depth measurement, and the ratio attack that
recovers plaintext from public keys plus a recomputable chain.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .analytic import chain_values
from .codec import encode_text
from .fiber_algebra import FiberOperation, derive_operation, forward_key
from .manifold import TangentVector, TorusModel, sample_point
from .scheme import ROUNDING_MARGIN, CiphertextMessage, KeyPair, PublicKey, recover_blocks, round_blocks

ORACLE_IDENTITY_TOL = 1e-6
DESK_SCALE_LIMIT = 2**24
COSMOLOGICAL_LOG10_RANGE = (120.0, 122.0)


# ----------------------------------------------------------- Grover model


@dataclass(frozen=True)
class SearchSpaceModel:
    n: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("bit-length must be >= 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def log2_size(self) -> float:
        return self.alpha * self.n

    @property
    def size(self) -> float:
        return 2.0**self.log2_size

    @classmethod
    def from_size(cls, size: int) -> SearchSpaceModel:
        """Model with n = log2(size) and alpha = 1."""
        if size < 1:
            raise ValueError("search space must be non-empty")
        if size == 1:
            return cls(n=0, alpha=1.0)
        return cls(n=1, alpha=math.log2(size))


@dataclass(frozen=True)
class GroverEstimate:
    log2_space: float
    expected_queries: float | None  # (pi/4) sqrt(S); None when it overflows a float
    queries: int | None  # ceil of the above
    log2_queries: float
    lower_bound_log2: float  # alpha n / 2
    gate_degree: int
    log2_gate_cost: float  # log2(Q * n^k)

    @property
    def lower_bound_log10(self) -> float:
        return self.lower_bound_log2 * math.log10(2.0)

    @property
    def log10_queries(self) -> float:
        return self.log2_queries * math.log10(2.0)

    @property
    def log10_gate_cost(self) -> float:
        return self.log2_gate_cost * math.log10(2.0)


def grover_queries(model: SearchSpaceModel, gate_degree: int = 1) -> GroverEstimate:
    """Query count (pi/4) sqrt(S) and gate cost Q * g(n) with g(n) = n^k."""
    if gate_degree < 0:
        raise ValueError("gate degree must be >= 0")
    half = model.log2_size / 2.0
    log2_q = math.log2(math.pi / 4.0) + half
    expected = queries = None
    if half < 1000:
        expected = (math.pi / 4.0) * 2.0**half
        queries = max(1, math.ceil(expected))
        log2_q = math.log2(queries)
    gate_log2 = log2_q + gate_degree * math.log2(model.n) if model.n > 1 else log2_q
    return GroverEstimate(model.log2_size, expected, queries, log2_q, half, gate_degree, gate_log2)


def log10_pow2(bits: int) -> float:
    if bits < 0:
        raise ValueError("bits must be >= 0")
    return bits * math.log10(2.0)


def cosmological_margin(log10_bound: float) -> tuple[float, float]:
    """Orders of magnitude by which a bound exceeds the 10^120..10^122 range."""
    lo, hi = COSMOLOGICAL_LOG10_RANGE
    return log10_bound - hi, log10_bound - lo


# ------------------------------------------------------ marking oracle


@dataclass(frozen=True, eq=False)
class DiscretizedKeySpace:
    """Grid of ``levels`` values per component over [low, high], ``dim`` components.

    ``levels=1`` is the singleton grid {low}^dim, kept only for the trivial
    one-point search; planted experiments require at least two levels.
    """

    levels: int
    dim: int
    low: float = 0.1
    high: float = 10.0

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("need at least one level per component")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not 0 < self.low < self.high:
            raise ValueError("grid box must satisfy 0 < low < high")

    @property
    def size(self) -> int:
        return self.levels**self.dim

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.low, self.high, self.levels)

    def digits(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        return (idx[..., None] // self.levels ** np.arange(self.dim, dtype=np.int64)) % self.levels

    def points(self, indices) -> np.ndarray:
        return self.values[self.digits(indices)]


class MarkingOracle:
    """Yes/no predicate on candidate private keys for one intercepted block.

    A candidate is marked iff star(e, candidate) is the identity within 1e-6
    and the plaintext it implies through the decryption formula is within the
    rounding margin of an integer. ``calls`` counts candidates evaluated.
    """

    def __init__(self, public_key, chain_factor: float, ciphertext, op: FiberOperation):
        self.e = np.asarray(getattr(public_key, "components", public_key), dtype=float)
        self.c = np.asarray(getattr(ciphertext, "components", ciphertext), dtype=float)
        self.chain_factor = float(chain_factor)
        self.op = op
        self.calls = 0

    def batch(self, candidates: np.ndarray) -> np.ndarray:
        cand = np.atleast_2d(np.asarray(candidates, dtype=float))
        self.calls += cand.shape[0]
        eta = self.op.eta(cand)
        frame, inv = self.op.frame, self.op.frame_inv
        r = frame.shape[0]
        ident = (frame[None] * (self.e * eta)[:, None, :]) @ inv
        ident[:, np.arange(r), np.arange(r)] -= 1.0
        marked = np.abs(ident).max(axis=(1, 2)) < ORACLE_IDENTITY_TOL
        if np.any(marked):
            hit = np.flatnonzero(marked)
            prod = (frame[None] * (self.c * eta[hit])[:, None, :]) @ inv
            m_est = np.trace(prod / self.chain_factor, axis1=1, axis2=2) / r
            _, ok = round_blocks(m_est)
            marked[hit] = ok
        return marked

    def __call__(self, candidate) -> bool:
        comps = getattr(candidate, "components", candidate)
        return bool(self.batch(np.asarray(comps, dtype=float)[None])[0])


def marking_oracle(pub_block, candidate, secret_op: FiberOperation) -> bool:
    """One-shot oracle query; ``pub_block`` is (e_i, N_{i-1}, c_i)."""
    e, n_prev, c = pub_block
    return MarkingOracle(e, n_prev, c, secret_op)(candidate)


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    space: DiscretizedKeySpace
    op: FiberOperation
    planted_index: int
    private: np.ndarray
    public: np.ndarray
    chain_factor: float
    plaintext: int
    ciphertext: np.ndarray

    def oracle(self) -> MarkingOracle:
        return MarkingOracle(self.public, self.chain_factor, self.ciphertext, self.op)


def plant_instance(space: DiscretizedKeySpace, rng) -> PlantedInstance:
    """Random fiber operation with a private key planted on the grid."""
    if space.levels < 2:
        raise ValueError("planted experiments need at least two levels per component")
    model = TorusModel(space.dim)
    p = sample_point(model, rng)
    op = derive_operation(model, p, rng.bytes(32))
    index = int(rng.integers(space.size))
    d = space.points(index)
    e = forward_key(op, TangentVector(p, d)).components
    n_prev = float(chain_values(rng.bytes(32), 1)[0])
    m = int(rng.integers(1, 0x10000 + 2))
    return PlantedInstance(space, op, index, d, e, n_prev, m, (m * n_prev) * e)


@dataclass(frozen=True)
class SearchResult:
    found_index: int | None
    found_key: np.ndarray | None
    queries: int


def exhaustive_search(space: DiscretizedKeySpace, oracle, rng, chunk: int = 4096) -> SearchResult:
    """Scan the grid in a seed-randomized order until the oracle marks a point.

    Candidates are evaluated in chunks for speed; the reported query count is
    the position of the first marked candidate in the scan order, i.e. what a
    one-at-a-time scan would consume.
    """
    if space.size > DESK_SCALE_LIMIT:
        raise ValueError(f"search space {space.size} exceeds desk scale 2^24")
    order = rng.permutation(space.size)
    for start in range(0, space.size, chunk):
        idx = order[start : start + chunk]
        marked = np.flatnonzero(oracle.batch(space.points(idx)))
        if marked.size:
            pos = int(marked[0])
            return SearchResult(int(idx[pos]), space.points(idx[pos]), start + pos + 1)
    return SearchResult(None, None, space.size)


@dataclass(frozen=True)
class ExhaustiveReport:
    S: int
    trials: int
    mean_queries: float
    stddev: float
    grover_estimate: float
    ratio: float
    failures: int = 0


def run_exhaustive_experiment(space: DiscretizedKeySpace, trials: int, rng) -> ExhaustiveReport:
    """Mean classical queries over planted trials, against (pi/4) sqrt(S)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    queries = np.empty(trials)
    failures = 0
    for t in range(trials):
        inst = plant_instance(space, rng)
        res = exhaustive_search(space, inst.oracle(), rng)
        if res.found_index != inst.planted_index:
            failures += 1
        queries[t] = res.queries
    grover = (math.pi / 4.0) * math.sqrt(space.size)
    mean = float(queries.mean())
    return ExhaustiveReport(space.size, trials, mean, float(queries.std(ddof=1)) if trials > 1 else 0.0,
                            grover, mean / grover, failures)


def count_marked(space: DiscretizedKeySpace, oracle) -> int:
    """Number of grid points the oracle marks (full enumeration)."""
    total = 0
    for start in range(0, space.size, 65536):
        total += int(oracle.batch(space.points(np.arange(start, min(start + 65536, space.size)))).sum())
    return total


# ------------------------------------------------------ serialization


def serial_depth(ct: CiphertextMessage) -> int:
    """Longest path in the block-evaluation DAG (block i needs chain position i-1)."""
    depth = [0] * ct.D
    for i in range(ct.D):
        depth[i] = 1 + (depth[i - 1] if i > 0 else 0)
    return max(depth, default=0)


def sattolo_permutation(n: int, rng) -> np.ndarray:
    """Uniform cyclic permutation: no index is left in place (for n > 1)."""
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(i))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def shuffled_chain_failures(key: KeyPair, ct: CiphertextMessage, rng, trials: int = 10) -> list[int]:
    """Per trial, count blocks failing the integrity check when every block is
    decrypted against some other chain position."""
    chain = chain_values(ct.message_seed, ct.D)
    counts = []
    for _ in range(trials):
        perm = sattolo_permutation(ct.D, rng)
        _, ok = round_blocks(recover_blocks(key, ct, chain[perm]))
        counts.append(int((~ok).sum()))
    return counts


def wrong_chain_rejections(key: KeyPair, ct: CiphertextMessage) -> np.ndarray:
    """For each block i < D-1, whether decrypting it with chain position i+1 fails."""
    chain = chain_values(ct.message_seed, ct.D)
    _, ok = round_blocks(recover_blocks(key, ct, np.roll(chain, -1)))
    return ~ok[:-1]


# ------------------------------------------------------ ratio attack


@dataclass(frozen=True, eq=False)
class RatioAttackResult:
    recovered: np.ndarray
    within_margin: np.ndarray
    margin_rate: float
    exact_rate: float | None

    @property
    def full_recovery(self) -> bool:
        return self.exact_rate == 1.0


def ratio_attack(pub: PublicKey, ct: CiphertextMessage, chain, plaintext: str | None = None) -> RatioAttackResult:
    """Recover m_i as the median over j of c_ij / (N_i e_ij), rounded.

    Needs only public data: the per-block keys and a chain recomputed from the
    ciphertext header (or a guessed one, when the attacker lacks the seed).
    """
    values = np.asarray([getattr(f, "value", f) for f in chain], dtype=float)
    if ct.D == 0:
        return RatioAttackResult(np.zeros(0, dtype=np.int64), np.zeros(0, bool), 1.0, 1.0 if plaintext == "" else None)
    ratios = ct.blocks / (values[: ct.D, None] * pub.keys[: ct.D])
    est = np.median(ratios, axis=1)
    rounded, ok = round_blocks(est, ROUNDING_MARGIN)
    exact = None
    if plaintext is not None:
        truth = encode_text(plaintext).blocks
        exact = float(np.mean(ok & (rounded == truth))) if truth.size == ct.D else 0.0
    return RatioAttackResult(rounded, ok, float(ok.mean()), exact)


# ------------------------------------------------------ reports


def to_csv(rows, fieldnames=None) -> str:
    rows = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames or list(rows[0]), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


EXHAUSTIVE_COLUMNS = ["S", "trials", "mean_queries", "stddev", "grover_estimate", "ratio"]
