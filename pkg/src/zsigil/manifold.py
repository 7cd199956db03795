"""Flat complex torus model, base points, and truncated-Fourier sections.

The compact Calabi-Yau is modelled as the flat torus R^r / (moduli * Z^r).
Its tangent bundle is trivial, so every fiber T_pM is R^r and a section is
just a smooth periodic vector field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError

MAX_TERMS = 32
SECTION_BOUNDS = (0.1, 10.0)
MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class TorusModel:
    r: int = 6
    moduli: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not isinstance(self.r, (int, np.integer)) or self.r < 2 or self.r % 2:
            raise ValueError(f"real dimension must be even and >= 2, got {self.r!r}")
        if not self.moduli:
            object.__setattr__(self, "moduli", (1.0,) * self.r)
        moduli = tuple(float(m) for m in self.moduli)
        if len(moduli) != self.r:
            raise ValueError(f"expected {self.r} moduli, got {len(moduli)}")
        if not all(0.0 < m <= 1.0 for m in moduli):
            raise ValueError("moduli must lie in (0, 1]")
        object.__setattr__(self, "moduli", moduli)

    @property
    def complex_dim(self) -> int:
        return self.r // 2

    @property
    def moduli_array(self) -> np.ndarray:
        return np.asarray(self.moduli)


def _reduce(coords: np.ndarray, moduli: np.ndarray) -> np.ndarray:
    out = np.mod(coords, moduli)
    # np.mod can round up to the modulus itself for tiny negative inputs
    return np.where(out >= moduli, 0.0, out)


@dataclass(frozen=True)
class ManifoldPoint:
    model: TorusModel
    coords: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.shape != (self.model.r,):
            raise ValueError(f"expected {self.model.r} coordinates, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        reduced = _reduce(arr, self.model.moduli_array)
        object.__setattr__(self, "coords", tuple(float(x) for x in reduced))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords)

    @property
    def unit_coords(self) -> np.ndarray:
        """Coordinates rescaled to the unit cube [0, 1)^r."""
        return self.array / self.model.moduli_array


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: ManifoldPoint
    components: np.ndarray

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        if comps.shape != (self.base.model.r,):
            raise ValueError(
                f"tangent vector needs {self.base.model.r} components, got shape {comps.shape}"
            )
        if not np.all(np.isfinite(comps)):
            raise ValueError("tangent vector components must be finite")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def r(self) -> int:
        return self.components.shape[0]

    def scaled(self, factor: float) -> TangentVector:
        return TangentVector(self.base, factor * self.components)

    def __eq__(self, other):
        if not isinstance(other, TangentVector):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.components, other.components)


@dataclass(frozen=True, eq=False)
class FourierSection:
    """Vector field sigma(x)_j = sum_t a_jt cos(2 pi k_jt.u) + b_jt sin(2 pi k_jt.u).

    ``u`` are the unit-cube coordinates of the point, so the field is exactly
    periodic on the torus. ``frequencies`` has shape (r, T, r) and
    ``amplitudes`` shape (r, T, 2).
    """

    model: TorusModel
    cutoff: int
    frequencies: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        r = self.model.r
        if self.frequencies.ndim != 3 or self.frequencies.shape[0] != r or self.frequencies.shape[2] != r:
            raise ValueError(f"frequency table must have shape (r, T, r), got {self.frequencies.shape}")
        if self.amplitudes.shape != self.frequencies.shape[:2] + (2,):
            raise ValueError("amplitude table does not match frequency table")
        if self.frequencies.size and np.abs(self.frequencies).max() > self.cutoff:
            raise ValueError("frequency exceeds cutoff")

    @property
    def terms_per_component(self) -> int:
        return self.frequencies.shape[1]


def sample_point(model: TorusModel, rng) -> ManifoldPoint:
    """Uniform base point on the fundamental domain."""
    return ManifoldPoint(model, tuple(rng.random(model.r) * model.moduli_array))


def evaluate_section(sec: FourierSection, p: ManifoldPoint) -> TangentVector:
    if sec.model.r != p.model.r:
        raise ValueError(f"section has dimension {sec.model.r}, point has {p.model.r}")
    phase = 2.0 * np.pi * (sec.frequencies @ p.unit_coords)  # (r, T)
    values = (sec.amplitudes[..., 0] * np.cos(phase) + sec.amplitudes[..., 1] * np.sin(phase)).sum(axis=1)
    return TangentVector(p, values)


def _component_frequencies(r: int, cutoff: int, n_terms: int, rng) -> np.ndarray:
    """``n_terms`` distinct frequency vectors in [-cutoff, cutoff]^r."""
    width = 2 * cutoff + 1
    slots = width**r
    if slots <= 4 * MAX_TERMS:
        picks = rng.choice(slots, size=n_terms, replace=False)
        return (picks[:, None] // width ** np.arange(r)) % width - cutoff
    while slots < 2**62:
        cands = rng.integers(0, slots, size=2 * n_terms)
        _, first = np.unique(cands, return_index=True)
        if first.size >= n_terms:
            picks = cands[np.sort(first)[:n_terms]]
            return (picks[:, None] // width ** np.arange(r, dtype=np.int64)) % width - cutoff
    while True:
        cands = rng.integers(-cutoff, cutoff + 1, size=(2 * n_terms, r))
        _, first = np.unique(cands, axis=0, return_index=True)
        if first.size >= n_terms:
            return cands[np.sort(first)[:n_terms]]


def _component_terms(model: TorusModel, cutoff: int, rng) -> tuple[np.ndarray, np.ndarray]:
    n_terms = min(MAX_TERMS, (2 * cutoff + 1) ** model.r)
    freqs = _component_frequencies(model.r, cutoff, n_terms, rng)
    return freqs, rng.standard_normal((n_terms, 2))


def sample_section(model: TorusModel, cutoff: int, rng, at: ManifoldPoint | None = None) -> FourierSection:
    """Random sparse Fourier section.

    When ``at`` is given, each output component is redrawn until its value
    there has magnitude in [0.1, 10].
    """
    if cutoff < 0:
        raise ValueError("frequency cutoff must be >= 0")
    lo, hi = SECTION_BOUNDS
    freqs, amps = [], []
    for _ in range(model.r):
        for _ in range(MAX_ATTEMPTS):
            f, a = _component_terms(model, cutoff, rng)
            if at is None:
                break
            phase = 2.0 * np.pi * (f @ at.unit_coords)
            value = abs(float(a[:, 0] @ np.cos(phase) + a[:, 1] @ np.sin(phase)))
            if lo <= value <= hi:
                break
        else:
            raise GenerationError(f"no well-conditioned section after {MAX_ATTEMPTS} attempts")
        freqs.append(f)
        amps.append(a)
    return FourierSection(model, cutoff, np.stack(freqs), np.stack(amps))
