"""Pure states, Born probabilities, the Bloch map and seeded samplers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-9


class DimensionError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector of dimension ``N >= 2``.

    Input within ``NORM_TOL`` of unit norm is accepted and renormalized so the
    stored amplitudes are unit norm to rounding precision.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size < 2:
            raise DimensionError(f"state dimension must be >= 2, got {amps.size}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm {norm!r} is not 1")
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> PureState:
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, N: int, k: int) -> PureState:
        amps = np.zeros(N, dtype=np.complex128)
        amps[k] = 1.0
        return cls(amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def __len__(self):
        return self.amplitudes.size

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"Bloch vector norm {norm!r} is not 1")
        object.__setattr__(self, "x", float(self.x) / norm)
        object.__setattr__(self, "y", float(self.y) / norm)
        object.__setattr__(self, "z", float(self.z) / norm)

    @classmethod
    def from_array(cls, v) -> BlochVector:
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.size != 3:
            raise DimensionError(f"Bloch vector needs 3 components, got {v.size}")
        return cls(*v)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self):
        return BlochVector(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class RandomStream:
    """Reproducible random source keyed by ``(seed, stream)``.

    Distinct stream indices under one seed give statistically independent
    sequences (via ``SeedSequence`` spawn keys), so parallel tasks each take
    their own index.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream index must be non-negative")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(ss)))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def _as_vector(a) -> np.ndarray:
    if isinstance(a, PureState):
        return a.amplitudes
    if isinstance(a, BlochVector):
        return a.as_array()
    return np.asarray(a).reshape(-1)


def _check_unit(v: np.ndarray, name: str):
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > NORM_TOL:
        raise NormalizationError(f"{name} has norm {norm!r}, expected 1")


def born_probability(psi, phi) -> float:
    """Probability ``|<phi|psi>|^2`` of projecting ``psi`` onto ``phi``."""
    a, b = _as_vector(psi), _as_vector(phi)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.size} vs {b.size}")
    _check_unit(a, "psi")
    _check_unit(b, "phi")
    p = abs(np.vdot(b, a)) ** 2
    return float(min(1.0, max(0.0, p)))


def bloch_from_state(psi: PureState) -> BlochVector:
    """Bloch vector of a qubit state; ``|0>`` maps to ``(0, 0, 1)``."""
    amps = _as_vector(psi)
    if amps.size != 2:
        raise DimensionError(f"Bloch map needs N=2, got N={amps.size}")
    _check_unit(amps, "psi")
    a, b = amps
    cross = np.conj(a) * b
    return BlochVector(2 * cross.real, 2 * cross.imag, abs(a) ** 2 - abs(b) ** 2)


def state_from_bloch(b: BlochVector) -> PureState:
    """Inverse of :func:`bloch_from_state`, with a real non-negative first amplitude."""
    if not isinstance(b, BlochVector):
        b = BlochVector.from_array(b)
    theta = np.arccos(np.clip(b.z, -1.0, 1.0))
    phi = np.arctan2(b.y, b.x)
    return PureState([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def haar_random_states(N: int, count: int, rng: RandomStream) -> np.ndarray:
    """``count x N`` array of Haar-random unit vectors (rows)."""
    if N < 2:
        raise DimensionError(f"N must be >= 2, got {N}")
    g = rng.generator
    z = g.standard_normal((count, N)) + 1j * g.standard_normal((count, N))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_random_state(N: int, rng: RandomStream) -> PureState:
    return PureState(haar_random_states(N, 1, rng)[0])


def uniform_sphere_points(d: int, count: int, rng: RandomStream) -> np.ndarray:
    """``count x d`` array of points uniform on the unit sphere in ``R^d``."""
    if d < 2:
        raise DimensionError(f"d must be >= 2, got {d}")
    x = rng.generator.standard_normal((count, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def uniform_sphere_point(d: int, rng: RandomStream) -> np.ndarray:
    return uniform_sphere_points(d, 1, rng)[0]


def is_orthogonal(a, b, tol: float = ORTHOGONALITY_TOL) -> bool:
    """True iff the overlap ``|<a|b>|`` (or ``|a.b|`` for real vectors) is at most ``tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    u, v = _as_vector(a), _as_vector(b)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.size} vs {v.size}")
    return bool(abs(np.vdot(u, v)) <= tol)
