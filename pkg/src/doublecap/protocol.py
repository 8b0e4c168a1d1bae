"""The two-bit qubit-channel protocol and an equivalence verifier.

Alice holds a qubit state with Bloch vector ``x``; Bob wants to measure the
projector onto a state with Bloch vector ``y``. They share two independent
uniform unit vectors ``lambda1, lambda2``. Alice sends
``c_i = sign(x . lambda_i)`` (two bits) and Bob reports the outcome
``sign(y . (c1 lambda1 + c2 lambda2))``, where ``+1`` means the projector
onto ``y`` clicked. Ties resolve to ``+1``.

The outcome orientation is fixed by :data:`OUTCOME_SIGN`, chosen by
:func:`calibrate_outcome_sign` (which the test suite re-runs).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from . import hilbert
from .hilbert import BlochVector, PureState, RandomStream
from .montecarlo import count_hits, derive_seed
from .tabulated import TabulatedProtocol

OUTCOME_SIGN = 1
EXACT_TOL = 1e-9
SIGMA_MULTIPLIER = 6.0


def sign(v):
    """Sign with ``sign(0) = +1``; works elementwise on arrays."""
    return np.where(np.asarray(v) >= 0, 1, -1)


@dataclass(frozen=True)
class SharedPair:
    lambda1: BlochVector
    lambda2: BlochVector

    @classmethod
    def sample(cls, rng: RandomStream) -> SharedPair:
        pts = hilbert.uniform_sphere_points(3, 2, rng)
        return cls(BlochVector.from_array(pts[0]), BlochVector.from_array(pts[1]))


@dataclass(frozen=True)
class MessageBits:
    c1: int
    c2: int

    def __post_init__(self):
        if self.c1 not in (-1, 1) or self.c2 not in (-1, 1):
            raise ValueError(f"message bits must be +-1, got ({self.c1}, {self.c2})")

    @property
    def index(self) -> int:
        """Message number ``k`` in ``0..3``: ``(+,+), (+,-), (-,+), (-,-)``."""
        return 2 * (self.c1 < 0) + (self.c2 < 0)

    @classmethod
    def from_index(cls, k: int) -> MessageBits:
        if k not in range(4):
            raise ValueError(f"message index must be in 0..3, got {k}")
        return cls(-1 if k & 2 else 1, -1 if k & 1 else 1)


MESSAGE_COUNT = 4


def _bloch(v) -> np.ndarray:
    if isinstance(v, BlochVector):
        return v.as_array()
    if isinstance(v, PureState):
        return hilbert.bloch_from_state(v).as_array()
    return BlochVector.from_array(v).as_array()


def tb_encode(x, shared: SharedPair) -> MessageBits:
    xv = _bloch(x)
    return MessageBits(
        int(sign(xv @ shared.lambda1.as_array())),
        int(sign(xv @ shared.lambda2.as_array())),
    )


def tb_decode(y, msg: MessageBits, shared: SharedPair) -> int:
    yv = _bloch(y)
    direction = msg.c1 * shared.lambda1.as_array() + msg.c2 * shared.lambda2.as_array()
    return OUTCOME_SIGN * int(sign(yv @ direction))


def tb_outcomes(x: np.ndarray, y: np.ndarray, lam1: np.ndarray, lam2: np.ndarray, outcome_sign: int = OUTCOME_SIGN) -> np.ndarray:
    """Vectorized protocol run: one outcome per row of ``lam1``/``lam2``."""
    c1 = sign(lam1 @ x)
    c2 = sign(lam2 @ x)
    direction = c1[:, None] * lam1 + c2[:, None] * lam2
    return outcome_sign * sign(direction @ y)


def _hits_sampler(x: np.ndarray, y: np.ndarray, outcome_sign: int = OUTCOME_SIGN):
    def sampler(size: int, rng: RandomStream) -> int:
        lam = hilbert.uniform_sphere_points(3, 2 * size, rng)
        out = tb_outcomes(x, y, lam[0::2], lam[1::2], outcome_sign)
        return int(np.count_nonzero(out > 0))

    return sampler


@dataclass(frozen=True)
class SimulationResult:
    frequency: float
    hits: int
    trials: int
    born: float

    @property
    def deviation(self) -> float:
        return abs(self.frequency - self.born)

    @property
    def stderr(self) -> float:
        """Empirical standard error of the frequency."""
        f = self.frequency
        return math.sqrt(f * (1 - f) / self.trials)

    @property
    def born_sigma(self) -> float:
        """Standard deviation of the frequency if the model reproduces the Born rule."""
        p = self.born
        return math.sqrt(p * (1 - p) / self.trials)

    def within(self, k: float = SIGMA_MULTIPLIER) -> bool:
        return self.deviation <= k * self.born_sigma + EXACT_TOL


def tb_simulate(psi: PureState, phi: PureState, trials: int, seed: int, threads: int = 1) -> SimulationResult:
    """Run the protocol ``trials`` times with fresh shared vectors each time."""
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    x, y = _bloch(psi), _bloch(phi)
    hits = count_hits(_hits_sampler(x, y), trials, seed, threads)
    return SimulationResult(hits / trials, hits, trials, hilbert.born_probability(psi, phi))


def tb_frequency(psi: PureState, phi: PureState, trials: int, seed: int, threads: int = 1) -> float:
    return tb_simulate(psi, phi, trials, seed, threads).frequency


def calibrate_outcome_sign(trials: int = 200_000, seed: int = 0) -> tuple[int, float]:
    """Measure ``E[outcome]`` for ``x . y = 1/2`` under the unflipped rule.

    Returns the sign that makes the outcome correlation ``+x.y`` and the
    measured correlation.
    """
    x = np.array([0.0, 0.0, 1.0])
    y = np.array([math.sqrt(3) / 2, 0.0, 0.5])
    hits = count_hits(_hits_sampler(x, y, outcome_sign=1), trials, seed)
    corr = 2 * hits / trials - 1
    return (1 if corr * (x @ y) > 0 else -1), corr


@dataclass(frozen=True)
class PairDeviation:
    index: int
    state: int | None
    measurement: int | None
    p_model: float
    p_quantum: float
    stderr: float
    tolerance: float

    @property
    def deviation(self) -> float:
        return abs(self.p_model - self.p_quantum)

    @property
    def flagged(self) -> bool:
        return self.deviation > self.tolerance


@dataclass(frozen=True)
class EquivalenceReport:
    mode: str
    pairs: tuple[PairDeviation, ...]

    @property
    def max_deviation(self) -> float:
        return max((p.deviation for p in self.pairs), default=0.0)

    @property
    def flagged(self) -> list[PairDeviation]:
        return [p for p in self.pairs if p.flagged]

    @property
    def passed(self) -> bool:
        return not self.flagged


def verify_equivalence(
    protocol: TabulatedProtocol | Callable[[PureState, PureState, int, int], float],
    pairs: Sequence | None = None,
    trials: int | None = None,
    seed: int = 0,
    tolerance: float | None = None,
) -> EquivalenceReport:
    """Compare model outcome probabilities with ``|<phi|psi>|^2``.

    For a :class:`TabulatedProtocol` the model side is summed exactly, and
    ``pairs`` are ``(state_index, measurement_index)`` tuples (default: every
    combination). Anything else is treated as an executable protocol:
    a callable ``(psi, phi, trials, seed) -> frequency`` run by Monte Carlo
    on ``(psi, phi)`` state pairs.

    Default tolerance is ``1e-9`` for exact summation and six binomial
    standard deviations (at the Born probability) for Monte Carlo.
    """
    if isinstance(protocol, TabulatedProtocol):
        model = protocol.model_probabilities()
        quantum = protocol.quantum_probabilities()
        if pairs is None:
            pairs = [(i, j) for i in range(protocol.num_states) for j in range(protocol.num_measurements)]
        tol = EXACT_TOL if tolerance is None else tolerance
        rows = []
        for n, (i, j) in enumerate(pairs):
            rows.append(PairDeviation(n, i, j, float(model[i, j]), float(quantum[i, j]), 0.0, tol))
        return EquivalenceReport("exact", tuple(rows))

    if not callable(protocol):
        raise TypeError("protocol must be a TabulatedProtocol or a callable")
    if trials is None:
        raise ValueError("executable protocols need a trial count")
    if pairs is None:
        raise ValueError("executable protocols need explicit (psi, phi) pairs")
    rows = []
    for n, (psi, phi) in enumerate(pairs):
        freq = float(protocol(psi, phi, trials, derive_seed(seed, n)))
        p = hilbert.born_probability(psi, phi)
        sigma = math.sqrt(p * (1 - p) / trials)
        tol = SIGMA_MULTIPLIER * sigma + EXACT_TOL if tolerance is None else tolerance
        rows.append(PairDeviation(n, None, None, freq, p, math.sqrt(freq * (1 - freq) / trials), tol))
    return EquivalenceReport("monte_carlo", tuple(rows))
