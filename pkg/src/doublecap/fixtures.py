"""Ready-made tabulated protocols and qubit state grids."""

from __future__ import annotations

import math

import numpy as np

from . import hilbert
from .hilbert import PureState
from .protocol import MESSAGE_COUNT, SharedPair, sign
from .explorer import fibonacci_sphere
from .tabulated import TabulatedProtocol

INV_SQRT2 = 1 / math.sqrt(2)


def qubit_grid() -> np.ndarray:
    """``|0>, |1>, |+>, |->`` as rows."""
    return np.array(
        [[1, 0], [0, 1], [INV_SQRT2, INV_SQRT2], [INV_SQRT2, -INV_SQRT2]],
        dtype=np.complex128,
    )


def identity_grid_protocol(states: np.ndarray | None = None) -> TabulatedProtocol:
    """Alice sends the grid index of her state; Bob answers with Born probabilities.

    Reproduces the quantum statistics exactly on its own grid, and every
    support is a single state.
    """
    states = qubit_grid() if states is None else np.asarray(states, dtype=np.complex128)
    M = states.shape[0]
    decoder = np.abs(states.conj() @ states.T) ** 2
    return TabulatedProtocol(
        dimension=states.shape[1],
        states=states,
        measurements=states,
        shared_labels=("X0",),
        shared_weights=np.array([1.0]),
        message_count=M,
        encoder=np.eye(M)[None],
        decoder=decoder[None],
        support_weights=np.full(M, 1.0 / M),
    )


def orthogonal_support_protocol() -> TabulatedProtocol:
    """Identity grid with ``|1>`` rerouted onto the message of ``|0>``.

    Message 0 then carries the orthogonal pair (states 0 and 1).
    """
    tp = identity_grid_protocol()
    encoder = np.array(tp.encoder)
    encoder[0, 1] = 0.0
    encoder[0, 1, 0] = 1.0
    return tp.replace(encoder=encoder)


def single_message_protocol(N: int = 4) -> TabulatedProtocol:
    """One message for all ``N`` basis states; Bob guesses uniformly."""
    states = np.eye(N, dtype=np.complex128)
    return TabulatedProtocol(
        dimension=N,
        states=states,
        measurements=states,
        shared_labels=("X0",),
        shared_weights=np.array([1.0]),
        message_count=1,
        encoder=np.ones((1, N, 1)),
        decoder=np.full((1, 1, N), 1.0 / N),
        support_weights=np.full(N, 1.0 / N),
    )


def antipodal_bloch_grid(count: int = 500) -> np.ndarray:
    """``count`` Bloch vectors made of ``count/2`` Fibonacci points and their antipodes."""
    if count % 2:
        raise ValueError("count must be even")
    half = fibonacci_sphere(count // 2)
    return np.vstack([half, -half])


def states_from_bloch_rows(bloch: np.ndarray) -> np.ndarray:
    return np.array([hilbert.state_from_bloch(b).amplitudes for b in bloch])


def lune_fractions(shared: SharedPair) -> np.ndarray:
    """Solid-angle fraction of each message region ``{x : sign(x.lambda_i) = c_i}``.

    Indexed like :attr:`MessageBits.index`. Two great circles at dihedral
    angle ``a`` cut the sphere into two lunes of ``(pi - a)/2pi`` where the
    signs agree and two of ``a/2pi`` where they differ.
    """
    a = math.acos(max(-1.0, min(1.0, float(shared.lambda1.as_array() @ shared.lambda2.as_array()))))
    same = (math.pi - a) / (2 * math.pi)
    diff = a / (2 * math.pi)
    return np.array([same, diff, diff, same])


def lune_protocol(shared: SharedPair, bloch: np.ndarray, weights: str = "exact") -> TabulatedProtocol:
    """The two-bit encoder at one fixed shared pair, tabulated on a Bloch grid.

    The decoder is Bob's deterministic rule evaluated on the same grid.
    ``weights="exact"`` splits each lune's analytic solid angle evenly
    among its grid points; ``"uniform"`` gives every point ``1/M``.
    """
    lam1, lam2 = shared.lambda1.as_array(), shared.lambda2.as_array()
    c1, c2 = sign(bloch @ lam1), sign(bloch @ lam2)
    k = 2 * (c1 < 0) + (c2 < 0)
    M = bloch.shape[0]
    encoder = np.zeros((1, M, MESSAGE_COUNT))
    encoder[0, np.arange(M), k] = 1.0
    decoder = np.zeros((1, MESSAGE_COUNT, M))
    for msg in range(MESSAGE_COUNT):
        d1 = -1 if msg & 2 else 1
        d2 = -1 if msg & 1 else 1
        decoder[0, msg] = (sign(bloch @ (d1 * lam1 + d2 * lam2)) > 0).astype(float)
    if weights == "exact":
        counts = np.bincount(k, minlength=MESSAGE_COUNT)
        frac = lune_fractions(shared)
        sw = np.where(counts[k] > 0, frac[k] / np.maximum(counts[k], 1), 0.0)
    elif weights == "uniform":
        sw = np.full(M, 1.0 / M)
    else:
        raise ValueError(f"weights must be 'exact' or 'uniform', got {weights!r}")
    states = states_from_bloch_rows(bloch)
    return TabulatedProtocol(
        dimension=2,
        states=states,
        measurements=states,
        shared_labels=("fixed",),
        shared_weights=np.array([1.0]),
        message_count=MESSAGE_COUNT,
        encoder=encoder,
        decoder=decoder,
        support_weights=sw,
    )


def hemisphere_protocol(count: int = 200) -> TabulatedProtocol:
    """Identity-style protocol whose grid spans only the upper Bloch hemisphere.

    Support weights are true solid-angle fractions of the whole sphere, so
    the supports together cover one half.
    """
    pts = fibonacci_sphere(2 * count)
    upper = pts[pts[:, 2] > 0][:count]
    states = states_from_bloch_rows(upper)
    tp = identity_grid_protocol(states)
    return tp.replace(support_weights=np.full(upper.shape[0], 0.5 / upper.shape[0]))


def pure_state(label: str) -> PureState:
    named = {
        "0": [1, 0],
        "1": [0, 1],
        "+": [INV_SQRT2, INV_SQRT2],
        "-": [INV_SQRT2, -INV_SQRT2],
        "+i": [INV_SQRT2, 1j * INV_SQRT2],
        "-i": [INV_SQRT2, -1j * INV_SQRT2],
    }
    return PureState(named[label])
