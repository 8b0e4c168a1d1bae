"""Finite one-way protocols given as probability tables, and their JSON form.

A tabulated protocol lists candidate states, candidate measurement vectors,
a weighted set of shared values ``X`` and ``R`` messages. The encoder holds
``rho(k | X, psi)`` indexed ``[X][state][k]``; the decoder holds
``P(phi | k, X)`` indexed ``[X][k][measurement]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hilbert import NORM_TOL

SUM_TOL = 1e-9
RANGE_SLACK = 1e-12


class ProtocolValidationError(ValueError):
    """Malformed protocol; ``path`` locates the first offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True, eq=False)
class TabulatedProtocol:
    dimension: int
    states: np.ndarray
    measurements: np.ndarray
    shared_labels: tuple[str, ...]
    shared_weights: np.ndarray
    message_count: int
    encoder: np.ndarray
    decoder: np.ndarray
    support_weights: np.ndarray | None = None

    def __post_init__(self):
        coerce = {
            "states": np.complex128,
            "measurements": np.complex128,
            "shared_weights": float,
            "encoder": float,
            "decoder": float,
            "support_weights": float,
        }
        for name, dtype in coerce.items():
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, np.array(arr, dtype=dtype))
        object.__setattr__(self, "shared_labels", tuple(self.shared_labels))
        validate(self)
        for name in ("states", "measurements", "shared_weights", "encoder", "decoder", "support_weights"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    @property
    def num_states(self) -> int:
        return self.states.shape[0]

    @property
    def num_measurements(self) -> int:
        return self.measurements.shape[0]

    @property
    def num_shared(self) -> int:
        return len(self.shared_labels)

    def model_probabilities(self) -> np.ndarray:
        """Exact ``sum_X rho(X) sum_k P(phi|k,X) rho(k|X,psi)`` as a states x measurements matrix."""
        return np.einsum("x,xik,xkj->ij", self.shared_weights, self.encoder, self.decoder)

    def quantum_probabilities(self) -> np.ndarray:
        return np.abs(self.states.conj() @ self.measurements.T) ** 2

    def replace(self, **changes) -> TabulatedProtocol:
        fields = {
            "dimension": self.dimension,
            "states": np.array(self.states),
            "measurements": np.array(self.measurements),
            "shared_labels": self.shared_labels,
            "shared_weights": np.array(self.shared_weights),
            "message_count": self.message_count,
            "encoder": np.array(self.encoder),
            "decoder": np.array(self.decoder),
            "support_weights": None if self.support_weights is None else np.array(self.support_weights),
        }
        fields.update(changes)
        return TabulatedProtocol(**fields)

    def to_dict(self) -> dict:
        def vecs(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in a]

        out = {
            "dimension": self.dimension,
            "states": vecs(self.states),
            "measurements": vecs(self.measurements),
            "shared": [
                {"label": label, "weight": float(w)}
                for label, w in zip(self.shared_labels, self.shared_weights)
            ],
            "message_count": self.message_count,
            "encoder": self.encoder.tolist(),
            "decoder": self.decoder.tolist(),
        }
        if self.support_weights is not None:
            out["support_weights"] = self.support_weights.tolist()
        return out

    @classmethod
    def from_dict(cls, data) -> TabulatedProtocol:
        return from_dict(data)


def _check_unit_rows(arr: np.ndarray, path: str):
    norms = np.linalg.norm(arr, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
    if bad.size:
        i = int(bad[0])
        raise ProtocolValidationError(f"{path}[{i}]", f"vector norm {norms[i]!r} is not 1")


def _check_probabilities(arr: np.ndarray, path: str):
    bad = np.argwhere((arr < -RANGE_SLACK) | (arr > 1 + RANGE_SLACK) | ~np.isfinite(arr))
    if bad.size:
        idx = "".join(f"[{int(i)}]" for i in bad[0])
        raise ProtocolValidationError(f"{path}{idx}", f"probability {arr[tuple(bad[0])]!r} outside [0, 1]")


def validate(tp: TabulatedProtocol):
    """Check shapes and the probability constraints; raise on the first violation."""
    N = tp.dimension
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ProtocolValidationError("dimension", f"must be an integer >= 2, got {N!r}")
    for name in ("states", "measurements"):
        arr = getattr(tp, name)
        if arr.ndim != 2 or arr.shape[1] != N or arr.shape[0] == 0:
            raise ProtocolValidationError(name, f"expected a non-empty list of {N}-dimensional vectors")
        _check_unit_rows(arr, name)
    X = len(tp.shared_labels)
    if X == 0:
        raise ProtocolValidationError("shared", "at least one shared value is required")
    w = tp.shared_weights
    if w.shape != (X,):
        raise ProtocolValidationError("shared", "one weight per label required")
    neg = np.flatnonzero((w < 0) | ~np.isfinite(w))
    if neg.size:
        raise ProtocolValidationError(f"shared[{int(neg[0])}].weight", "weight must be >= 0")
    if abs(math.fsum(w) - 1.0) > SUM_TOL:
        raise ProtocolValidationError("shared", f"weights sum to {math.fsum(w)!r}, expected 1")
    R = tp.message_count
    if not isinstance(R, (int, np.integer)) or R < 1:
        raise ProtocolValidationError("message_count", f"must be an integer >= 1, got {R!r}")
    M, K = tp.states.shape[0], tp.measurements.shape[0]
    if tp.encoder.shape != (X, M, R):
        raise ProtocolValidationError("encoder", f"expected shape [{X}][{M}][{R}], got {list(tp.encoder.shape)}")
    if tp.decoder.shape != (X, R, K):
        raise ProtocolValidationError("decoder", f"expected shape [{X}][{R}][{K}], got {list(tp.decoder.shape)}")
    _check_probabilities(tp.encoder, "encoder")
    _check_probabilities(tp.decoder, "decoder")
    sums = tp.encoder.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1.0) > SUM_TOL)
    if bad.size:
        x, i = (int(v) for v in bad[0])
        raise ProtocolValidationError(f"encoder[{x}][{i}]", f"message probabilities sum to {sums[x, i]!r}, expected 1")
    sw = tp.support_weights
    if sw is not None:
        if sw.shape != (M,):
            raise ProtocolValidationError("support_weights", f"expected {M} entries, got {sw.size}")
        neg = np.flatnonzero((sw < 0) | ~np.isfinite(sw))
        if neg.size:
            raise ProtocolValidationError(f"support_weights[{int(neg[0])}]", "weight must be >= 0")


def _vectors(raw, path: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ProtocolValidationError(path, "expected a non-empty array of vectors")
    rows = []
    for i, vec in enumerate(raw):
        if not isinstance(vec, list):
            raise ProtocolValidationError(f"{path}[{i}]", "expected an array of [re, im] pairs")
        row = []
        for j, pair in enumerate(vec):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
            ):
                raise ProtocolValidationError(f"{path}[{i}][{j}]", "expected [re, im] numbers")
            row.append(complex(pair[0], pair[1]))
        rows.append(row)
    if len({len(r) for r in rows}) != 1:
        raise ProtocolValidationError(path, "vectors have differing lengths")
    return np.array(rows, dtype=np.complex128)


def _numeric_array(raw, path: str, ndim: int) -> np.ndarray:
    def walk(node, where, depth):
        if depth == ndim:
            if not isinstance(node, (int, float)) or isinstance(node, bool):
                raise ProtocolValidationError(where, "expected a number")
            return
        if not isinstance(node, list):
            raise ProtocolValidationError(where, f"expected an array (depth {depth + 1} of {ndim})")
        for i, child in enumerate(node):
            walk(child, f"{where}[{i}]", depth + 1)

    walk(raw, path, 0)
    try:
        arr = np.array(raw, dtype=float)
    except ValueError:
        raise ProtocolValidationError(path, "ragged array") from None
    if arr.ndim != ndim:
        raise ProtocolValidationError(path, "ragged array")
    return arr


def from_dict(data) -> TabulatedProtocol:
    if not isinstance(data, dict):
        raise ProtocolValidationError("$", "top level must be an object")
    required = ("dimension", "states", "measurements", "shared", "message_count", "encoder", "decoder")
    for key in required:
        if key not in data:
            raise ProtocolValidationError(key, "missing required field")
    extra = set(data) - set(required) - {"support_weights"}
    if extra:
        raise ProtocolValidationError(sorted(extra)[0], "unknown field")
    dim = data["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ProtocolValidationError("dimension", "must be an integer")
    shared = data["shared"]
    if not isinstance(shared, list):
        raise ProtocolValidationError("shared", "expected an array")
    labels, weights = [], []
    for i, entry in enumerate(shared):
        if not isinstance(entry, dict) or set(entry) != {"label", "weight"}:
            raise ProtocolValidationError(f"shared[{i}]", "expected {label, weight}")
        if not isinstance(entry["label"], str):
            raise ProtocolValidationError(f"shared[{i}].label", "must be a string")
        wt = entry["weight"]
        if not isinstance(wt, (int, float)) or isinstance(wt, bool):
            raise ProtocolValidationError(f"shared[{i}].weight", "must be a number")
        labels.append(entry["label"])
        weights.append(float(wt))
    R = data["message_count"]
    if not isinstance(R, int) or isinstance(R, bool):
        raise ProtocolValidationError("message_count", "must be an integer")
    sw = data.get("support_weights")
    return TabulatedProtocol(
        dimension=dim,
        states=_vectors(data["states"], "states"),
        measurements=_vectors(data["measurements"], "measurements"),
        shared_labels=tuple(labels),
        shared_weights=np.array(weights, dtype=float),
        message_count=R,
        encoder=_numeric_array(data["encoder"], "encoder", 3),
        decoder=_numeric_array(data["decoder"], "decoder", 3),
        support_weights=None if sw is None else _numeric_array(sw, "support_weights", 1),
    )


def loads(text: str) -> TabulatedProtocol:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolValidationError("$", f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path) -> TabulatedProtocol:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(tp: TabulatedProtocol, path):
    Path(path).write_text(json.dumps(tp.to_dict(), indent=1) + "\n", encoding="utf-8")
