"""Compiled inner loop of the independent-set annealer."""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _drop(v, indptr, indices, in_set, conflicts):
    in_set[v] = 0
    for p in range(indptr[v], indptr[v + 1]):
        conflicts[indices[p]] -= 1


@numba.njit(cache=True)
def _add(v, indptr, indices, in_set, conflicts):
    in_set[v] = 1
    for p in range(indptr[v], indptr[v + 1]):
        conflicts[indices[p]] += 1


@numba.njit(cache=True)
def anneal_chunk(
    indptr,
    indices,
    weights,
    in_set,
    conflicts,
    best_set,
    verts,
    uniforms,
    step0,
    total,
    t_start,
    t_end,
    current,
    best,
):
    """Run ``len(verts)`` moves in place; returns ``(current, best)``.

    ``weights`` are pre-scaled so temperatures are in units of the mean
    vertex weight. Move on vertex ``v``: drop it if present, add it if it
    has no neighbor in the set, otherwise swap it in for its neighbors.
    """
    log_ratio = math.log(t_end / t_start)
    n = verts.shape[0]
    for s in range(n):
        frac = (step0 + s) / max(total - 1, 1)
        temp = t_start * math.exp(log_ratio * frac)
        v = verts[s]
        if in_set[v]:
            delta = -weights[v]
            if uniforms[s] < math.exp(delta / temp):
                _drop(v, indptr, indices, in_set, conflicts)
                current += delta
        elif conflicts[v] == 0:
            _add(v, indptr, indices, in_set, conflicts)
            current += weights[v]
        else:
            delta = weights[v]
            for p in range(indptr[v], indptr[v + 1]):
                u = indices[p]
                if in_set[u]:
                    delta -= weights[u]
            if delta >= 0.0 or uniforms[s] < math.exp(delta / temp):
                for p in range(indptr[v], indptr[v + 1]):
                    u = indices[p]
                    if in_set[u]:
                        _drop(u, indptr, indices, in_set, conflicts)
                _add(v, indptr, indices, in_set, conflicts)
                current += delta
        if current > best + 1e-12:
            best = current
            best_set[:] = in_set
    return current, best


def conflict_counts(indptr: np.ndarray, indices: np.ndarray, in_set: np.ndarray) -> np.ndarray:
    counts = np.zeros(in_set.shape[0], dtype=np.int64)
    for v in np.flatnonzero(in_set):
        counts[indices[indptr[v] : indptr[v + 1]]] += 1
    return counts
