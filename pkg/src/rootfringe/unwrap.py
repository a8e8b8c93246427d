"""Reliability-sorted 2-D phase unwrapping (non-continuous path).

Pixels are scored by the inverse of their wrapped second differences
(horizontal, vertical and both diagonals, replicate-padded at the border).
Edges between 4-neighbours are ranked by the summed reliability of their
end points and processed best-first; each edge joins two groups after
shifting the smaller one by the multiple of 2*pi that makes the edge
difference lie in [-pi, pi).
"""

from __future__ import annotations

import numba as nb
import numpy as np

from .errors import EmptyInput, WrappedInput
from .fields import PhaseMap, wrap

TWO_PI = 2.0 * np.pi
MAX_RELIABILITY = 1e12


def reliability(wrapped) -> np.ndarray:
    """Per-pixel reliability 1/D, with D the root-sum-square second difference."""
    p = np.pad(np.asarray(wrapped, dtype=np.float64), 1, mode="edge")
    c = p[1:-1, 1:-1]

    def second(a, b):
        return wrap(a - c) - wrap(c - b)

    hh = second(p[1:-1, :-2], p[1:-1, 2:])
    vv = second(p[:-2, 1:-1], p[2:, 1:-1])
    d1 = second(p[:-2, :-2], p[2:, 2:])
    d2 = second(p[:-2, 2:], p[2:, :-2])
    d = np.sqrt(hh * hh + vv * vv + d1 * d1 + d2 * d2)
    return 1.0 / np.maximum(d, 1.0 / MAX_RELIABILITY)


@nb.njit(cache=True)
def _merge_nb(w, order, n_horiz, width, offsets):
    n = w.shape[0]
    group = np.arange(n)
    nxt = np.full(n, -1)
    tail = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for e in order:
        if e < n_horiz:
            a = (e // (width - 1)) * width + e % (width - 1)
            b = a + 1
        else:
            a = e - n_horiz
            b = a + width
        ga = group[a]
        gb = group[b]
        if ga == gb:
            continue
        va = w[a] + TWO_PI * offsets[a]
        vb = w[b] + TWO_PI * offsets[b]
        k = np.floor((va - vb) / TWO_PI + 0.5)
        # move the smaller group; its offsets shift by +-k
        if size[gb] <= size[ga]:
            src, dst, shift = gb, ga, k
        else:
            src, dst, shift = ga, gb, -k
        i = src
        while i != -1:
            offsets[i] += shift
            group[i] = dst
            i = nxt[i]
        nxt[tail[dst]] = src
        tail[dst] = tail[src]
        size[dst] += size[src]


def unwrap(wrapped) -> PhaseMap:
    """Unwrap a wrapped phase map; returns wrapped + 2*pi*k with integer k per pixel.

    The result is shifted by a global multiple of 2*pi so the most reliable
    pixel keeps its wrapped value.
    """
    if isinstance(wrapped, PhaseMap):
        if wrapped.kind != "wrapped":
            raise WrappedInput("unwrap expects a wrapped phase map")
        w = wrapped.values
    else:
        w = wrap(wrapped)
    if w.size == 0:
        raise EmptyInput("empty phase map")
    h, width = w.shape
    rel = reliability(w)
    flat = rel.ravel()
    horiz = (rel[:, :-1] + rel[:, 1:]).ravel()
    vert = (rel[:-1, :] + rel[1:, :]).ravel()
    edges = np.concatenate([horiz, vert])
    # descending reliability, ties by ascending edge index
    order = np.argsort(-edges, kind="stable")
    offsets = np.zeros(h * width)
    _merge_nb(w.ravel().copy(), order, horiz.size, width, offsets)
    best = int(np.argmax(flat))
    offsets -= offsets[best]
    return PhaseMap((w.ravel() + TWO_PI * offsets).reshape(h, width), kind="unwrapped")
