"""Kloosterman-refined delta symbol.

    delta(n) = 2 Re sum_{1 <= q <= Q} sum*_{Q < a <= q + Q} (1/(a q)) e(n abar / q) int_0^1 e(-n x / (a q)) dx

with abar the inverse of a mod q and the x-integral in closed form.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from ..arith import e_residues, inv
from .testfunctions import inner_x_integral


@lru_cache(maxsize=64)
def farey_pairs(Q: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays (q, a, abar mod q) over 1 <= q <= Q < a <= q + Q with gcd(a, q) = 1."""
    if Q < 1:
        raise ValueError("delta symbol needs Q >= 1")
    qs, as_, bars = [], [], []
    for q in range(1, math.floor(Q) + 1):
        for a in range(math.floor(Q) + 1, math.floor(q + Q) + 1):
            if a <= Q or math.gcd(a, q) != 1:
                continue
            qs.append(q)
            as_.append(a)
            bars.append(inv(a % q, q))
    out = tuple(np.array(v, dtype=np.int64) for v in (qs, as_, bars))
    for arr in out:
        arr.setflags(write=False)
    return out


def delta_weights(n, Q: float, keep: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Complex weights w(n) = sum_{(q,a)} (1/aq) e(n abar/q) X(-n/(aq)) for an integer array n.

    ``keep`` optionally masks the (q, a) pairs, given the q array.
    """
    q, a, abar = farey_pairs(float(Q))
    if keep is not None:
        m = keep(q)
        q, a, abar = q[m], a[m], abar[m]
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    out = np.zeros(n.shape, dtype=complex)
    for qq in np.unique(q):
        sel = q == qq
        aa, bb = a[sel], abar[sel]
        phase = e_residues(np.outer(n, bb), int(qq))
        x = inner_x_integral(-np.outer(n, 1.0 / (aa * qq)))
        out += (phase * x) @ (1.0 / (aa * qq))
    return out


def delta_eval(n: int, Q: float) -> float:
    if Q < 1:
        raise ValueError("delta_eval needs Q >= 1")
    if abs(n) > 10**4:
        raise ValueError("delta_eval supports |n| <= 10**4")
    return float(2 * delta_weights([n], Q)[0].real)
