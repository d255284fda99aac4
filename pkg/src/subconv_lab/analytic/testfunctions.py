"""Concrete smooth cutoffs.

All bumps are built from the mollifier

    psi(t) = exp(1 - 1/(1 - t^2))   for |t| < 1,   0 otherwise,

normalized so psi(0) = 1.  The pinned functions are

    V(x)     = psi((x - 3/2) / (1/2))          support [1, 2]
    Vstar(x) = psi(x)                          support [-1, 1], even, Vstar(0) = 1
    U(y)     = sigma(2y - 1)  on [1/2, 1],  1 on [1, 2],  sigma(5 - 2y) on [2, 5/2]
    bump(c, h)(x) = psi((x - c) / h)           support [c - h, c + h]

with the smooth step sigma(t) = E(t) / (E(t) + E(1 - t)), E(t) = exp(-1/t) for
t > 0 and 0 otherwise.  Derivatives (order <= 4) come from symbolic
differentiation of these exact expressions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

MAX_DERIVATIVE = 4


@dataclass(frozen=True)
class TestFunctionSpec:
    kind: str
    center: float = 0.0
    halfwidth: float = 1.0

    __test__ = False  # keep pytest from collecting the class

    def __post_init__(self):
        if self.kind not in ("V", "Vstar", "U", "bump"):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.kind == "bump" and self.halfwidth <= 0:
            raise ValueError("bump halfwidth must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return {
            "V": (1.0, 2.0),
            "Vstar": (-1.0, 1.0),
            "U": (0.5, 2.5),
            "bump": (self.center - self.halfwidth, self.center + self.halfwidth),
        }[self.kind]

    def __call__(self, x, order: int = 0):
        return eval_test_function(self, x, order)


V = TestFunctionSpec("V")
VSTAR = TestFunctionSpec("Vstar")
U = TestFunctionSpec("U")


def bump(center: float, halfwidth: float) -> TestFunctionSpec:
    return TestFunctionSpec("bump", float(center), float(halfwidth))


_x = sp.Symbol("x", real=True)


def _psi_expr(t):
    return sp.exp(1 - 1 / (1 - t**2))


def _step_expr(t):
    E0, E1 = sp.exp(-1 / t), sp.exp(-1 / (1 - t))
    return E0 / (E0 + E1)


@lru_cache(maxsize=None)
def _pieces(kind: str, center: float, halfwidth: float, order: int):
    """List of (lo, hi, numpy callable) for the open intervals where f is non-constant or 1."""
    if kind == "V":
        spec = [(1.0, 2.0, _psi_expr((_x - sp.Rational(3, 2)) * 2))]
    elif kind == "Vstar":
        spec = [(-1.0, 1.0, _psi_expr(_x))]
    elif kind == "bump":
        spec = [(center - halfwidth, center + halfwidth, _psi_expr((_x - sp.Float(center, 30)) / sp.Float(halfwidth, 30)))]
    else:
        spec = [
            (0.5, 1.0, _step_expr(2 * _x - 1)),
            (1.0, 2.0, sp.Integer(1)),
            (2.0, 2.5, _step_expr(5 - 2 * _x)),
        ]
    out = []
    for lo, hi, expr in spec:
        d = sp.diff(expr, _x, order) if order else expr
        out.append((lo, hi, sp.lambdify(_x, d, "numpy")))
    return tuple(out)


def eval_test_function(f: TestFunctionSpec, x, derivative_order: int = 0):
    """Value or derivative of ``f`` at ``x`` (scalar or array); zero off the support."""
    if not 0 <= derivative_order <= MAX_DERIVATIVE:
        raise ValueError(f"derivative order must be in 0..{MAX_DERIVATIVE}")
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape)
    for lo, hi, fn in _pieces(f.kind, f.center, f.halfwidth, derivative_order):
        mask = (xa > lo) & (xa < hi)
        if np.any(mask):
            with np.errstate(all="ignore"):
                vals = np.broadcast_to(np.asarray(fn(xa[mask]), dtype=float), (int(mask.sum()),))
            out[mask] = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    if f.kind == "U" and derivative_order == 0:
        out[(xa == 1.0) | (xa == 2.0)] = 1.0
    return float(out) if np.ndim(x) == 0 else out


def inner_x_integral(z):
    """int_0^1 e(z x) dx = e(z/2) sinc(z), equal to 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    return np.exp(1j * np.pi * z) * np.sinc(z)


def kernel_W(u, v, y):
    """W(u, v, y) = int_0^1 e((v - u) x y) dx * V(u) * Vstar(u - v), in closed form."""
    u, v, y = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float), np.asarray(y, float))
    out = eval_test_function(V, u) * eval_test_function(VSTAR, u - v) * inner_x_integral((v - u) * y)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Modulated:
    """x -> base(x / scale) * e(freq * x / scale): a rescaled, frequency-shifted test function."""

    base: TestFunctionSpec
    scale: float = 1.0
    freq: float = 0.0

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support
        return lo * self.scale, hi * self.scale

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = x / self.scale
        return eval_test_function(self.base, r) * np.exp(2j * np.pi * self.freq * r)


def sample(f, x):
    """Values of a test function spec or a :class:`Modulated` wrapper."""
    if isinstance(f, TestFunctionSpec):
        return eval_test_function(f, x)
    return f(x)
