"""The integral transforms attached to T(a, b; q).

Notation: y = N / (M1 a q) and xi_m = m N / (M q) with M = M1 M2.  After the
substitution w = v - u the double integral separates,

    What(s, m) = J(m) * int V(u) u^{-s-1} e(-xi_m u) du,
    J(m)       = int Vstar(w) X(w y) e(-xi_m w) dw,    X(z) = int_0^1 e(z x) dx,

so with h_m(u) = V(u) e(-xi_m u) the contour integral is a G-transform:

    I_pm(n, m; q) = J(m) * G_pm[h_m](n N / (q^3 M1^3)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import dblquad

from ..errors import QuadratureFailure
from .contour import ContourSpec, line_samples
from .gamma import GammaFactorEngine
from .mellin import mellin_gauss_legendre
from .testfunctions import U, V, VSTAR, Modulated, eval_test_function, inner_x_integral


# beyond this many points the FFT interpolator replaces the direct t-sum
DIRECT_MAX_POINTS = 256


@dataclass(frozen=True)
class TwistSetup:
    """The scales entering one (a, q) cell: N, M1, M2, a, q."""

    N: float
    M1: int
    M2: int
    a: int
    q: int

    @property
    def M(self) -> int:
        return self.M1 * self.M2

    @property
    def y(self) -> float:
        return self.N / (self.M1 * self.a * self.q)

    def xi(self, m: float) -> float:
        return m * self.N / (self.M * self.q)

    def h(self, m: float) -> Modulated:
        return Modulated(V, 1.0, -self.xi(m))


def _gl_nodes(lo: float, hi: float, panels: int, order: int = 24):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


def J_factor(setup: TwistSetup, m: float, panels: int | None = None) -> complex:
    """int Vstar(w) X(w y) e(-xi_m w) dw by composite Gauss-Legendre; two resolutions must agree."""
    freq = abs(setup.xi(m)) + abs(setup.y)
    base = panels or max(32, int(4 * freq) + 32)
    vals = []
    for p in (base, 2 * base):
        w, wt = _gl_nodes(-1.0, 1.0, p)
        f = eval_test_function(VSTAR, w) * inner_x_integral(w * setup.y) * np.exp(-2j * np.pi * setup.xi(m) * w)
        vals.append(complex(np.sum(wt * f)))
    if abs(vals[0] - vals[1]) > 1e-12 * max(1.0, abs(vals[1])):
        raise QuadratureFailure(f"J({m}) unstable under refinement: {abs(vals[0] - vals[1]):.3g}")
    return vals[1]


def oscillatory_integral_Ihat(setup: TwistSetup, m: float, s: complex) -> complex:
    """What(s, m, y) through the separated form (fast path)."""
    return J_factor(setup, m) * mellin_gauss_legendre(setup.h(m), -complex(s))


def oscillatory_integral_Ihat_2d(setup: TwistSetup, m: float, s: complex, tol: float = 1e-8) -> complex:
    """What(s, m, y) by 2-D adaptive quadrature of its defining double integral (reference)."""
    s = complex(s)
    y, xi = setup.y, setup.xi(m)

    def integrand(v, u, part):
        z = (eval_test_function(V, u) * eval_test_function(VSTAR, u - v)
             * complex(inner_x_integral((v - u) * y)) * u ** (-s - 1) * np.exp(-2j * np.pi * xi * v))
        return z.real if part == 0 else z.imag

    out = []
    for part in (0, 1):
        val, err = dblquad(integrand, 1.0, 2.0, lambda u: u - 1.0, lambda u: u + 1.0,
                           args=(part,), epsabs=tol * 1e-2, epsrel=tol)
        out.append(val)
    return complex(out[0], out[1])


def default_contour(setup: TwistSetup, m: float) -> ContourSpec:
    # the modulation shifts the bulk of h~ to |t| ~ 2 pi |xi| u <= 4 pi |xi|
    return ContourSpec(height=1600.0 + 4 * math.pi * abs(setup.xi(m)), step=0.05)


def oscillatory_integral_I(
    engine: GammaFactorEngine,
    sign: int,
    n,
    m: float,
    setup: TwistSetup,
    contour: ContourSpec | None = None,
) -> np.ndarray | complex:
    """I_pm(n, m; q) for scalar or array n."""
    contour = contour or default_contour(setup, m)
    ls = line_samples(engine, sign, setup.h(m), contour)
    Y = np.atleast_1d(np.asarray(n, dtype=float)) * setup.N / (setup.q * setup.M1) ** 3
    G = ls.evaluate(Y) if Y.size <= DIRECT_MAX_POINTS else ls.interpolator()(Y)
    out = J_factor(setup, m) * G
    return complex(out[0]) if np.ndim(n) == 0 else out


def I_reference_bound(n: float, setup: TwistSetup, Q: float) -> float:
    """sqrt(n N / (q^2 Q M1^3)), the size the I-transform is compared against."""
    return math.sqrt(n * setup.N / (setup.q**2 * Q * setup.M1**3))


@dataclass
class IstarEvaluator:
    """I*(n2, m, m', q, q') for many n2 from one y-grid of the two I-transforms."""

    values: np.ndarray  # U(y) I_+(Ly, m; q) conj(I_+(Ly, m'; q')) w(y) / y on the grid
    y: np.ndarray
    L: float
    denom: float  # q q' M1
    n2_max: float  # the grid resolves e(-n2 L y / denom) up to this |n2|

    def __call__(self, n2) -> np.ndarray | complex:
        n2a = np.atleast_1d(np.asarray(n2, dtype=float))
        if n2a.size and np.max(np.abs(n2a)) > self.n2_max:
            raise ValueError(f"|n2| = {np.max(np.abs(n2a)):g} exceeds the resolved range {self.n2_max:g}")
        phase = np.exp(-2j * np.pi * np.outer(n2a, self.y) * self.L / self.denom)
        out = phase @ self.values
        return complex(out[0]) if np.ndim(n2) == 0 else out


def istar_evaluator(
    engine: GammaFactorEngine,
    m: float,
    mp: float,
    setup: TwistSetup,
    setup_p: TwistSetup,
    L: float,
    n2_max: float = 64.0,
    panels: int = 64,
) -> IstarEvaluator:
    """Pre-tabulate the integrand of I* on Gauss-Legendre nodes over the support [1/2, 5/2] of U.

    The n2-phase makes 2 n2_max L / (q q' M1) oscillations across the support;
    the panel count keeps at least one panel (24 nodes) per oscillation.
    """
    denom = setup.q * setup_p.q * setup.M1
    panels = max(panels, math.ceil(2 * n2_max * L / denom) + 8)
    y, wt = _gl_nodes(0.5, 2.5, panels)
    Iy = oscillatory_integral_I(engine, 1, L * y, m, setup)
    Iyp = oscillatory_integral_I(engine, 1, L * y, mp, setup_p)
    vals = eval_test_function(U, y) * Iy * np.conj(Iyp) * wt / y
    return IstarEvaluator(vals, y, L, denom, float(n2_max))


def oscillatory_integral_Istar(engine, n2, m, mp, setup, setup_p, L) -> complex:
    top = float(np.max(np.abs(np.atleast_1d(n2)))) if np.size(n2) else 0.0
    return istar_evaluator(engine, m, mp, setup, setup_p, L, n2_max=max(top, 1.0))(n2)
