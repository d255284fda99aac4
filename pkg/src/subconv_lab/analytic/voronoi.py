"""GL(3) Voronoi summation checked numerically for the d_3 coefficient model.

For (c, r) = 1 the identity verified is

    sum_n lambda(1,n) e(c n / r) g(n)
        = P(c, r; g) + r sum_pm sum_{n1 | r} sum_{n2 >= 1} lambda(n2, n1)/(n1 n2)
              S(cbar, pm n2; r/n1) G_pm(n1^2 n2 / r^3),

where P is the polar contribution of the Eisenstein (d_3) series:
P = (1/2 pi i) oint D(w) g~(w) dw around w = 1, with
D(w) = sum_n d_3(n) e(c n / r) n^{-w}
     = r^{-3w} sum_{x1,x2,x3 mod r} e(c x1 x2 x3 / r) prod_i zeta(w, x_i / r).
For a cusp form the polar term is absent; the d_3 model has a triple pole at w = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ..arith import divisors, e_residues, inv, mobius
from ..classical_sums import kloosterman_table
from ..coefficients import HeckeCoefficientModel, d3_table
from .contour import ContourSpec, line_samples
from .gamma import GammaFactorEngine
from .mellin import mellin_u_trapezoid
from .testfunctions import sample


def twisted_d3_series(c: int, r: int, w: complex) -> complex:
    """D(w) = sum d_3(n) e(cn/r) n^{-w}, continued through Hurwitz zeta (w != 1)."""
    wm = mpmath.mpc(complex(w).real, complex(w).imag)
    Z = np.array([complex(mpmath.zeta(wm, mpmath.mpf(x) / r)) for x in range(1, r + 1)])
    x = np.arange(1, r + 1, dtype=np.int64)
    # B[t] = sum_x3 e(c t x3 / r) Z[x3], then sum_{x1,x2} Z1 Z2 B[x1 x2]
    B = e_residues(np.outer(x, c * x), r) @ Z if r > 1 else Z.sum() * np.ones(1)
    prod = np.outer(x, x) % r
    inner = B[(prod - 1) % r] if r > 1 else B[np.zeros_like(prod)]
    total = np.sum(np.outer(Z, Z) * inner)
    return complex(total * complex(mpmath.power(r, -3 * wm)))


def polar_term_d3(c: int, r: int, g, radius: float = 0.5, points: int = 48) -> complex:
    """(1/2 pi i) oint_{|w-1|=radius} D(w) g~(w) dw by the (spectrally accurate) trapezoid rule."""
    mpmath.mp.dps = 20
    theta = 2 * np.pi * np.arange(points) / points
    w = 1 + radius * np.exp(1j * theta)
    gt = mellin_u_trapezoid(g, w, n_points=8192)
    D = np.array([twisted_d3_series(c, r, wk) for wk in w])
    return complex(np.mean(D * gt * radius * np.exp(1j * theta)))


def voronoi_lhs(model: HeckeCoefficientModel, c: int, r: int, g) -> complex:
    lo, hi = g.support
    n = np.arange(math.floor(lo) + 1, math.ceil(hi))
    lam = _lambda_right(model, n)
    return complex(np.sum(lam * e_residues(c * n, r) * sample(g, n.astype(float))))


def _lambda_right(model: HeckeCoefficientModel, n: np.ndarray) -> np.ndarray:
    if model.mode != "trivial":
        from ..coefficients import lambda_

        return np.array([lambda_(model, 1, int(k)) for k in n])
    return d3_table(int(n.max()))[n].astype(float)


def dual_coefficients_d3(n1: int, n2max: int) -> np.ndarray:
    """lambda(n2, n1) for n2 = 0..n2max in the d_3 model (index 0 unused).

    Hecke relation: lambda(n2, n1) = sum_{d | (n1, n2)} mu(d) d3(n2/d) d3(n1/d).
    """
    d3 = d3_table(max(n2max, n1))
    out = np.zeros(n2max + 1)
    for d in divisors(n1):
        mu = mobius(d)
        if mu == 0:
            continue
        k = np.arange(1, n2max // d + 1)
        out[d * k] += mu * d3[k] * d3[n1 // d]
    return out


@dataclass
class VoronoiResult:
    c: int
    modulus: int
    lhs: complex
    polar: complex
    levels: list[float]
    rhs: list[complex]
    scale: float
    residuals: list[float] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residuals[-1]

    def monotone(self, slack: float = 0.1) -> bool:
        r = self.residuals
        return all(r[i + 1] <= (1 + slack) * r[i] for i in range(len(r) - 1))

    def trace(self) -> list[dict]:
        return [
            {"y_max": y, "rhs_re": v.real, "rhs_im": v.imag, "residual": res}
            for y, v, res in zip(self.levels, self.rhs, self.residuals)
        ]


def voronoi_dual_levels(
    c: int,
    r: int,
    g,
    y_levels,
    engine: GammaFactorEngine | None = None,
    contour: ContourSpec | None = None,
) -> list[complex]:
    """Partial sums of the dual side over terms with n1^2 n2 / r^3 <= Y, for each Y in y_levels."""
    engine = engine or GammaFactorEngine()
    contour = contour or ContourSpec(height=1600.0, step=0.05)
    y_levels = sorted(float(y) for y in y_levels)
    interp = {s: line_samples(engine, s, g, contour).interpolator() for s in (1, -1)}
    cbar = inv(c % r, r)
    out = np.zeros(len(y_levels), dtype=complex)
    for n1 in divisors(r):
        rr = r // n1
        n2max = int(math.floor(y_levels[-1] * r**3 / n1**2))
        if n2max < 1:
            continue
        lam = dual_coefficients_d3(n1, n2max)[1:]
        n2 = np.arange(1, n2max + 1, dtype=np.int64)
        y = n1**2 * n2 / r**3
        table = kloosterman_table(rr)
        kp = table[cbar % rr, n2 % rr]
        km = table[cbar % rr, (-n2) % rr]
        terms = lam / (n1 * n2) * (kp * interp[1](y) + km * interp[-1](y))
        csum = np.concatenate([[0], np.cumsum(terms)])
        idx = np.searchsorted(y, y_levels, side="right")
        out += csum[idx]
    return list(r * out)


def voronoi_check(
    model: HeckeCoefficientModel,
    a: int,
    q: int,
    g,
    y_levels=(100.0, 400.0, 1600.0, 6400.0),
    engine: GammaFactorEngine | None = None,
    contour: ContourSpec | None = None,
) -> VoronoiResult:
    """Compare both sides; residuals are |LHS - P - RHS(Y)| / |LHS|.

    ``scale`` (sum of |lambda(1,n) g(n)|) replaces |LHS| only if the left side
    cancels below 1e-12 of it.
    """
    if model.mode != "trivial":
        raise ValueError("the numerical Voronoi check is implemented for the d_3 (trivial) model")
    if math.gcd(a, q) != 1:
        raise ValueError("Voronoi needs gcd(a, q) = 1")
    lhs = voronoi_lhs(model, a, q, g)
    lo, hi = g.support
    n = np.arange(math.floor(lo) + 1, math.ceil(hi))
    scale = float(np.sum(np.abs(_lambda_right(model, n) * sample(g, n.astype(float)))))
    polar = polar_term_d3(a, q, g)
    levels = sorted(float(y) for y in y_levels)
    rhs = voronoi_dual_levels(a, q, g, levels, engine, contour)
    res = VoronoiResult(a, q, lhs, polar, levels, rhs, scale)
    denom = abs(lhs) if abs(lhs) > 1e-12 * scale else scale
    res.residuals = [abs(lhs - polar - v) / denom for v in rhs]
    return res
