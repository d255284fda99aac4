"""Mellin transforms of compactly supported test functions.

Two independent rules are provided for point evaluations: adaptive
Gauss-Kronrod (``scipy.integrate.quad``) and composite Gauss-Legendre.  Along a
vertical line the transform is a Fourier transform in ``u = log x``,

    g~(sigma + i t) = int g(e^u) e^{sigma u} e^{i t u} du,

which the trapezoid rule integrates spectrally for smooth compactly supported
g; on an equispaced t-grid that rule is a single FFT.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ..errors import QuadratureFailure
from .testfunctions import TestFunctionSpec, sample

DEFAULT_TOL = 1e-10


def _check_positive_support(f: TestFunctionSpec) -> tuple[float, float]:
    lo, hi = f.support
    if lo <= 0:
        raise ValueError(f"Mellin transform needs support in (0, inf), got {f.support}")
    return lo, hi


def _quad_complex(fn, lo, hi, epsabs, epsrel):
    opts = dict(epsabs=epsabs, epsrel=epsrel, limit=400)
    with warnings.catch_warnings():
        # the error estimate is checked by the caller
        warnings.simplefilter("ignore", IntegrationWarning)
        re, er = quad(lambda x: fn(x).real, lo, hi, **opts)
        im, ei = quad(lambda x: fn(x).imag, lo, hi, **opts)
    return complex(re, im), math.hypot(er, ei)


def mellin(f: TestFunctionSpec, s: complex, tol: float = DEFAULT_TOL) -> complex:
    """int_0^inf f(x) x^{s-1} dx by adaptive quadrature.

    The error target is relative to max(|value|, int |f(x)| x^{sigma-1} dx);
    for large |Im s| the transform is far smaller than that absolute scale, and
    no rule can resolve it to 1e-10 of itself.  Raises QuadratureFailure when
    the estimate exceeds the target.
    """
    lo, hi = _check_positive_support(f)
    s = complex(s)
    u0, u1 = math.log(lo), math.log(hi)
    scale = quad(lambda u: abs(sample(f, math.exp(u))) * math.exp(s.real * u), u0, u1, limit=200)[0]
    # integrate in u = log x: smoother and no endpoint weight
    val, err = _quad_complex(
        lambda u: sample(f, math.exp(u)) * np.exp(s * u), u0, u1, tol * scale * 1e-2, tol
    )
    if err > tol * max(abs(val), scale):
        raise QuadratureFailure(f"Mellin quadrature error {err:.3g} exceeds {tol:.1g} at s={s}")
    return val


def mellin_gauss_legendre(f: TestFunctionSpec, s: complex, panels: int = 64, order: int = 32) -> complex:
    """Second, independent rule: composite Gauss-Legendre in x."""
    lo, hi = _check_positive_support(f)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * weights).ravel()
    return complex(np.sum(w * sample(f, x) * x ** (complex(s) - 1)))


def mellin_u_trapezoid(f: TestFunctionSpec, s, n_points: int = 4096) -> np.ndarray:
    """Mellin transform at arbitrary complex ``s`` (array) by the trapezoid rule in u = log x."""
    lo, hi = _check_positive_support(f)
    u = np.linspace(math.log(lo), math.log(hi), n_points + 1)
    du = u[1] - u[0]
    h = sample(f, np.exp(u))
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty(s.shape, dtype=complex)
    for chunk in np.array_split(np.arange(s.size), max(1, s.size // 256)):
        out.flat[chunk] = np.exp(np.outer(s.flat[chunk], u)) @ h * du
    return out


def mellin_line_fft(f: TestFunctionSpec, sigma: float, step: float, kmax: int, n_fft: int | None = None) -> np.ndarray:
    """g~(sigma + i k step) for k = -kmax..kmax via one FFT.

    The u-grid has spacing du = 2 pi / (n_fft * step) so the trapezoid sum is
    exactly a DFT; n_fft is chosen so the Nyquist frequency exceeds 2 * kmax * step.
    """
    lo, hi = _check_positive_support(f)
    u0, u1 = math.log(lo), math.log(hi)
    period = 2 * math.pi / step
    if period <= (u1 - u0):
        raise ValueError("contour step too coarse for the support of f")
    if n_fft is None:
        # room for |t| <= 2 kmax step without aliasing, and >= 500 points across the support
        need = max(4 * (2 * kmax + 1), 500 * period / (u1 - u0))
        n_fft = 1 << math.ceil(math.log2(need))
    du = period / n_fft
    j = np.arange(n_fft)
    u = u0 + j * du
    h = np.where(u <= u1, sample(f, np.exp(np.minimum(u, u1))), 0.0) * np.exp(sigma * u)
    # sum_j h_j e^{i t_k u_j} du with t_k = k step:  e^{i t_k u0} * n_fft * ifft(h)[k]
    spec = np.fft.ifft(h) * n_fft * du
    k = np.arange(-kmax, kmax + 1)
    return spec[k % n_fft] * np.exp(1j * k * step * u0)
