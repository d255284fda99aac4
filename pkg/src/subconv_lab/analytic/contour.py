"""Vertical-line transforms G_pm(y) = (1/2 pi i) int_{(sigma)} y^{-s} gamma_pm(s) g~(-s) ds.

With s = sigma + i t this is (1/2 pi) int y^{-sigma - i t} gamma_pm(s) g~(-s) dt,
discretized by the trapezoid rule on t = k * step, |t| <= height.  A single
point is refined adaptively (height doubled, step halved) until both
refinements move the value by less than tol/10.  Many points share one set of
line samples: the t-sum is a DFT in v = log y, evaluated on a fine v-grid by FFT
and interpolated locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NotConverged
from .gamma import GammaFactorEngine
from .mellin import mellin_line_fft

DEFAULT_SIGMA = -0.5
DEFAULT_HEIGHT = 800.0
DEFAULT_STEP = 0.05
DEFAULT_MAX_HEIGHT = 12800.0


@dataclass(frozen=True)
class ContourSpec:
    sigma: float = DEFAULT_SIGMA
    height: float = DEFAULT_HEIGHT
    step: float = DEFAULT_STEP

    def __post_init__(self):
        if self.height <= 0 or self.step <= 0:
            raise ValueError("contour height and step must be positive")
        if self.step > self.height / 100:
            raise ValueError("contour step must be at most height/100")

    def check_admissible(self, engine: GammaFactorEngine) -> None:
        if not self.sigma > engine.min_sigma():
            raise ValueError(f"sigma={self.sigma} must exceed {engine.min_sigma()}")

    def refined(self, height_factor: float = 1.0, step_factor: float = 1.0) -> "ContourSpec":
        return ContourSpec(self.sigma, self.height * height_factor, self.step * step_factor)


@dataclass
class LineSamples:
    """Samples phi_k = gamma_pm(s_k) g~(-s_k) at s_k = sigma + i k step, |k| <= K."""

    sigma: float
    step: float
    phi: np.ndarray

    @property
    def kmax(self) -> int:
        return (self.phi.size - 1) // 2

    @property
    def t(self) -> np.ndarray:
        return np.arange(-self.kmax, self.kmax + 1) * self.step

    def evaluate(self, y) -> np.ndarray:
        """Direct trapezoid sum at each y (O(len(y) * K))."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        s = self.sigma + 1j * self.t
        out = np.empty(y.shape, dtype=complex)
        for chunk in np.array_split(np.arange(y.size), max(1, y.size // 64)):
            E = np.exp(-np.outer(np.log(y[chunk]), s))
            out[chunk] = E @ self.phi * self.step / (2 * np.pi)
        return out

    def l1(self, y: float) -> float:
        return float(np.sum(np.abs(self.phi)) * y ** (-self.sigma) * self.step / (2 * np.pi))

    def tail(self, y: float) -> float:
        """Size of the integrand at the truncation height, in units of the result."""
        return float(max(abs(self.phi[0]), abs(self.phi[-1])) * y ** (-self.sigma))

    def interpolator(self, oversample: int = 8, order: int = 14) -> "LogGridInterpolator":
        return LogGridInterpolator(self, oversample, order)


def line_samples(engine: GammaFactorEngine, sign: int, g, contour: ContourSpec) -> LineSamples:
    contour.check_admissible(engine)
    kmax = int(round(contour.height / contour.step))
    k = np.arange(-kmax, kmax + 1)
    s = contour.sigma + 1j * k * contour.step
    # mellin_line_fft returns g~(-sigma + i k step); we need g~(-sigma - i k step)
    gt = mellin_line_fft(g, -contour.sigma, contour.step, kmax)[::-1]
    return LineSamples(contour.sigma, contour.step, engine.gamma_pm(sign, s) * gt)


class LogGridInterpolator:
    """G(y) for many y: FFT onto an equispaced v = log y grid, then Lagrange interpolation.

    F(v) = sum_k phi_k e^{-i k step v} is band-limited to |t| <= K step, so with
    the grid oversampled ``oversample`` times a local polynomial of degree
    ``order`` reproduces it to near machine precision.
    """

    def __init__(self, samples: LineSamples, oversample: int = 8, order: int = 14):
        K = samples.kmax
        P = 1 << math.ceil(math.log2(oversample * (2 * K + 1)))
        a = np.zeros(P, dtype=complex)
        a[np.arange(-K, K + 1) % P] = samples.phi
        self.values = np.fft.fft(a)  # F(v_j), v_j = j * dv
        self.dv = 2 * np.pi / (P * samples.step)
        self.P = P
        self.order = order
        self.samples = samples
        offs = np.arange(order + 1) - order // 2
        self._offsets = offs
        # barycentric weights for equispaced nodes
        w = np.array([(-1.0) ** j * math.comb(order, j) for j in range(order + 1)])
        self._bary = w

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(y.shape, dtype=complex)
        for chunk in np.array_split(np.arange(y.size), max(1, y.size // 200000)):
            v = np.log(y[chunk])
            x = v / self.dv
            base = np.floor(x).astype(np.int64)
            frac = x - base  # in [0, 1)
            d = frac[:, None] - self._offsets[None, :]
            idx = (base[:, None] + self._offsets[None, :]) % self.P
            exact = np.isclose(d, 0.0, atol=1e-14)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = self._bary[None, :] / d
                f = (r * self.values[idx]).sum(1) / r.sum(1)
            rows, cols = np.nonzero(exact)
            f[rows] = self.values[idx[rows, cols]]
            out[chunk] = f * np.exp(-self.samples.sigma * v) * self.samples.step / (2 * np.pi)
        return out


@dataclass(frozen=True)
class GTransformResult:
    value: complex
    height: float
    step: float
    change: float
    tail: float


def G_transform_detailed(
    engine: GammaFactorEngine,
    sign: int,
    g,
    y: float,
    contour: ContourSpec | None = None,
    tol: float = 1e-6,
    max_height: float = DEFAULT_MAX_HEIGHT,
) -> GTransformResult:
    contour = contour or ContourSpec()
    if y <= 0:
        raise ValueError("G transform needs y > 0")

    def value(c: ContourSpec) -> tuple[complex, LineSamples]:
        ls = line_samples(engine, sign, g, c)
        return complex(ls.evaluate([y])[0]), ls

    cur = contour
    base, ls = value(cur)
    while True:
        taller, _ = value(cur.refined(height_factor=2))
        finer, _ = value(cur.refined(step_factor=0.5))
        change = max(abs(taller - base), abs(finer - base))
        # for values far below the integrand mass, measure change against that mass
        scale = max(abs(base), 1e-7 * ls.l1(y))
        if change <= tol / 10 * scale:
            return GTransformResult(base, cur.height, cur.step, change, ls.tail(y))
        if cur.height * 2 > max_height:
            raise NotConverged(
                f"G transform at y={y} not stable: change {change:.3g} at height {cur.height}"
            )
        cur = cur.refined(height_factor=2, step_factor=0.5 if abs(finer - base) > tol / 10 * scale else 1.0)
        base, ls = value(cur)


def G_transform(engine, sign, g, y, contour=None, tol=1e-6, max_height=DEFAULT_MAX_HEIGHT) -> complex:
    return G_transform_detailed(engine, sign, g, y, contour, tol, max_height).value
