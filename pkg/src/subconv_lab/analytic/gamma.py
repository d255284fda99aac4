"""GL(3) gamma factors gamma_ell(s) and gamma_pm(s) = gamma_0(s) -/+ i gamma_1(s).

    gamma_ell(s) = pi^{-3(s + 1/2)} / 2 * prod_i Gamma((1 + s + alpha_i + ell)/2) / Gamma((-s - alpha_i + ell)/2)

Everything is evaluated through log-Gamma; the individual Gamma values under-
and overflow long before the ratio does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from ..coefficients import SatakeTriple
from ..errors import PoleProximity

POLE_DISTANCE = 1e-6
_LOG_PI = np.log(np.pi)


@dataclass(frozen=True)
class GammaFactorEngine:
    satake: SatakeTriple = field(default_factory=SatakeTriple)

    @property
    def alphas(self) -> tuple[complex, complex, complex]:
        return tuple(complex(a) for a in self.satake.as_tuple())

    def min_sigma(self) -> float:
        """Left edge of the admissible strip: sigma > -1 + max(-Re alpha_i)."""
        return -1 + max(-a.real for a in self.alphas)

    def _check_poles(self, s: np.ndarray, ell: int) -> None:
        for a in self.alphas:
            z = (1 + s + a + ell) / 2
            k = np.minimum(np.round(z.real), 0)
            if np.any(np.abs(z - k) < POLE_DISTANCE):
                bad = s.flat[int(np.argmin(np.abs(z - k)))]
                raise PoleProximity(f"s={bad} is within {POLE_DISTANCE} of a pole of gamma_{ell}")

    def log_gamma_factor(self, ell: int, s) -> np.ndarray:
        if ell not in (0, 1):
            raise ValueError("ell must be 0 or 1")
        s = np.asarray(s, dtype=complex)
        self._check_poles(s, ell)
        out = -3 * (s + 0.5) * _LOG_PI - np.log(2)
        for a in self.alphas:
            out = out + loggamma((1 + s + a + ell) / 2) - loggamma((-s - a + ell) / 2)
        return out

    def gamma(self, ell: int, s):
        out = np.exp(self.log_gamma_factor(ell, s))
        return complex(out) if np.ndim(s) == 0 else out

    def gamma_pm(self, sign: int, s):
        """gamma_+ = gamma_0 - i gamma_1 (sign=+1), gamma_- = gamma_0 + i gamma_1 (sign=-1)."""
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        s_arr = np.asarray(s, dtype=complex)
        out = np.exp(self.log_gamma_factor(0, s_arr)) - sign * 1j * np.exp(self.log_gamma_factor(1, s_arr))
        return complex(out) if np.ndim(s) == 0 else out


def gamma_factor(engine: GammaFactorEngine, ell: int, s):
    return engine.gamma(ell, s)


def stirling_magnitude(engine: GammaFactorEngine, s: complex) -> float:
    """Leading Stirling size |t / 2pi|^{3(sigma + 1/2) + sum Re alpha_i} / 2 of gamma_ell on Re s = sigma."""
    sigma, t = complex(s).real, complex(s).imag
    shift = sum(a.real for a in engine.alphas)
    return 0.5 * (abs(t) / (2 * np.pi)) ** (3 * (sigma + 0.5) + shift)
