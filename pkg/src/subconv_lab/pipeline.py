"""The circle-method decomposition of the twisted sum S(N), realized as finite computations.

Notation: chi = chi1 chi2 mod M = M1 M2, Q = sqrt(N / M1) unless overridden,
X(z) = int_0^1 e(z x) dx, and for an integer shift d = n - m

    F(d) = Vstar(d/N) sum_n lambda(1, n) chi(n - d) V(n/N).

Every piece of S(N) whose kernel is W(n/N, m/N, y) depends on (n, m) only
through d once the n-sum is done, so the (q, a) sums below act on the vector
F.  T(a, b; q) is the exception and is summed over (n, m) directly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .analytic.contour import ContourSpec
from .analytic.delta import delta_weights, farey_pairs
from .analytic.gamma import GammaFactorEngine
from .analytic.oscillatory import TwistSetup, J_factor, _gl_nodes, default_contour, istar_evaluator, oscillatory_integral_I
from .analytic.testfunctions import U, V, VSTAR, Modulated, eval_test_function, inner_x_integral, kernel_W
from .analytic.voronoi import polar_term_d3, voronoi_dual_levels
from .arith import e_residues, inv, is_prime, units
from .characters import DirichletCharacter, character, primitive_characters
from .coefficients import HeckeCoefficientModel, coefficient_tables
from .errors import IdentityViolation, NotConverged, UsageError
from .paper_sums import cstar_all_n2, lift_a, sum_Cfrak_closed
from .report import Cell, SweepReport

CIRCLE_TOL = 1e-6
SPLIT_TOL = 1e-8
POISSON_TOL = 1e-4
TAIL_TOL = 1e-6


@dataclass(frozen=True)
class PipelineParams:
    N: float
    M1: int
    M2: int
    chi1: DirichletCharacter
    chi2: DirichletCharacter
    model: HeckeCoefficientModel = field(default_factory=HeckeCoefficientModel.trivial, compare=False)
    Q: float | None = None
    m_margin: float = 4.0
    n_margin: float = 16.0

    def __post_init__(self):
        if self.M1 == self.M2:
            raise UsageError(
                f"M1 = M2 = {self.M1}: the moduli must be distinct primes "
                "(the size window between M1 and M2 needs two different primes)"
            )
        if not (is_prime(self.M2) and self.M2 % 2):
            raise UsageError(f"M2={self.M2} must be an odd prime")
        if self.M1 != 1 and not (is_prime(self.M1) and self.M1 % 2):
            raise UsageError(f"M1={self.M1} must be an odd prime (or 1 for the degenerate split)")
        if self.chi1.modulus != self.M1 or self.chi2.modulus != self.M2:
            raise UsageError("character moduli must be M1 and M2")
        if not (self.chi1.is_primitive and self.chi2.is_primitive):
            raise UsageError("chi1 and chi2 must be primitive")
        if self.N <= 0 or self.N > 1e5:
            raise UsageError("N must lie in (0, 1e5]")
        if self.Q is None:
            object.__setattr__(self, "Q", math.sqrt(self.N / self.M1))

    @classmethod
    def build(cls, N, M1, M2, chi1_index=None, chi2_index=None, **kw) -> "PipelineParams":
        """Parameters with the lowest-index primitive characters unless indices are given."""
        if M1 == M2:
            cls._distinct(M1)
        c1 = character(M1, chi1_index) if chi1_index is not None else primitive_characters(M1)[0]
        c2 = character(M2, chi2_index) if chi2_index is not None else primitive_characters(M2)[-1]
        return cls(N, M1, M2, c1, c2, **kw)

    @staticmethod
    def _distinct(M1):
        raise UsageError(f"M1 = M2 = {M1}: the moduli must be distinct primes")

    @property
    def M(self) -> int:
        return self.M1 * self.M2

    @property
    def main_regime(self) -> bool:
        return self.N > self.M2**2

    @cached_property
    def chi(self) -> DirichletCharacter:
        return self.chi1 * self.chi2

    def conj(self) -> "PipelineParams":
        return PipelineParams(self.N, self.M1, self.M2, self.chi1.conj(), self.chi2.conj(), self.model, self.Q,
                              self.m_margin, self.n_margin)

    def with_Q(self, Q: float) -> "PipelineParams":
        return PipelineParams(self.N, self.M1, self.M2, self.chi1, self.chi2, self.model, Q, self.m_margin, self.n_margin)

    # support of V(n/N): N < n < 2N
    @cached_property
    def n_range(self) -> np.ndarray:
        return np.arange(math.floor(self.N) + 1, math.ceil(2 * self.N), dtype=np.int64)

    @cached_property
    def lam(self) -> np.ndarray:
        """lambda(1, n) on n_range."""
        if self.n_range.size == 0:
            return np.zeros(0, dtype=complex)
        right, _ = coefficient_tables(self.model, int(self.n_range[-1]))
        return right[self.n_range].astype(complex)

    @cached_property
    def Vn(self) -> np.ndarray:
        return eval_test_function(V, self.n_range / self.N) if self.n_range.size else np.zeros(0)

    @property
    def m_cutoff(self) -> int:
        """m-truncation: margin times M Q / N log M."""
        return max(1, math.ceil(self.m_margin * self.M * self.Q / self.N * math.log(self.M)))


def S_direct(params: PipelineParams) -> complex:
    p = params
    if p.n_range.size == 0:
        return 0j
    return complex(np.sum(p.lam * p.chi(p.n_range) * p.Vn))


def _F_vector(p: PipelineParams) -> tuple[np.ndarray, np.ndarray]:
    """(d, F(d)) for |d| < N."""
    D = math.ceil(p.N)
    d = np.arange(-D, D + 1, dtype=np.int64)
    if p.n_range.size == 0:
        return d, np.zeros(d.size, dtype=complex)
    A = p.lam * p.Vn
    m = p.n_range[None, :] - d[:, None]
    chim = np.where(m >= 1, p.chi(m), 0)
    F = eval_test_function(VSTAR, d / p.N) * (chim @ A)
    return d, F


@dataclass
class CircleResult:
    S: complex
    Splus: complex
    Sminus: complex
    residual: float


def S_circle_decomposition(params: PipelineParams, tol: float = CIRCLE_TOL, strict: bool = True) -> CircleResult:
    """S+ and S- from the delta expansion of delta((n - m)/M1); asserts S+ + S- = S(N)."""
    p = params
    S = S_direct(p)
    if p.n_range.size == 0:
        return CircleResult(0j, 0j, 0j, 0.0)
    d, F = _F_vector(p)
    sel = d % p.M1 == 0
    k, Fk = d[sel] // p.M1, F[sel]
    w = delta_weights(k, p.Q) if k.size else np.zeros(0, dtype=complex)
    Splus = complex(np.sum(Fk * w))
    Sminus = complex(np.sum(Fk * np.conj(w)))
    res = abs(Splus + Sminus - S) / (1 + abs(S))
    out = CircleResult(S, Splus, Sminus, res)
    if strict and res >= tol:
        raise IdentityViolation(f"S+ + S- differs from S(N): residual {res:.3g}", witness={"N": p.N, "M1": p.M1, "M2": p.M2, "Q": p.Q})
    return out


def _cells(p: PipelineParams, coprime_to_M1: bool = True):
    """(q, a) pairs of the S-tilde range: 1 <= q <= Q < a <= q + Q, (a, q) = 1, optionally (q, M1) = 1."""
    if p.Q < 1:
        return []
    q, a, _ = farey_pairs(float(p.Q))
    return [(int(qq), int(aa)) for qq, aa in zip(q, a) if not coprime_to_M1 or qq % p.M1 != 0]


def _aM1bar(a: int, q: int, M1: int) -> int:
    return inv((a * M1) % q, q) if q > 1 else 0


@dataclass
class SplitResult:
    S_tilde: complex
    S0: complex
    T: complex
    residual: float


def congruence_split(params: PipelineParams, tol: float = SPLIT_TOL, strict: bool = True, sign: int = 1) -> SplitResult:
    """S-tilde from its definition (congruence M1 | n - m imposed) and as S0 + T(N) (b-sum over Z/M1).

    sign=-1 splits the S- side instead; chi -> conj(chi) together with sign -> -sign
    conjugates all three outputs.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    p = params
    d, F = _F_vector(p)
    cong = d % p.M1 == 0
    S_tilde = S0 = T = 0j
    for q, a in _cells(p):
        abar = _aM1bar(a, q, p.M1)
        X = inner_x_integral(-sign * d / (p.M1 * a * q))
        S_tilde += np.sum((F * X * e_residues(sign * abar * d, q))[cong]) / (a * q)
        for b in range(p.M1):
            c = abar * p.M1 + b * q
            val = np.sum(F * X * e_residues(sign * c * d, q * p.M1)) / (p.M1 * a * q)
            if b == 0:
                S0 += val
            else:
                T += val
    S_tilde, S0, T = complex(S_tilde), complex(S0), complex(T)
    res = abs(S_tilde - S0 - T) / (1 + abs(S_tilde))
    out = SplitResult(S_tilde, S0, T, res)
    if strict and res >= tol:
        raise IdentityViolation(f"S-tilde != S0 + T(N): residual {res:.3g}", witness={"N": p.N, "M1": p.M1, "M2": p.M2})
    return out


def T_ab_direct(a: int, b: int, q: int, params: PipelineParams) -> complex:
    """T(a, b; q) = sum_{n, m} lambda(1,n) chi(m) e(c (n - m)/(q M1)) W(n/N, m/N, N/(M1 a q)), c = (a M1)bar M1 + b q."""
    p = params
    if p.n_range.size == 0:
        return 0j
    c = _aM1bar(a, q, p.M1) * p.M1 + b * q
    R = q * p.M1
    n = p.n_range
    m = np.arange(1, math.ceil(3 * p.N) + 1, dtype=np.int64)
    y = p.N / (p.M1 * a * q)
    W = kernel_W(n[:, None] / p.N, m[None, :] / p.N, y)
    phase = np.outer(e_residues(c * n, R), e_residues(-c * m, R))
    return complex(p.lam @ (W * phase) @ p.chi(m))


def _cfrak_vector(a: int, b: int, q: int, p: PipelineParams) -> np.ndarray:
    """Brute-force C(a, b; m, q) for all m mod qM; valid for any b (b = 0 included)."""
    R = q * p.M
    ap = _aM1bar(a, q, p.M1)
    c = np.arange(R, dtype=np.int64)
    lin = p.chi(c) * e_residues(-(ap * p.M1 + b * q) * p.M2 * c, R)
    return lin @ e_residues(np.outer(c, c), R)


@dataclass
class PoissonResult:
    lhs: complex
    rhs: complex
    rhs_doubled: complex
    m_cut: int
    residual: float
    stability: float


def poisson_step_check(
    a: int, b: int, q: int, params: PipelineParams,
    tol: float = POISSON_TOL, tail_tol: float = TAIL_TOL, strict: bool = True,
) -> PoissonResult:
    """T(a, b; q) against (N/(Mq)) sum_m C(a,b;m,q) int W(n/N, v, y) e(-m N v/(M q)) dv summed over n.

    The v-integral equals V(n/N) e(-m n/(M q)) J(m); the m-sum is truncated at
    the margin-scaled cutoff and recomputed with the cutoff doubled.  b = 0 is
    accepted (it is the S0 branch) since the brute-force C needs no unit b.
    """
    p = params
    if math.gcd(a, q) != 1:
        raise UsageError("need gcd(a, q) = 1")
    if math.gcd(q, p.M) != 1:
        raise UsageError("need gcd(q, M) = 1")
    lhs = T_ab_direct(a, b, q, p)
    setup = TwistSetup(p.N, p.M1, p.M2, a, q)
    Cv = _cfrak_vector(a, b, q, p)
    c = _aM1bar(a, q, p.M1) * p.M1 + b * q
    n = p.n_range
    base = p.lam * p.Vn * e_residues(c * n, q * p.M1)

    def rhs(mc):
        total = 0j
        for m in range(-mc, mc + 1):
            Cm = Cv[m % (q * p.M)]
            if abs(Cm) < 1e-9:
                continue
            inner = np.sum(base * np.exp(-2j * np.pi * m * n / (p.M * q)))
            total += Cm * J_factor(setup, m) * inner
        return complex(total * p.N / (p.M * q))

    mc = p.m_cutoff
    r1, r2 = rhs(mc), rhs(2 * mc)
    scale = max(abs(lhs), 1e-300)
    out = PoissonResult(lhs, r1, r2, mc, abs(lhs - r2) / scale, abs(r2 - r1) / scale)
    if strict and out.stability > tail_tol:
        raise NotConverged(f"m-tail not negligible: doubling changes RHS by {out.stability:.3g}")
    return out


@dataclass
class VoronoiStepResult:
    lhs: complex
    levels: list[float]
    rhs: list[complex]
    residuals: list[float]
    polar: complex
    m_values: list[int]

    @property
    def final_residual(self) -> float:
        return self.residuals[-1]

    def monotone(self, slack: float = 0.1, floor: float = 0.0) -> bool:
        """Each refinement shrinks the residual up to ``slack``, or lands below ``floor``."""
        r = self.residuals
        return all(r[i + 1] <= max((1 + slack) * r[i], floor) for i in range(len(r) - 1))

    def trace(self) -> list[dict]:
        return [
            {"n_cutoff_factor": f, "rhs_re": v.real, "rhs_im": v.imag, "residual": r}
            for f, v, r in zip(self.levels, self.rhs, self.residuals)
        ]


def voronoi_step_check(
    a: int, b: int, q: int, params: PipelineParams,
    factors=(32.0, 128.0, 512.0, 2048.0),
    engine: GammaFactorEngine | None = None,
) -> VoronoiStepResult:
    """T(a, b; q) against its Poisson-then-Voronoi transform, at increasing n-truncation.

    For each m with a m = M2 (mod q) the n-sum of the Poisson side is a Voronoi
    sum of modulus q M1 with g_m(x) = V(x/N) e(-m x/(M q)); its dual terms,
    multiplied by J(m), are the I-transforms I_pm(n1^2 n2, m; q).  The d_3
    polar term is added (it is absent for cusp forms).  The n-truncation keeps
    n1^2 n2 <= factor * Q^3 M1^3 / N.
    """
    p = params
    if p.model.mode != "trivial":
        raise UsageError("the Voronoi step is implemented for the trivial (d_3) coefficient model")
    if math.gcd(b, p.M1) != 1 or math.gcd(a, q) != 1:
        raise UsageError("need gcd(a, q) = gcd(b, M1) = 1")
    engine = engine or GammaFactorEngine()
    lhs = T_ab_direct(a, b, q, p)
    setup = TwistSetup(p.N, p.M1, p.M2, a, q)
    r = q * p.M1
    c = (_aM1bar(a, q, p.M1) * p.M1 + b * q) % r
    n_cut = p.Q**3 * p.M1**3 / p.N
    y_levels = [f * n_cut / r**3 for f in factors]
    rhs = np.zeros(len(factors), dtype=complex)
    polar_total = 0j
    used = []
    for m in range(-p.m_cutoff, p.m_cutoff + 1):
        if (a * m - p.M2) % q:
            continue
        Cm = sum_Cfrak_closed(a, b, m, q, p.chi1, p.chi2)
        if Cm == 0:
            continue
        coef = Cm * J_factor(setup, m) * p.N / (p.M * q)
        if abs(coef) < 1e-14 * max(1.0, abs(lhs)):
            continue
        g = Modulated(V, p.N, -setup.xi(m))
        contour = default_contour(setup, m)
        pol = polar_term_d3(c, r, g)
        dual = np.array(voronoi_dual_levels(c, r, g, y_levels, engine, contour))
        rhs += coef * (pol + dual)
        polar_total += coef * pol
        used.append(m)
    scale = max(abs(lhs), 1e-300)
    res = [abs(lhs - v) / scale for v in rhs]
    return VoronoiStepResult(lhs, list(factors), list(rhs), res, complex(polar_total), used)


def error_term_audit(params: PipelineParams, N_values=None) -> SweepReport:
    """|S+ - S-tilde| M1/(N sqrt(M2)) and |S0| M1^{5/4}/(N^{3/4} sqrt(M2)); report only."""
    start = time.perf_counter()
    Ns = list(N_values) if N_values is not None else [params.N]
    report = SweepReport(
        suite="error-term",
        grid={"M1": params.M1, "M2": params.M2, "N": Ns},
        guard=None,
        guard_label="report only (no pass/fail)",
        columns=["N", "quantity"],
    )
    for N in Ns:
        p = PipelineParams(N, params.M1, params.M2, params.chi1, params.chi2, params.model)
        d, F = _F_vector(p)
        sel = d % p.M1 == 0
        k, Fk = d[sel] // p.M1, F[sel]
        w_all = delta_weights(k, p.Q) if k.size else np.zeros(0, dtype=complex)
        w_cop = delta_weights(k, p.Q, keep=lambda qq: qq % p.M1 != 0) if k.size else np.zeros(0, dtype=complex)
        E = complex(np.sum(Fk * (w_all - w_cop)))
        ref_E = N * math.sqrt(p.M2) / p.M1
        structural_zero = p.Q < p.M1
        report.cells.append(Cell({"N": N, "quantity": "E"}, E, ref_E, abs(E) / ref_E, {"structural_zero": structural_zero}))
        split = congruence_split(p, strict=False)
        ref_S0 = N**0.75 * math.sqrt(p.M2) / p.M1**1.25
        report.cells.append(Cell({"N": N, "quantity": "S0"}, split.S0, ref_S0, abs(split.S0) / ref_S0))
    report.finalize(wall_time=time.perf_counter() - start)
    return report


# ---------------------------------------------------------------- Cauchy / second Poisson audit


@dataclass
class _Branch:
    """One (q, m) term: a(m, q), the weight and I_+(L y, m; q) on the y-grid."""

    q: int
    m: int
    a: int
    weight: complex
    setup: TwistSetup


def _branches(p: PipelineParams) -> list[_Branch]:
    out = []
    for q in range(1, math.floor(p.Q) + 1):
        if q % p.M1 == 0 or math.gcd(q, p.M) != 1:
            continue
        for m in range(-p.m_cutoff, p.m_cutoff + 1):
            if math.gcd(m, q) != 1:
                continue
            a = lift_a(m, q, p.M2, p.Q)
            wgt = np.conj(p.chi2(m)) * p.chi(q) / a
            if wgt == 0:
                continue
            out.append(_Branch(q, m, a, complex(wgt), TwistSetup(p.N, p.M1, p.M2, a, q)))
    return out


ASSEMBLY_PRUNE = 1e-8


def _fourier_in_n2(vals: np.ndarray, theta: np.ndarray, n2max: int) -> np.ndarray:
    """sum_y vals(y) e(-n2 theta(y)) for n2 = -n2max..n2max, powers built by repeated products."""
    z = np.exp(-2j * np.pi * theta)
    pos = np.empty(n2max + 1, dtype=complex)
    neg = np.empty(n2max + 1, dtype=complex)
    w, wc = vals.astype(complex), vals.astype(complex)
    zc = np.conj(z)
    for k in range(n2max + 1):
        pos[k], neg[k] = w.sum(), wc.sum()
        w, wc = w * z, wc * zc
    return np.concatenate([neg[:0:-1], pos])


def assembly_audit(params: PipelineParams, L_values=None, engine: GammaFactorEngine | None = None) -> SweepReport:
    """Zero- and nonzero-frequency parts of the Cauchy-squared sum at dyadic L; report only.

    T*(n1, m, m', q, q') = n1^2/(q q' M1) sum_{n2} C*(n1, n2, ...) I*(n2, ...).  The
    n2 range of a pair is truncated at n_margin * q q' M1 / L (at most the global
    n_margin * Q^2 M1 / L); the largest |I*| at the edge relative to its peak is
    recorded as ``n2_tail``.  Branches whose weighted I-transform is below
    ASSEMBLY_PRUNE of the largest are dropped.  Ratios are taken against
    L M/(Q^2 M1) (zero frequency) and Q M^2/(N sqrt(M1)) (nonzero frequency);
    these are desk-scale magnitudes and say nothing about the asymptotic claim.
    """
    p = params
    start = time.perf_counter()
    engine = engine or GammaFactorEngine()
    L_max = p.Q**3 * p.M1**3 / p.N
    if L_values is None:
        L_values = [2.0**k for k in range(0, int(math.floor(math.log2(L_max))) + 1)]
    branches = _branches(p)
    report = SweepReport(
        suite="assembly",
        grid={"N": p.N, "M1": p.M1, "M2": p.M2, "L": list(L_values), "n_branches": len(branches),
              "prune": ASSEMBLY_PRUNE},
        guard=None,
        guard_label="report only (no pass/fail); desk scale, non-probative",
        columns=["L", "part"],
    )
    ref_zero = lambda L: L * p.M / (p.Q**2 * p.M1)
    ref_nonzero = p.Q * p.M**2 / (p.N * math.sqrt(p.M1))
    for L in L_values:
        grids, I_cache = {}, {}

        def grid(panels):
            if panels not in grids:
                grids[panels] = _gl_nodes(0.5, 2.5, panels)
            return grids[panels]

        def I_on(br, panels):
            key = (br.q, br.m, panels)
            if key not in I_cache:
                I_cache[key] = oscillatory_integral_I(engine, 1, L * grid(panels)[0], br.m, br.setup)
            return I_cache[key]

        size = [abs(br.weight) * float(np.max(np.abs(I_on(br, 64)))) for br in branches]
        keep = [br for br, v in zip(branches, size) if v >= ASSEMBLY_PRUNE * max(size)]
        zero = nonzero = diag = 0j
        tail = 0.0
        for n1 in range(1, math.floor(p.Q) + 1):
            mine = [br for br in keep if br.q % n1 == 0]
            for b1 in mine:
                for b2 in mine:
                    denom = b1.q * b2.q * p.M1
                    n2max = max(1, math.ceil(p.n_margin * denom / L))
                    panels = max(64, math.ceil(2 * n2max * L / denom) + 8)
                    y, wt = grid(panels)
                    vals = eval_test_function(U, y) * I_on(b1, panels) * np.conj(I_on(b2, panels)) * wt / y
                    n2 = np.arange(-n2max, n2max + 1)
                    Ist = _fourier_in_n2(vals, y * (L / denom), n2max)
                    peak = float(np.max(np.abs(Ist)))
                    if peak > 0:
                        tail = max(tail, max(abs(Ist[0]), abs(Ist[-1])) / peak)
                    Cs = cstar_all_n2(n1, b1.m, b2.m, b1.q, b2.q, p.chi1, p.M2)
                    Cn = Cs[n2 % Cs.size]
                    pref = b1.weight * np.conj(b2.weight) * n1**2 / denom
                    z = pref * Cn[n2max] * Ist[n2max]
                    zero += z
                    nonzero += pref * np.sum(Cn * Ist) - z
                    if b1 is b2:
                        diag += z
        extra = {"n_kept": len(keep), "n2_tail": tail}
        report.cells.append(Cell({"L": L, "part": "zero"}, complex(zero), ref_zero(L), abs(zero) / ref_zero(L), extra))
        report.cells.append(Cell({"L": L, "part": "nonzero"}, complex(nonzero), ref_nonzero, abs(nonzero) / ref_nonzero, extra))
        report.cells.append(Cell({"L": L, "part": "diagonal"}, complex(diag), ref_zero(L), abs(diag) / ref_zero(L), extra))
    report.finalize(wall_time=time.perf_counter() - start)
    return report


def istar_decay_sweep(params: PipelineParams, L_values=(2.0, 8.0, 32.0), engine: GammaFactorEngine | None = None,
                      guard: float = 50.0, strict: bool = True) -> SweepReport:
    """|I*| against L N/(q q' Q M1^3) and decay beyond the n2 cutoff Q^2 M1 / L (both as regression guards)."""
    from .errors import GuardExceeded

    p = params
    start = time.perf_counter()
    engine = engine or GammaFactorEngine()
    branches = [br for br in _branches(p) if abs(br.m) <= 1]
    report = SweepReport(
        suite="istar-decay",
        grid={"N": p.N, "M1": p.M1, "M2": p.M2, "L": list(L_values), "m": [-1, 0, 1]},
        guard=guard,
        guard_label="empirical regression guard",
        columns=["L", "q", "qp", "m", "mp"],
    )
    for L in L_values:
        cut = p.Q**2 * p.M1 / L
        for b1 in branches:
            for b2 in branches:
                ev = istar_evaluator(engine, b1.m, b2.m, b1.setup, b2.setup, L, n2_max=16 * max(cut, 1.0))
                inside = np.arange(0, max(1, math.floor(cut)) + 1)
                v_in = np.abs(ev(inside))
                v_out = float(np.abs(ev(np.array([16 * max(cut, 1.0)])))[0])
                ref = L * p.N / (b1.q * b2.q * p.Q * p.M1**3)
                peak = float(v_in.max())
                decay = v_out / peak if peak > 0 else 0.0
                report.cells.append(Cell(
                    {"L": L, "q": b1.q, "qp": b2.q, "m": b1.m, "mp": b2.m},
                    complex(ev(0)), ref, peak / ref, {"decay_16x": decay},
                ))
                if peak > 0 and decay > 0.1:
                    report.violations.append(report.cells[-1])
    report.finalize(wall_time=time.perf_counter() - start)
    if strict and not report.passed:
        raise GuardExceeded("I* magnitude or decay outside its regression guard", witness=report.summary["argmax"], report=report)
    return report
