"""The relativistic linear singular oscillator.

Natural units hbar = m = c = 1 throughout: energies are in units of mc^2,
the coordinate rho = x / (Compton wavelength), and time in hbar / mc^2. The
model is fixed by two numbers, omega0 = hbar omega / mc^2 and g0 = m g / hbar.

The finite-difference operators act on analytic functions by imaginary
shifts, exp(i d/drho) f(rho) = f(rho + i). Coefficient functions stand to the
left of the shift: rho^(2) exp(i d/drho) f = rho^(2)(rho) * f(rho + i).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .exceptions import NumericalError, PoleError, ValidationError
from .numerics import (
    QuadratureRule,
    _on_pole,
    cdh_orthonormal_sequence,
    generalized_degree,
    pochhammer,
    semi_infinite_rule,
)

CRITICAL_ATOL = 1e-14
REALITY_ATOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    omega0: float
    g0: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and math.isfinite(self.g0)):
            raise ValidationError(f"ModelParams: non-finite parameters {self}")
        if self.omega0 <= 0:
            raise ValidationError(f"ModelParams: omega0 must be positive, got {self.omega0}")

    @property
    def discriminant(self) -> float:
        """1 - 8 g0 omega0^2; its sign selects the regime."""
        return 1.0 - 8.0 * self.g0 * self.omega0**2

    @property
    def regime(self) -> str:
        disc = self.discriminant
        if abs(disc) <= CRITICAL_ATOL:
            return "critical"
        return "subcritical" if disc > 0 else "supercritical"

    @classmethod
    def critical(cls, omega0: float) -> "ModelParams":
        return cls(omega0, 1.0 / (8.0 * omega0**2))


@dataclass(frozen=True)
class SpectralParams:
    alpha: complex
    nu: complex
    k: float
    d: float
    regime: str

    @property
    def two_k(self) -> float:
        return 2.0 * self.k


@lru_cache(maxsize=256)
def derive_spectral(params: ModelParams) -> SpectralParams:
    """alpha, nu, the Bargmann index k = (alpha+nu)/2 and d = sqrt(1+8 g0)/2.

    1 - sqrt(1 - x) is evaluated as x / (1 + sqrt(1 - x)) to keep full relative
    accuracy as omega0 -> 0.
    """
    w, g = params.omega0, params.g0
    regime = params.regime
    x = 8.0 * g * w**2
    s = 0j if regime == "critical" else cmath.sqrt(1.0 - x)
    minus = x / (1.0 + s) if regime != "critical" else 1.0 + 0j
    alpha = 0.5 + 0.5 * cmath.sqrt(1.0 + (2.0 / w**2) * minus)
    nu = 0.5 + 0.5 * cmath.sqrt(1.0 + (2.0 / w**2) * (1.0 + s))
    if regime == "supercritical":
        nu = alpha.conjugate()
    elif regime == "critical":
        nu = alpha
    if abs((alpha + nu).imag) > REALITY_ATOL:
        raise NumericalError(f"derive_spectral: alpha + nu not real for {params}")
    k = 0.5 * (alpha + nu).real
    d_sq = 1.0 + 8.0 * g
    d = 0.5 * math.sqrt(d_sq) if d_sq >= 0 else float("nan")
    return SpectralParams(alpha, nu, k, d, regime)


def energy(n, params: ModelParams):
    """E_n / mc^2 = omega0 (2n + alpha + nu); equally spaced with gap 2 omega0."""
    sp = derive_spectral(params)
    total = sp.alpha + sp.nu
    if abs(total.imag) > REALITY_ATOL:
        raise NumericalError(f"energy: spectrum not real, Im(alpha+nu)={total.imag:.3g}")
    return params.omega0 * (2 * np.asarray(n) + total.real)


def energy_over_hbar_omega(n, params: ModelParams):
    """(E_n - mc^2) / hbar omega, the non-relativistic energy scale."""
    return (energy(n, params) - 1.0) / params.omega0


class WavefunctionSample(NamedTuple):
    rho: complex
    n: int
    value: complex


def _log_norm(n: int, sp: SpectralParams) -> float:
    a, v = sp.alpha, sp.nu
    total = (
        math.log(2.0)
        - math.lgamma(n + 1)
        - special.loggamma(n + a + v)
        - special.loggamma(n + a + 0.5)
        - special.loggamma(n + v + 0.5)
    )
    return 0.5 * complex(total).real


def _ground_prefactor(rho: np.ndarray, params: ModelParams, sp: SpectralParams) -> np.ndarray:
    """c_0 omega0^(i rho) (-rho)^(alpha) Gamma(nu + i rho), evaluated in log space."""
    irho = 1j * rho
    for arg, label in ((sp.alpha + irho, "alpha + i rho"), (sp.nu + irho, "nu + i rho")):
        if np.any(_on_pole(arg)):
            raise PoleError(f"eigenfunction: Gamma({label}) has a pole")
    at_zero = _on_pole(irho)  # 1/Gamma(i rho) vanishes there
    irho_safe = np.where(at_zero, 0.5, irho)
    log_val = (
        _log_norm(0, sp)
        + irho * math.log(params.omega0)
        + 1j * math.pi * sp.alpha.real / 2
        + special.loggamma(sp.alpha + irho)
        - special.loggamma(irho_safe)
        + special.loggamma(sp.nu + irho)
    )
    return np.where(at_zero, 0.0, np.exp(log_val))


def eigenfunctions(n_max: int, rho, params: ModelParams) -> np.ndarray:
    """psi_0 .. psi_n_max at ``rho``, stacked along a new leading axis.

    psi_n(rho) = c_n omega0^(i rho) (-rho)^(alpha) Gamma(nu + i rho) S_n(rho^2; alpha, nu, 1/2).
    The ratio c_n S_n / c_0 comes from the orthonormal recurrence for S_n.
    The generalized degree's phase i^alpha is divided by |i^alpha|; for
    complex alpha this restores unit norm, and it is a no-op otherwise.
    """
    if n_max < 0:
        raise ValidationError(f"eigenfunctions: n_max must be nonnegative, got {n_max}")
    sp = derive_spectral(params)
    rho = np.asarray(rho, dtype=complex)
    pref = _ground_prefactor(rho, params, sp)
    return pref * cdh_orthonormal_sequence(n_max, rho**2, sp.alpha, sp.nu, 0.5)


def eigenfunction(n: int, rho, params: ModelParams):
    """psi_n(rho) for real or complex ``rho``; psi_n(0) = 0."""
    if n < 0:
        raise ValidationError(f"eigenfunction: n must be nonnegative, got {n}")
    out = eigenfunctions(n, rho, params)[n]
    return complex(out) if np.ndim(rho) == 0 else out


def _shift_coefficients(rho, params: ModelParams):
    rho = np.asarray(rho, dtype=complex)
    deg2 = generalized_degree(rho, 2)
    if np.any(deg2 == 0):
        raise ValidationError("finite-difference operator: rho^(2) = 0 in the singular term (rho = 0 or -i)")
    return rho, deg2, 0.5 * params.omega0**2 * deg2 + params.g0 / deg2


def apply_hamiltonian(f: Callable, rho, params: ModelParams):
    """(H f)(rho) / mc^2 = [f(rho+i) + f(rho-i)]/2 + (omega0^2 rho^(2)/2 + g0/rho^(2)) f(rho+i)."""
    rho, _, coeff = _shift_coefficients(rho, params)
    up, down = f(rho + 1j), f(rho - 1j)
    return 0.5 * (up + down) + coeff * up


def apply_momentum(f: Callable, rho, params: ModelParams):
    """(P f)(rho) / mc = -([f(rho+i) - f(rho-i)]/2 + (omega0^2 rho^(2)/2 + g0/rho^(2)) f(rho+i))."""
    rho, _, coeff = _shift_coefficients(rho, params)
    up, down = f(rho + 1j), f(rho - 1j)
    return -(0.5 * (up - down) + coeff * up)


def _parse_sign(sign) -> int:
    if sign in ("+", 1, +1.0):
        return 1
    if sign in ("-", -1, -1.0):
        return -1
    raise ValidationError(f"apply_A: sign must be '+' or '-', got {sign!r}")


def apply_A(sign, f: Callable, rho, params: ModelParams):
    """A^(+-) f = [(omega0 rho -+ i P)^2 f - 2 g0 f / (rho^2 + 1)] / (2 omega0).

    The square is two nested applications of the first-order operator, so f is
    sampled at rho, rho +- i and rho +- 2i.
    """
    s = _parse_sign(sign)
    w = params.omega0

    def first_order(h: Callable) -> Callable:
        return lambda x: w * np.asarray(x) * h(x) - s * 1j * apply_momentum(h, x, params)

    rho = np.asarray(rho, dtype=complex)
    denom = rho**2 + 1
    if np.any(denom == 0):
        raise ValidationError("apply_A: rho^2 + 1 = 0 in the singular term")
    squared = first_order(first_order(f))(rho)
    return (squared - 2 * params.g0 * f(rho) / denom) / (2 * w)


def f_of_energy(E, params: ModelParams):
    """f(E) = sqrt([E + omega0(alpha-nu-1)] [E + omega0(nu-alpha-1)]), E in units of mc^2.

    The product equals (E - omega0)^2 - omega0^2 (alpha - nu)^2, which is real in
    every regime; a negative value is outside the physical range.
    """
    sp = derive_spectral(params)
    w = params.omega0
    radicand = (np.asarray(E, dtype=float) - w) ** 2 - (w**2 * (sp.alpha - sp.nu) ** 2).real
    if np.any(radicand < 0):
        raise ValidationError(f"f_of_energy: negative radicand at E={E}")
    out = np.sqrt(radicand)
    return float(out) if np.ndim(out) == 0 else out


def f_at_level(n, params: ModelParams):
    """Closed form f(E_n) = 2 omega0 sqrt((n + alpha - 1/2)(n + nu - 1/2))."""
    sp = derive_spectral(params)
    prod = ((n + sp.alpha - 0.5) * (n + sp.nu - 0.5)).real
    return 2 * params.omega0 * math.sqrt(prod)


def ladder_coefficient(n: int, params: ModelParams) -> float:
    """k_n = sqrt(n (n + 2k - 1)); K^- psi_n = k_n psi_(n-1)."""
    if n < 0:
        raise ValidationError(f"ladder_coefficient: n must be nonnegative, got {n}")
    sp = derive_spectral(params)
    return math.sqrt(n * (n + 2 * sp.k - 1))


def ladder_normalization(n: int, params: ModelParams) -> float:
    """1 / N_n = sqrt(n! (alpha+nu)_n), the norm of (K^+)^n psi_0."""
    sp = derive_spectral(params)
    return math.sqrt(math.factorial(n) * float(np.real(pochhammer(2 * sp.k, n))))


class AlphaNuSweep(NamedTuple):
    g0: np.ndarray
    alpha: np.ndarray
    nu: np.ndarray
    regime: tuple


def alpha_nu_sweep(omega0: float, g_min: float, g_max: float, steps: int) -> AlphaNuSweep:
    """alpha and nu on the grid g_i = g_min + i (g_max - g_min) / steps, i = 0 .. steps."""
    if steps < 1 or not g_max >= g_min:
        raise ValidationError(f"alpha_nu_sweep: need steps >= 1 and g_max >= g_min, got {steps}, [{g_min}, {g_max}]")
    g = np.array([g_min + i * (g_max - g_min) / steps for i in range(steps + 1)])
    spec = [derive_spectral(ModelParams(omega0, float(x))) for x in g]
    return AlphaNuSweep(
        g,
        np.array([s.alpha for s in spec]),
        np.array([s.nu for s in spec]),
        tuple(s.regime for s in spec),
    )


# ---------------------------------------------------------------------------
# Inner products on the half line
# ---------------------------------------------------------------------------

def level_rule(n_max: int, params: ModelParams, order: int = 20) -> QuadratureRule:
    """Panel rule on [0, R] with R where sum_(n <= n_max) |psi_n|^2 has decayed by 1e-18."""
    return semi_infinite_rule(
        lambda r: (np.abs(eigenfunctions(n_max, r, params)) ** 2).sum(axis=0), order=order
    )


def gram_matrix(n_max: int, params: ModelParams, order: int = 20) -> np.ndarray:
    """G_nm = integral_0^inf conj(psi_n) psi_m d rho for n, m <= n_max."""
    rule = level_rule(n_max, params, order)
    psi = eigenfunctions(n_max, rule.nodes, params)
    g = np.empty((n_max + 1, n_max + 1), dtype=complex)
    for i in range(n_max + 1):
        for j in range(n_max + 1):
            g[i, j] = rule.integrate(np.conj(psi[i]) * psi[j])
    return g


def ladder_projection(sign, n: int, params: ModelParams, order: int = 20) -> complex:
    """<psi_(n-+1)| A^(-+) psi_n> by quadrature (A^- lowers, A^+ raises)."""
    s = _parse_sign(sign)
    target = n + s
    if target < 0:
        raise ValidationError(f"ladder_projection: no level below n={n}")
    rule = level_rule(max(n, target) + 1, params, order)
    moved = apply_A(s, lambda x: eigenfunction(n, x, params), rule.nodes, params)
    return rule.integrate(np.conj(eigenfunction(target, rule.nodes, params)) * moved)


def eigen_residual(n: int, rho, params: ModelParams) -> float:
    """Largest pointwise |H psi_n - E_n psi_n| / |E_n psi_n| over the sample points."""
    rho = np.asarray(rho, dtype=float)
    f = lambda x: eigenfunction(n, x, params)  # noqa: E731
    lhs = apply_hamiltonian(f, rho, params)
    rhs = energy(n, params) * f(rho)
    return float((np.abs(lhs - rhs) / np.abs(rhs)).max())


# ---------------------------------------------------------------------------
# Non-relativistic limit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonrelLimitReport:
    g0: float
    n: int
    omegas: tuple
    alpha_error: tuple  # alpha - (d + 1/2)
    nu_offset_error: tuple  # nu - 1/omega0 - 1/2
    energy_error: tuple  # E_n/mc^2 - 1 - omega0 (2n + d + 1)
    energy_error_hbar_omega: tuple  # (E_n - mc^2)/hbar omega - (2n + d + 1)
    alpha_order: tuple
    energy_order: tuple


def _orders(omegas, errors) -> tuple:
    out = []
    for (w1, e1), (w2, e2) in zip(zip(omegas, errors), zip(omegas[1:], errors[1:])):
        out.append(math.log(abs(e1) / abs(e2)) / math.log(w1 / w2))
    return tuple(out)


def nonrel_limit_check(g0: float, omegas=(1e-1, 1e-2, 1e-3, 1e-4), n: int = 0) -> NonrelLimitReport:
    """Approach to the non-relativistic oscillator along a decreasing omega0 sweep.

    Convergence orders are measured between consecutive sweep points.
    """
    omegas = tuple(sorted(omegas, reverse=True))
    alpha_err, nu_err, e_err, e_err_hw = [], [], [], []
    for w in omegas:
        p = ModelParams(w, g0)
        sp = derive_spectral(p)
        alpha_err.append(sp.alpha.real - (sp.d + 0.5))
        nu_err.append(sp.nu.real - 1.0 / w - 0.5)
        e_err.append(energy(n, p) - 1.0 - w * (2 * n + sp.d + 1))
        e_err_hw.append(e_err[-1] / w)
    return NonrelLimitReport(
        g0=g0,
        n=n,
        omegas=omegas,
        alpha_error=tuple(alpha_err),
        nu_offset_error=tuple(nu_err),
        energy_error=tuple(e_err),
        energy_error_hbar_omega=tuple(e_err_hw),
        alpha_order=_orders(omegas, alpha_err),
        energy_order=_orders(omegas, e_err),
    )
