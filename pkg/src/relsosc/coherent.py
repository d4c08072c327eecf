"""SU(1,1) coherent states |zeta, k> of the oscillator.

Labels live in the open unit disc. Every closed form here has a spectral-sum
counterpart built from the expansion coefficients

    c_n(zeta) = (1 - |zeta|^2)^k sqrt((2k)_n / n!) zeta^n

and the level energies, and the two are cross-checked in the test-suite.
Complex powers use the principal logarithm; on the disc 1 - conj(z') z has
positive real part, so no branch cut is ever crossed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import RegimeError, TruncationError, ValidationError
from .model import ModelParams, derive_spectral, eigenfunction, eigenfunctions
from .numerics import disc_rule, fsum_complex, gauss_2f1

TAIL_TOL = 1e-14
MAX_TERMS = 4096
SPECTRAL_TERMS = 256


@dataclass(frozen=True)
class CSLabel:
    """Point of the unit disc; zeta = -tanh(tau/2) exp(-i phi)."""

    zeta: complex

    def __post_init__(self):
        z = complex(self.zeta)
        if not abs(z) < 1:
            raise ValidationError(f"CSLabel: |zeta| must be < 1, got {abs(z)}")
        object.__setattr__(self, "zeta", z)

    @classmethod
    def from_group(cls, tau: float, phi: float) -> "CSLabel":
        if tau < 0:
            raise ValidationError(f"CSLabel: tau must be >= 0, got {tau}")
        return cls(-math.tanh(tau / 2) * cmath.exp(-1j * phi))

    @property
    def tau(self) -> float:
        return 2 * math.atanh(abs(self.zeta))

    @property
    def phi(self) -> float:
        """Angle in [0, 2 pi); 0 by convention at the origin."""
        if self.zeta == 0:
            return 0.0
        return (-cmath.phase(-self.zeta)) % (2 * math.pi)


def _as_label(z) -> CSLabel:
    return z if isinstance(z, CSLabel) else CSLabel(z)


def _k(params: ModelParams) -> float:
    return derive_spectral(params).k


# ---------------------------------------------------------------------------
# Expansion coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CSCoefficients:
    k: float
    zeta: complex
    coeffs: np.ndarray
    tail_bound: float

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)


def _log_weights(k: float, n: np.ndarray) -> np.ndarray:
    """log((2k)_n / n!)."""
    return special.gammaln(2 * k + n) - special.gammaln(2 * k) - special.gammaln(n + 1)


def _tail_bound(k: float, x: float, n_terms: int) -> float:
    """Bound on (1-x)^(2k) sum_{n >= n_terms} (2k)_n x^n / n!.

    Term ratios (2k+n) x / (n+1) are monotone in n, so the tail is bounded by a
    geometric series from its first term.
    """
    if x == 0:
        return 0.0
    n = n_terms
    first = math.exp(float(_log_weights(k, np.array(n))) + n * math.log(x) + 2 * k * math.log1p(-x))
    q = max(x, (2 * k + n) * x / (n + 1))
    if q >= 1:
        return math.inf
    return first / (1 - q)


def required_terms(k: float, x: float, tol: float = TAIL_TOL) -> int:
    """Fewest terms whose tail bound is below ``tol`` (x = |zeta|^2)."""
    if x == 0:
        return 1
    n = np.arange(MAX_TERMS + 1)
    log_t = _log_weights(k, n) + n * math.log(x) + 2 * k * math.log1p(-x)
    ratio = np.maximum(x, (2 * k + n) * x / (n + 1))
    with np.errstate(divide="ignore"):
        bound = np.where(ratio < 1, np.exp(log_t) / np.where(ratio < 1, 1 - ratio, 1), np.inf)
    ok = np.nonzero(bound < tol)[0]
    if len(ok) == 0:
        raise TruncationError(f"cs_coefficients: tail bound {tol} not met with {MAX_TERMS} terms at |zeta|^2={x}")
    return max(int(ok[0]), 1)


def coefficient_array(zeta, k: float, n_terms: int) -> np.ndarray:
    """c_n(zeta) for n < n_terms; ``zeta`` may be an array (rows) of labels."""
    zeta = np.asarray(zeta, dtype=complex)
    n = np.arange(n_terms)
    x = np.abs(zeta) ** 2
    mag = np.exp(k * np.log1p(-x)[..., None] + 0.5 * _log_weights(k, n))
    with np.errstate(divide="ignore", invalid="ignore"):
        powers = zeta[..., None] ** n
    powers = np.where(n == 0, 1.0, powers)
    return mag * powers


def cs_coefficients(
    label, params: ModelParams, n_terms: int | None = None, tail_tol: float = TAIL_TOL
) -> CSCoefficients:
    """Expansion of |zeta, k> over the eigenfunctions psi_n.

    With ``n_terms=None`` the truncation is chosen so that the tail bound on
    sum |c_n|^2 is below ``tail_tol`` (at most 4096 terms, else
    ``TruncationError``).
    """
    label = _as_label(label)
    k = _k(params)
    x = abs(label.zeta) ** 2
    if n_terms is None:
        n_terms = required_terms(k, x, tail_tol)
    coeffs = coefficient_array(label.zeta, k, n_terms)
    return CSCoefficients(k, label.zeta, coeffs, _tail_bound(k, x, n_terms))


def _joint_terms(k: float, *labels: CSLabel, minimum: int = 1) -> int:
    return max([minimum] + [required_terms(k, abs(l.zeta) ** 2) for l in labels])


# ---------------------------------------------------------------------------
# Position representation
# ---------------------------------------------------------------------------

def cs_position_series(label, rho, params: ModelParams, n_terms: int | None = None):
    """sum_n c_n(zeta) psi_n(rho), summed in ascending n.

    The default truncation bounds the squared-coefficient tail by 1e-30, i.e.
    the amplitude tail by about 1e-15.
    """
    cs = cs_coefficients(label, params, n_terms, tail_tol=1e-30)
    scalar = np.ndim(rho) == 0
    rho = np.asarray(rho, dtype=complex)
    psi = eigenfunctions(cs.n_terms - 1, rho, params)
    terms = (cs.coeffs[:, None] * psi.reshape(cs.n_terms, -1)).T
    out = np.array([fsum_complex(t) for t in terms]).reshape(rho.shape)
    return complex(out) if scalar else out


def cs_position_closed(label, rho, params: ModelParams):
    """Closed form of the coherent state for alpha = nu or nu = conj(alpha).

    psi_0(rho) (1-|zeta|^2)^k (1-zeta)^(-|alpha| + i rho) 2F1(|alpha| + i rho, 1/2 + i rho; |alpha| + 1/2; zeta),
    with |alpha| the complex modulus. psi_0 carries the same prefactor and
    normalisation as the series form.
    """
    label = _as_label(label)
    sp = derive_spectral(params)
    if sp.regime == "subcritical":
        raise RegimeError("cs_position_closed: closed form needs g0 >= 1/(8 omega0^2)")
    scalar = np.ndim(rho) == 0
    rho = np.asarray(rho, dtype=complex)
    a = abs(sp.alpha)
    z = label.zeta
    irho = 1j * rho
    factor = np.exp(sp.k * math.log1p(-abs(z) ** 2) + (-a + irho) * cmath.log(1 - z))
    out = eigenfunction(0, rho, params) * factor * gauss_2f1(a + irho, 0.5 + irho, a + 0.5, z)
    return complex(out) if scalar else out


# ---------------------------------------------------------------------------
# Overlaps, measure, matrix elements
# ---------------------------------------------------------------------------

def _overlap_values(zb, zk, k: float):
    """<zb|zk> for arrays of bra and ket labels."""
    zb = np.asarray(zb, dtype=complex)
    zk = np.asarray(zk, dtype=complex)
    return np.exp(
        k * (np.log1p(-np.abs(zb) ** 2) + np.log1p(-np.abs(zk) ** 2)) - 2 * k * np.log(1 - np.conj(zb) * zk)
    )


def overlap(bra, ket, params: ModelParams) -> complex:
    """<zeta'|zeta> = (1-|zeta'|^2)^k (1-|zeta|^2)^k (1 - conj(zeta') zeta)^(-2k)."""
    bra, ket = _as_label(bra), _as_label(ket)
    return complex(_overlap_values(bra.zeta, ket.zeta, _k(params)))


def overlap_spectral(bra, ket, params: ModelParams, n_terms: int | None = None) -> complex:
    """sum_n conj(c_n(zeta')) c_n(zeta)."""
    bra, ket = _as_label(bra), _as_label(ket)
    k = _k(params)
    n = n_terms or _joint_terms(k, bra, ket)
    return fsum_complex(np.conj(coefficient_array(bra.zeta, k, n)) * coefficient_array(ket.zeta, k, n))


def measure_density(label, params: ModelParams) -> float:
    """(2k-1) / (pi (1-|zeta|^2)^2), density of d mu_k with respect to d^2 zeta."""
    label = _as_label(label)
    k = _k(params)
    if k <= 0.5:
        raise ValidationError(f"measure_density: needs k > 1/2, got k={k}")
    return (2 * k - 1) / (math.pi * (1 - abs(label.zeta) ** 2) ** 2)


def completeness_check(
    params: ModelParams,
    n_max: int = 10,
    n_radial: int = 40,
    n_angular: int = 48,
    method: str = "jacobi",
    measure_prefactor: float | None = None,
) -> np.ndarray:
    """M_mn = integral d mu_k <psi_m|zeta><zeta|psi_n> over the disc, for m, n <= n_max.

    Computed in coefficient space with a polar product rule. The integrand
    carries (1-|zeta|^2)^(2k-2) once the measure is included, which sets the
    rule's rim exponent. ``measure_prefactor`` replaces 2k-1 (fault injection).
    """
    k = _k(params)
    if k <= 0.5:
        raise ValidationError(f"completeness_check: needs k > 1/2, got k={k}")
    pref = 2 * k - 1 if measure_prefactor is None else measure_prefactor
    rule = disc_rule(2 * k - 2, n_radial, n_angular, method)
    c = coefficient_array(rule.zeta, k, n_max + 1)
    x = np.abs(rule.zeta) ** 2
    # d mu = pref / pi d^2 zeta / (1-x)^2 ; rule weights are against d^2 zeta / pi
    w = rule.weights * pref / (1 - x) ** 2
    m = np.empty((n_max + 1, n_max + 1), dtype=complex)
    for i in range(n_max + 1):
        for j in range(n_max + 1):
            m[i, j] = fsum_complex(w * c[:, i] * np.conj(c[:, j]))
    return m


def generator_matrix_elements(bra, ket, params: ModelParams) -> tuple[complex, complex, complex]:
    """(<zeta'|K-|zeta>, <zeta'|K+|zeta>, <zeta'|K0|zeta>)."""
    bra, ket = _as_label(bra), _as_label(ket)
    k = _k(params)
    ov = overlap(bra, ket, params)
    w = bra.zeta.conjugate() * ket.zeta
    return (
        2 * k * ket.zeta / (1 - w) * ov,
        2 * k * bra.zeta.conjugate() / (1 - w) * ov,
        k * (1 + w) / (1 - w) * ov,
    )


def _hk_values(zb, zk, k: float, omega0: float):
    w = np.conj(np.asarray(zb, dtype=complex)) * np.asarray(zk, dtype=complex)
    return 2 * k * omega0 * (1 + w) / (1 - w)


def hk_energy_function(bra, ket, params: ModelParams) -> complex:
    """H_k(conj(zeta'), zeta) = <zeta'|H|zeta> / <zeta'|zeta> = 2k omega0 (1 + conj(zeta') zeta)/(1 - conj(zeta') zeta)."""
    bra, ket = _as_label(bra), _as_label(ket)
    if bra.zeta.conjugate() * ket.zeta == 1:
        raise ValidationError("hk_energy_function: conj(zeta') zeta = 1")
    return complex(_hk_values(bra.zeta, ket.zeta, _k(params), params.omega0))


# ---------------------------------------------------------------------------
# Propagator and partition function
# ---------------------------------------------------------------------------

def propagator_closed(bra, ket, T: float, params: ModelParams, paper_form: bool = False) -> complex:
    """<zeta'| exp(-i T H) |zeta> in closed form (T in units of hbar/mc^2).

    exp(-2i omega0 k T) (1-|zeta|^2)^k (1-|zeta'|^2)^k / (1 - conj(zeta') zeta exp(-2i omega0 T))^(2k).
    ``paper_form=True`` puts exp(-2i omega0 k T) in the denominator instead. That
    variant disagrees with the spectral sum and is kept for comparison.
    """
    bra, ket = _as_label(bra), _as_label(ket)
    k = _k(params)
    w = params.omega0
    rot = cmath.exp(-2j * w * k * T) if paper_form else cmath.exp(-2j * w * T)
    log_val = (
        -2j * w * k * T
        + k * (math.log1p(-abs(bra.zeta) ** 2) + math.log1p(-abs(ket.zeta) ** 2))
        - 2 * k * cmath.log(1 - bra.zeta.conjugate() * ket.zeta * rot)
    )
    return cmath.exp(log_val)


def propagator_spectral(bra, ket, T: float, params: ModelParams, n_terms: int | None = None) -> complex:
    """sum_n conj(c_n(zeta')) c_n(zeta) exp(-i E_n T), ascending n, compensated."""
    bra, ket = _as_label(bra), _as_label(ket)
    k = _k(params)
    n = n_terms or _joint_terms(k, bra, ket, minimum=SPECTRAL_TERMS)
    levels = np.arange(n)
    phases = np.exp(-2j * params.omega0 * T * (levels + k))
    return fsum_complex(np.conj(coefficient_array(bra.zeta, k, n)) * coefficient_array(ket.zeta, k, n) * phases)


@dataclass(frozen=True)
class PartitionResult:
    beta: float
    z: float  # sum_n exp(-beta E_n), geometric closed form
    z_paper: float  # alternative form exp(-2k omega0 beta) / (1 - exp(-2k omega0 beta))
    z_nonrel: float  # sum_n exp(-beta omega0 (2n + d + 1))
    ratio: float  # z / z_nonrel = exp(-beta omega0 (2k - d - 1))
    ratio_paper: float  # alternative beta-free relation exp(-2 omega0 (alpha + nu - d - 1))

    @property
    def paper_discrepancy(self) -> float:
        return self.z_paper - self.z


def partition_function(beta: float, params: ModelParams) -> PartitionResult:
    """Z(beta) = exp(-2k omega0 beta) / (1 - exp(-2 omega0 beta)), beta in units of 1/mc^2."""
    if not beta > 0:
        raise ValidationError(f"partition_function: beta must be positive, got {beta}")
    sp = derive_spectral(params)
    x = params.omega0 * beta
    z = math.exp(-2 * sp.k * x) / -math.expm1(-2 * x)
    z_paper = math.exp(-2 * sp.k * x) / -math.expm1(-2 * sp.k * x)
    z_nonrel = math.exp(-x * (sp.d + 1)) / -math.expm1(-2 * x)
    return PartitionResult(
        beta=beta,
        z=z,
        z_paper=z_paper,
        z_nonrel=z_nonrel,
        ratio=z / z_nonrel,
        ratio_paper=math.exp(-2 * params.omega0 * (2 * sp.k - sp.d - 1)),
    )


def partition_direct_sum(beta: float, params: ModelParams, n_terms: int = 200) -> float:
    """sum_{n < n_terms} exp(-beta E_n)."""
    if not beta > 0:
        raise ValidationError(f"partition_direct_sum: beta must be positive, got {beta}")
    k = _k(params)
    n = np.arange(n_terms)
    return math.fsum(np.exp(-beta * params.omega0 * (2 * n + 2 * k)))
