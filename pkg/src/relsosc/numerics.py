"""Complex special functions and quadrature primitives.

Everything here works on Python scalars or NumPy arrays (broadcasting), and is
a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .exceptions import ConvergenceError, PoleError, ValidationError

POLE_ATOL = 1e-14
SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 1_000_000


def _is_scalar(*args) -> bool:
    return all(np.ndim(a) == 0 for a in args)


def _unwrap(x, scalar: bool):
    return complex(x) if scalar else x


def _on_pole(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    re = z.real
    return (np.abs(z.imag) <= POLE_ATOL) & (re <= POLE_ATOL) & (np.abs(re - np.round(re)) <= POLE_ATOL)


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex values (real and imaginary parts separately)."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

def log_gamma_complex(z):
    """Principal branch of log Gamma(z) for complex ``z``.

    Raises
    ------
    PoleError
        If ``z`` is within 1e-14 of a nonpositive integer.
    """
    scalar = _is_scalar(z)
    z = np.asarray(z, dtype=complex)
    if np.any(_on_pole(z)):
        bad = z[_on_pole(z)] if z.ndim else z
        raise PoleError(f"log_gamma_complex: Gamma has a pole at z={np.ravel(bad)[0]}")
    return _unwrap(special.loggamma(z), scalar)


def pochhammer(a, n: int):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1), by direct product."""
    if n < 0:
        raise ValidationError(f"pochhammer: n must be nonnegative, got {n}")
    result = np.ones_like(np.asarray(a), dtype=np.result_type(a, 1.0))
    for j in range(n):
        result = result * (a + j)
    return result[()] if np.ndim(result) == 0 else result


def gamma_ratio(a, b):
    """Gamma(a) / Gamma(b) via log-gamma differences.

    Points where ``b`` is a pole (and ``a`` is not) give 0.
    """
    scalar = _is_scalar(a, b)
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    if np.any(_on_pole(a)):
        raise PoleError("gamma_ratio: numerator Gamma has a pole")
    zero = _on_pole(b)
    b_safe = np.where(zero, 0.5, b)
    out = np.exp(special.loggamma(a) - special.loggamma(b_safe))
    out = np.where(zero, 0.0, out)
    return _unwrap(out, scalar)


def generalized_degree(rho, delta):
    """Finite-difference power rho^(delta) = i^delta Gamma(delta - i rho) / Gamma(-i rho).

    For integer ``delta`` the ratio is the exact product (-i rho)_delta, which
    also covers rho = 0 (where the reciprocal gamma vanishes). The phase
    i^delta is taken on the principal branch, exp(i pi delta / 2).
    """
    scalar = _is_scalar(rho, delta)
    rho = np.asarray(rho, dtype=complex)
    z = -1j * rho
    if np.ndim(delta) == 0 and float(np.imag(delta)) == 0.0 and float(np.real(delta)).is_integer():
        m = int(np.real(delta))
        phase = 1j ** (m % 4)
        if m >= 0:
            out = phase * pochhammer(z, m)
        else:
            denom = pochhammer(z + m, -m)
            if np.any(denom == 0):
                raise PoleError(f"generalized_degree: Gamma(delta - i rho) pole at delta={delta}")
            out = phase / denom
        out = np.asarray(out, dtype=complex)
    else:
        delta = np.asarray(delta, dtype=complex)
        out = np.exp(1j * np.pi * delta / 2) * gamma_ratio(delta + z, z)
    return _unwrap(out, scalar)


# ---------------------------------------------------------------------------
# Hypergeometric series
# ---------------------------------------------------------------------------

def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b; c; z) by its power series, |z| < 1.

    Summation stops once |term| / |partial sum| < 1e-16 for three consecutive
    terms. Accuracy degrades as |z| -> 1 because the number of terms grows like
    1/(1 - |z|). The term recurrence multiplies (a+j)(b+j) as a single product,
    so the result is exactly symmetric in a and b.
    """
    scalar = _is_scalar(a, b, c, z)
    a, b, c, z = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, z)))
    if np.any(np.abs(z) >= 1):
        raise ValidationError("gauss_2f1: series requires |z| < 1")
    if np.any(_on_pole(c)):
        raise ValidationError("gauss_2f1: c must not be a nonpositive integer")
    term = np.ones(a.shape, dtype=complex)
    total = term.copy()
    quiet = np.zeros(a.shape, dtype=int)
    for j in range(SERIES_MAX_TERMS):
        ab = (a + j) * (b + j)
        term = term * ab / ((c + j) * (j + 1)) * z
        total = total + term
        mag = np.abs(total)
        small = np.abs(term) <= SERIES_RTOL * np.where(mag > 0, mag, 1.0)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= 3):
            return _unwrap(total, scalar)
    raise ConvergenceError(f"gauss_2f1: no convergence after {SERIES_MAX_TERMS} terms")


def cdh_polynomial(n: int, x2, a, b, c):
    """Continuous dual Hahn polynomial S_n(x^2; a, b, c).

    Uses the terminating sum

        S_n = sum_j (-n)_j / j! * prod_{l<j} ((a+l)^2 + x^2) * (a+b+j)_{n-j} (a+c+j)_{n-j},

    which is (a+b)_n (a+c)_n 3F2(-n, a+ix, a-ix; a+b, a+c; 1) with the
    denominators cleared, so it depends on x only through x^2.
    """
    if n < 0:
        raise ValidationError(f"cdh_polynomial: n must be nonnegative, got {n}")
    scalar = _is_scalar(x2, a, b, c)
    x2 = np.asarray(x2, dtype=complex)
    total = np.zeros(np.broadcast(x2, np.asarray(a), np.asarray(b), np.asarray(c)).shape, dtype=complex)
    upper = np.ones_like(total)  # prod_{l<j} ((a+l)^2 + x^2)
    coef = 1.0  # (-n)_j / j!
    for j in range(n + 1):
        total = total + coef * upper * pochhammer(a + b + j, n - j) * pochhammer(a + c + j, n - j)
        upper = upper * ((a + j) ** 2 + x2)
        coef = coef * (-n + j) / (j + 1)
    return _unwrap(total, scalar)


def cdh_orthonormal_sequence(n_max: int, x2, a, b, c) -> np.ndarray:
    """s_n = S_n(x^2; a,b,c) / sqrt(n! (a+b)_n (a+c)_n (b+c)_n) for n = 0 .. n_max.

    Stacked along a new leading axis. Computed from the symmetric three-term
    recurrence

        d_n s_(n+1) = (A_n + C_n - a^2 - x^2) s_n - d_(n-1) s_(n-1),
        A_n = (n+a+b)(n+a+c),  C_n = n(n+b+c-1),
        d_n = sqrt((n+1)(n+a+b)(n+a+c)(n+b+c)),

    which stays accurate (and finite) for large n, where the alternating
    explicit sum in ``cdh_polynomial`` cancels catastrophically.
    """
    if n_max < 0:
        raise ValidationError(f"cdh_orthonormal_sequence: n_max must be nonnegative, got {n_max}")
    x2 = np.asarray(x2, dtype=complex)
    shape = np.broadcast(x2, np.asarray(a), np.asarray(b), np.asarray(c)).shape
    out = np.empty((n_max + 1,) + shape, dtype=complex)
    out[0] = 1.0
    base = a**2 + x2

    def d(n):
        return np.sqrt(complex((n + 1) * (n + a + b) * (n + a + c) * (n + b + c)))

    prev_d = 0.0
    for n in range(n_max):
        b_n = (n + a + b) * (n + a + c) + n * (n + b + c - 1) - base
        d_n = d(n)
        lower = prev_d * out[n - 1] if n > 0 else 0.0
        out[n + 1] = (b_n * out[n] - lower) / d_n
        prev_d = d_n
    return out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Fixed nodes and positive weights; ``integrate`` uses compensated summation."""

    nodes: np.ndarray
    weights: np.ndarray
    domain_tag: str

    def __post_init__(self):
        if self.domain_tag not in ("semi-infinite", "unit-disc-radial", "finite-interval"):
            raise ValidationError(f"unknown domain_tag {self.domain_tag!r}")
        if np.any(self.weights <= 0):
            raise ValidationError("quadrature weights must be positive")

    def integrate(self, values) -> complex:
        return fsum_complex(np.asarray(values) * self.weights)

    def __call__(self, f: Callable) -> complex:
        return self.integrate(f(self.nodes))


def _panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = (hi - lo) / 2
    return (lo + half * (x + 1)).ravel(), (half * w).ravel()


def finite_interval_rule(a: float, b: float, order: int = 20, panels: int = 1) -> QuadratureRule:
    nodes, weights = _panel_rule(np.linspace(a, b, panels + 1), order)
    return QuadratureRule(nodes, weights, "finite-interval")


def _find_cutoff(f: Callable, order: int, width: float, decay: float, max_length: float) -> float:
    """Smallest panel edge R beyond which a whole panel has |f| < decay * max|f|."""
    peak = 0.0
    start = 0.0
    batch = 8
    while start < max_length:
        edges = start + width * np.arange(batch + 1)
        nodes, _ = _panel_rule(edges, order)
        vals = np.abs(np.asarray(f(nodes))).reshape(batch, order).max(axis=1)
        for i, v in enumerate(vals):
            peak = max(peak, v)
            if peak > 0 and v < decay * peak:
                return float(edges[i + 1])
        start = float(edges[-1])
    raise ConvergenceError(f"semi_infinite_quadrature: integrand not decayed by rho={max_length}")


def semi_infinite_rule(
    envelope: Callable,
    order: int = 20,
    width: float = 1.0,
    decay: float = 1e-18,
    max_length: float = 2000.0,
) -> QuadratureRule:
    """Composite Gauss-Legendre rule on [0, R] with R set by ``envelope`` decay.

    Panels have the given width; the first node is strictly positive. ``R`` is
    the first panel edge past which the envelope drops below ``decay`` times
    its running maximum over a whole panel.
    """
    cutoff = _find_cutoff(envelope, order, width, decay, max_length)
    n_panels = int(round(cutoff / width))
    nodes, weights = _panel_rule(width * np.arange(n_panels + 1), order)
    return QuadratureRule(nodes, weights, "semi-infinite")


def semi_infinite_quadrature(f: Callable, tol: float = 1e-10, order: int = 20, max_refine: int = 4) -> complex:
    """Integral of ``f`` over [0, inf) for exponentially decaying integrands.

    The error is estimated by comparing Gauss-Legendre panels of ``order`` and
    ``order + 10`` nodes; panels are halved until the estimate drops below
    ``tol``.
    """
    width = 1.0
    cutoff = _find_cutoff(f, order, width, 1e-18, 2000.0)
    prev_err = math.inf
    for _ in range(max_refine + 1):
        edges = np.arange(0.0, cutoff + width / 2, width)
        lo_nodes, lo_w = _panel_rule(edges, order)
        lo = fsum_complex(np.asarray(f(lo_nodes)) * lo_w)
        hi_nodes, hi_w = _panel_rule(edges, order + 10)
        hi = fsum_complex(np.asarray(f(hi_nodes)) * hi_w)
        err = abs(hi - lo)
        if err < tol:
            return hi
        if err >= prev_err:
            break
        prev_err = err
        width /= 2
    raise ConvergenceError(f"semi_infinite_quadrature: error estimate {err:.3g} stagnates above tol={tol:.3g}")


def radial_rule(rim_exponent: float, n_radial: int, method: str = "jacobi") -> QuadratureRule:
    """Rule for integrals over u = |zeta|^2 in (0, 1) of g(u) (1-u)^rim_exponent.

    The returned weights already carry the factor (1-u)^rim_exponent, so
    ``rule.integrate(g(u))`` approximates the weighted integral. ``method``
    selects Gauss-Jacobi (weight built in) or plain Gauss-Legendre in u.
    """
    if rim_exponent <= -1:
        raise ValidationError("radial_rule: rim exponent must exceed -1")
    if method == "jacobi":
        x, w = special.roots_jacobi(n_radial, rim_exponent, 0.0)
        u = (1 + x) / 2
        weights = w * 2.0 ** (-rim_exponent - 1)
    elif method == "legendre":
        x, w = np.polynomial.legendre.leggauss(n_radial)
        u = (1 + x) / 2
        weights = w / 2 * (1 - u) ** rim_exponent
    else:
        raise ValidationError(f"radial_rule: unknown method {method!r}")
    return QuadratureRule(np.asarray(u), np.asarray(weights), "unit-disc-radial")


@dataclass(frozen=True)
class DiscRule:
    """Product rule on the open unit disc: sum(weights * F(zeta)) ~ integral of F d^2 zeta / pi."""

    zeta: np.ndarray
    weights: np.ndarray
    rim_exponent: float

    def integrate(self, values) -> complex:
        return fsum_complex(np.asarray(values) * self.weights)


def disc_rule(rim_exponent: float, n_radial: int = 40, n_angular: int = 48, method: str = "jacobi") -> DiscRule:
    """Polar product rule for integrals over the unit disc.

    Intended for integrands F(zeta) = (1 - |zeta|^2)^rim_exponent * G(zeta) with G
    smooth up to the rim. Weights are normalised against d^2 zeta / pi and have
    the rim factor divided out, so callers pass the full integrand F.
    """
    radial = radial_rule(rim_exponent, n_radial, method)
    phi = 2 * np.pi * np.arange(n_angular) / n_angular
    u = radial.nodes[:, None]
    zeta = (np.sqrt(u) * np.exp(1j * phi[None, :])).ravel()
    # d^2 zeta / pi = du dphi / (2 pi)
    w = (radial.weights[:, None] / (1 - u) ** rim_exponent / n_angular) * np.ones_like(phi)[None, :]
    return DiscRule(zeta, w.ravel(), rim_exponent)
