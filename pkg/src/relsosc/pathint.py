"""Time-sliced coherent-state path integral and its classical limit.

Slicing
-------
The propagator over time T is split into N slices of length eps = T/N and each
slice is replaced by the short-time kernel

    <zeta_j|zeta_(j-1)> exp(-i eps H_k(conj(zeta_j), zeta_(j-1))).

With both arguments free, Im H_k is unbounded near the rim of the disc, so for
N >= 3 the integrals over intermediate labels do not converge on the whole
disc. Intermediate labels are therefore restricted to |zeta|^2 <= cutoff. The
restricted resolution of identity is diagonal in the number basis, with
eigenvalues I_n = betainc(n + 1, 2k - 1, cutoff), which makes the same
composition built from the exact one-slice propagator available in closed
form. Both estimators below use that exact composition as a control variate
on the same nodes, and the control cancels most of the discretisation noise.

Classical limit
---------------
The disc carries the symplectic structure of the Lobachevsky plane. In the
group coordinates zeta = -tanh(tau/2) exp(-i phi) the Lagrangian separates and
the canonical pair is (phi, p = cosh(tau) - 1).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special
from scipy.integrate import simpson, solve_ivp

from .coherent import (
    CSLabel,
    _as_label,
    _hk_values,
    _joint_terms,
    _k,
    _overlap_values,
    coefficient_array,
)
from .exceptions import ConvergenceError, NumericalError, ValidationError
from .model import ModelParams, derive_spectral
from .numerics import fsum_complex

SCHEMES = ("deterministic", "monte-carlo")
DETERMINISTIC_MAX_N = 3
DEFAULT_CUTOFF = 0.95
PB_STEP = 1e-6
ODE_RTOL = 1e-12
ODE_ATOL = 1e-12
_BLOCK = 2048


# ---------------------------------------------------------------------------
# Phase space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """Point (tau, phi) of the classical phase space; p = cosh(tau) - 1."""

    tau: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValidationError(f"PhasePoint: tau must be finite and >= 0, got {self.tau}")
        if not math.isfinite(self.phi):
            raise ValidationError(f"PhasePoint: phi must be finite, got {self.phi}")

    @classmethod
    def from_p(cls, p: float, phi: float = 0.0) -> "PhasePoint":
        if not p >= 0:
            raise ValidationError(f"PhasePoint: p must be >= 0, got {p}")
        return cls(math.acosh(1.0 + p), phi)

    @classmethod
    def from_label(cls, label) -> "PhasePoint":
        label = _as_label(label)
        return cls(label.tau, label.phi)

    @property
    def p(self) -> float:
        # cosh(tau) - 1 without cancellation at small tau
        return 2.0 * math.sinh(self.tau / 2) ** 2

    def to_label(self) -> CSLabel:
        return CSLabel.from_group(self.tau, self.phi)


# ---------------------------------------------------------------------------
# Slicing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlicingConfig:
    """Discretisation of exp(-i T H) into N slices.

    ``cutoff`` bounds |zeta|^2 for intermediate labels. The deterministic
    scheme uses Gauss-Legendre rings in |zeta|^2 with about
    ``ring_density / (1 - |zeta|^2)`` angular nodes per ring. Its error
    estimate compares this rule with one at two thirds of the resolution.
    The Monte-Carlo scheme runs ``chains`` independent chains with
    ``samples`` labels per slice.
    """

    N: int
    T: float
    scheme: str = "deterministic"
    seed: int = 0
    chains: int = 24
    samples: int = 384
    cutoff: float = DEFAULT_CUTOFF
    n_radial: int = 60
    ring_density: float = 12.0
    tol: float = 1e-3
    max_standard_error: float | None = None
    control_variate: bool = True
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"SlicingConfig: N must be an integer >= 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValidationError(f"SlicingConfig: T must be finite and > 0, got {self.T}")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"SlicingConfig: scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.scheme == "deterministic" and self.N > DETERMINISTIC_MAX_N:
            raise ValidationError(
                f"SlicingConfig: deterministic scheme supports N <= {DETERMINISTIC_MAX_N}, got N={self.N}"
            )
        if not 0 < self.cutoff < 1:
            raise ValidationError(f"SlicingConfig: cutoff must lie in (0, 1), got {self.cutoff}")
        if self.chains < 2 or self.samples < 1:
            raise ValidationError("SlicingConfig: need chains >= 2 and samples >= 1")
        if self.n_radial < 3 or self.ring_density <= 0:
            raise ValidationError("SlicingConfig: need n_radial >= 3 and ring_density > 0")
        if self.workers < 1:
            raise ValidationError(f"SlicingConfig: workers must be >= 1, got {self.workers}")

    @property
    def epsilon(self) -> float:
        return self.T / self.N


class SliceResult(NamedTuple):
    value: complex
    error: float  # quadrature error estimate or Monte-Carlo standard error
    scheme: str
    N: int
    control: complex  # exact composition under the same cutoff, nan for N = 1


def short_time_kernel(label_j, label_jm1, epsilon: float, params: ModelParams) -> complex:
    """<zeta_j|zeta_(j-1)> exp(-i eps H_k(conj(zeta_j), zeta_(j-1)))."""
    a, b = _as_label(label_j), _as_label(label_jm1)
    k = _k(params)
    return complex(_overlap_values(a.zeta, b.zeta, k) * np.exp(-1j * epsilon * _hk_values(a.zeta, b.zeta, k, params.omega0)))


def _slice_matrices(bra, ket, eps: float, k: float, omega0: float):
    """Short-time kernel and exact one-slice propagator on all (bra, ket) pairs."""
    w = np.conj(bra) * ket
    base = k * (np.log1p(-np.abs(bra) ** 2) + np.log1p(-np.abs(ket) ** 2))
    log_ov = base - 2 * k * np.log(1 - w)
    approx = np.exp(log_ov - 2j * eps * k * omega0 * (1 + w) / (1 - w))
    exact = np.exp(base - 2j * omega0 * k * eps - 2 * k * np.log(1 - w * np.exp(-2j * omega0 * eps)))
    return approx, exact


def truncated_composition(bra, ket, T: float, N: int, cutoff: float, params: ModelParams) -> complex:
    """Exact one-slice propagators composed N times through the restricted disc.

    sum_n conj(c_n(zeta')) c_n(zeta) exp(-i E_n T) I_n^(N-1), I_n = betainc(n+1, 2k-1, cutoff).
    """
    bra, ket = _as_label(bra), _as_label(ket)
    k = _k(params)
    n_terms = _joint_terms(k, bra, ket, minimum=256)
    n = np.arange(n_terms)
    kept = special.betainc(n + 1.0, 2 * k - 1.0, cutoff) ** (N - 1)
    phases = np.exp(-2j * params.omega0 * T * (n + k))
    return fsum_complex(
        np.conj(coefficient_array(bra.zeta, k, n_terms)) * coefficient_array(ket.zeta, k, n_terms) * phases * kept
    )


def _ring_rule(cutoff: float, n_radial: int, ring_density: float, k: float):
    """Nodes and d mu_k weights on |zeta|^2 <= cutoff, rings refined toward the edge."""
    x, w = np.polynomial.legendre.leggauss(n_radial)
    u = 0.5 * cutoff * (x + 1)
    wu = 0.5 * cutoff * w
    nodes, weights = [], []
    for ui, wi in zip(u, wu):
        na = int(max(16, 8 * math.ceil(ring_density / (1 - ui) / 8)))
        phase = np.exp(2j * np.pi * (np.arange(na) + 0.5) / na)
        nodes.append(math.sqrt(ui) * phase)
        weights.append(np.full(na, wi * (2 * k - 1) / ((1 - ui) ** 2 * na)))
    return np.concatenate(nodes), np.concatenate(weights)


def _quadrature_pair(zf: complex, zi: complex, N: int, eps: float, k: float, omega0: float, rule):
    """(short-time, exact) compositions for N = 2, 3 on one node set."""
    z, wt = rule
    left_a, left_x = _slice_matrices(zf, z, eps, k, omega0)
    right_a, right_x = _slice_matrices(z, zi, eps, k, omega0)
    left_a, left_x = left_a * wt, left_x * wt
    if N == 2:
        return left_a @ right_a, left_x @ right_x
    right_a, right_x = right_a * wt, right_x * wt
    tot_a = tot_x = 0j
    for s in range(0, len(z), _BLOCK):
        mid_a, mid_x = _slice_matrices(z[s:s + _BLOCK, None], z[None, :], eps, k, omega0)
        tot_a += left_a[s:s + _BLOCK] @ (mid_a @ right_a)
        tot_x += left_x[s:s + _BLOCK] @ (mid_x @ right_x)
    return tot_a, tot_x


def _deterministic(zf, zi, config: SlicingConfig, params: ModelParams, control: complex):
    k, omega0, eps = _k(params), params.omega0, config.epsilon
    values = []
    for scale in (1.0, 2.0 / 3.0):
        rule = _ring_rule(config.cutoff, max(3, round(config.n_radial * scale)), config.ring_density * scale, k)
        approx, exact = _quadrature_pair(zf, zi, config.N, eps, k, omega0, rule)
        values.append(approx - exact + control if config.control_variate else approx)
    err = abs(values[0] - values[1])
    if not err <= config.tol:
        raise ConvergenceError(
            f"compose_slices: quadrature error estimate {err:.3e} exceeds tol {config.tol:.1e} "
            f"(N={config.N}, cutoff={config.cutoff})"
        )
    return complex(values[0]), float(err)


def _sample_labels(rng, centres: np.ndarray, size: int, two_k_minus_1: float) -> np.ndarray:
    """Draw from the equal mixture of |<zeta|c>|^2 d mu_k over the centres."""
    c = centres[rng.integers(len(centres), size=size)]
    u = -np.expm1(np.log1p(-rng.random(size)) / two_k_minus_1)
    w = np.sqrt(u) * np.exp(2j * np.pi * rng.random(size))
    return (w + c) / (1 + np.conj(c) * w)


def _mc_chain(args) -> tuple[complex, complex]:
    zf, zi, N, eps, k, omega0, cutoff, samples, seed, chain = args
    rng = np.random.default_rng([seed, chain])
    prev = np.array([zi])
    va = vx = np.ones(1, dtype=complex)
    for _ in range(N - 1):
        live = prev[np.abs(prev) ** 2 <= cutoff]
        if live.size == 0:
            return 0j, 0j
        z = _sample_labels(rng, live, samples, 2 * k - 1)
        dens = (np.abs(_overlap_values(z[:, None], live[None, :], k)) ** 2).mean(axis=1)
        weight = np.where(np.abs(z) ** 2 <= cutoff, 1.0 / (samples * dens), 0.0)
        ka, kx = _slice_matrices(z[:, None], prev[None, :], eps, k, omega0)
        va = (ka @ va) * weight
        vx = (kx @ vx) * weight
        prev = z
    ka, kx = _slice_matrices(zf, prev, eps, k, omega0)
    return complex(ka @ va), complex(kx @ vx)


def _monte_carlo(zf, zi, config: SlicingConfig, params: ModelParams, control: complex):
    k = _k(params)
    jobs = [
        (zf, zi, config.N, config.epsilon, k, params.omega0, config.cutoff, config.samples, config.seed, c)
        for c in range(config.chains)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            pairs = list(pool.map(_mc_chain, jobs))
    else:
        pairs = [_mc_chain(j) for j in jobs]
    pairs = np.array(pairs)
    est = pairs[:, 0] - pairs[:, 1] + control if config.control_variate else pairs[:, 0]
    if not np.all(np.isfinite(est)):
        raise NumericalError("compose_slices: non-finite Monte-Carlo chain value")
    se = math.sqrt((np.var(est.real, ddof=1) + np.var(est.imag, ddof=1)) / len(est))
    if config.max_standard_error is not None and se > config.max_standard_error:
        raise ConvergenceError(
            f"compose_slices: standard error {se:.3e} exceeds budget {config.max_standard_error:.1e} "
            f"(N={config.N}, chains={config.chains}, samples={config.samples})"
        )
    return complex(est.mean()), se


def compose_slices(label_final, label_initial, config: SlicingConfig, params: ModelParams) -> SliceResult:
    """N-fold composition of short-time kernels against the coherent-state measure."""
    zf, zi = _as_label(label_final).zeta, _as_label(label_initial).zeta
    if config.N == 1:
        return SliceResult(short_time_kernel(zf, zi, config.T, params), 0.0, config.scheme, 1, complex("nan"))
    control = truncated_composition(zf, zi, config.T, config.N, config.cutoff, params)
    run = _deterministic if config.scheme == "deterministic" else _monte_carlo
    value, err = run(zf, zi, config, params, control)
    return SliceResult(value, err, config.scheme, config.N, control)


# ---------------------------------------------------------------------------
# Classical dynamics
# ---------------------------------------------------------------------------

def hamiltonian_function(label, params: ModelParams) -> float:
    """H_k(conj(zeta), zeta) = 2 k omega0 cosh(tau)."""
    label = _as_label(label)
    return float(_hk_values(label.zeta, label.zeta, _k(params), params.omega0).real)


def lagrangian(label, zeta_dot: complex, params: ModelParams) -> float:
    """i k (conj(zeta) zeta_dot - zeta conj(zeta_dot)) / (1 - |zeta|^2) - H_k."""
    z = _as_label(label).zeta
    k = _k(params)
    kinetic = 1j * k * (z.conjugate() * zeta_dot - z * complex(zeta_dot).conjugate()) / (1 - abs(z) ** 2)
    return float(kinetic.real) - hamiltonian_function(z, params)


def lagrangian_tau_phi(tau: float, phi_dot: float, params: ModelParams) -> float:
    """k [(cosh(tau) - 1) phi_dot - 2 omega0 cosh(tau)]."""
    k = _k(params)
    return k * ((math.cosh(tau) - 1) * phi_dot - 2 * params.omega0 * math.cosh(tau))


def _wirtinger(f: Callable, z: complex, h: float) -> tuple[complex, complex]:
    dx = (f(z + h) - f(z - h)) / (2 * h)
    dy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def poisson_bracket(A: Callable, B: Callable, label, params: ModelParams, h: float = PB_STEP):
    """(1-|zeta|^2)^2 / (2ik) (dA/dzeta dB/dzeta* - dA/dzeta* dB/dzeta).

    A and B take a complex zeta. Derivatives are central differences along
    the real and imaginary axes. The result is a float when A and B are
    real-valued at the point, complex otherwise.
    """
    z = _as_label(label).zeta
    if abs(z) + h >= 1:
        raise NumericalError(f"poisson_bracket: stencil of width {h} leaves the disc at |zeta|={abs(z)}")
    k = _k(params)
    a_z, a_zb = _wirtinger(A, z, h)
    b_z, b_zb = _wirtinger(B, z, h)
    val = (1 - abs(z) ** 2) ** 2 / (2j * k) * (a_z * b_zb - a_zb * b_z)
    if np.isrealobj(A(z)) and np.isrealobj(B(z)):
        return float(val.real)
    return complex(val)


def hamilton_rhs(label, params: ModelParams) -> complex:
    """zeta_dot = (1-|zeta|^2)^2 / (2ik) dH_k/dzeta*, with the gradient taken analytically."""
    z = _as_label(label).zeta
    k = _k(params)
    dh_dzb = 4 * k * params.omega0 * z / (1 - abs(z) ** 2) ** 2
    return (1 - abs(z) ** 2) ** 2 / (2j * k) * dh_dzb


class Trajectory(NamedTuple):
    t: np.ndarray
    tau: np.ndarray
    phi: np.ndarray  # unwrapped; nan at the fixed point tau = 0
    zeta: np.ndarray
    energy: np.ndarray


def integrate_trajectory(
    initial: PhasePoint, T: float, steps: int, params: ModelParams, rtol: float = ODE_RTOL, atol: float = ODE_ATOL
) -> Trajectory:
    """Integrate the Hamilton equations in (tau, phi) and sample at steps + 1 equispaced times.

    The velocity field is the zeta-space one, mapped by
    tau_dot = sinh(tau) Re(zeta_dot / zeta) and phi_dot = -Im(zeta_dot / zeta).
    """
    if not (math.isfinite(T) and T > 0) or steps < 1:
        raise ValidationError(f"integrate_trajectory: need T > 0 and steps >= 1, got T={T}, steps={steps}")
    t = np.linspace(0.0, T, steps + 1)
    k = _k(params)
    if initial.tau == 0:
        zeros = np.zeros_like(t)
        return Trajectory(t, zeros, np.full_like(t, np.nan), zeros.astype(complex), np.full_like(t, 2 * k * params.omega0))

    def rhs(_t, y):
        tau, phi = y
        z = CSLabel.from_group(tau, phi).zeta
        ratio = hamilton_rhs(z, params) / z
        return [math.sinh(tau) * ratio.real, -ratio.imag]

    sol = solve_ivp(rhs, (0.0, T), [initial.tau, initial.phi], method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise ConvergenceError(f"integrate_trajectory: integrator failed ({sol.message}) from {initial}, T={T}")
    tau, phi = sol.y
    zeta = -np.tanh(tau / 2) * np.exp(-1j * phi)
    return Trajectory(sol.t, tau, phi, zeta, 2 * k * params.omega0 * np.cosh(tau))


def orbit_period(params: ModelParams) -> float:
    """Period pi / omega0 of phi, which advances at rate 2 omega0."""
    return math.pi / params.omega0


def action_integral(trajectory: Trajectory) -> float:
    """Integral of p d phi along the samples (Simpson in phi)."""
    if np.isnan(trajectory.phi).any():
        return 0.0
    p = 2.0 * np.sinh(trajectory.tau / 2) ** 2
    return float(simpson(p, x=trajectory.phi))


def bohr_sommerfeld_energy(n: int, params: ModelParams) -> float:
    """E = 2 omega0 k (p + 1) at the quantised momentum p = n / k."""
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValidationError(f"bohr_sommerfeld_energy: n must be a nonnegative integer, got {n}")
    k = _k(params)
    p = n / k
    return 2 * params.omega0 * k * (p + 1)


def quasiclassical_parameter(g0: float, omegas) -> np.ndarray:
    """k = (alpha + nu)/2 along a sweep of omega0 at fixed g0."""
    return np.array([derive_spectral(ModelParams(float(w), g0)).k for w in omegas])
