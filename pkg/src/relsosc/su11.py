"""Truncated matrix realization of the SU(1,1) generators in the energy eigenbasis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import ValidationError
from .model import ModelParams, derive_spectral

DEFAULT_DIM = 64


@dataclass(frozen=True)
class TruncatedOperator:
    entries: np.ndarray
    basis_tag: str = "energy-eigenbasis"

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, TruncatedOperator):
            return TruncatedOperator(self.entries @ other.entries, self.basis_tag)
        return self.entries @ other

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.entries.conj().T, self.basis_tag)


def ladder_coefficients(k: float, dim: int) -> np.ndarray:
    """k_n = sqrt(n (n + 2k - 1)) for n = 0 .. dim-1."""
    n = np.arange(dim, dtype=float)
    return np.sqrt(n * (n + 2 * k - 1))


def build_generators(params: ModelParams, dim: int = DEFAULT_DIM):
    """Return (K0, K+, K-) with K0|n> = (n+k)|n>, K-|n> = k_n|n-1>, K+|n> = k_(n+1)|n+1>."""
    if dim < 3:
        raise ValidationError(f"build_generators: dim must be >= 3, got {dim}")
    k = derive_spectral(params).k
    kn = ladder_coefficients(k, dim)
    k0 = np.diag(np.arange(dim) + k).astype(complex)
    kminus = np.diag(kn[1:], 1).astype(complex)
    kplus = kminus.conj().T.copy()
    return TruncatedOperator(k0), TruncatedOperator(kplus), TruncatedOperator(kminus)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


@dataclass(frozen=True)
class CommutatorReport:
    k0_kplus: float  # || [K0, K+] - K+ || on the interior block
    k0_kminus: float  # || [K0, K-] + K- ||
    kminus_kplus: float  # || [K-, K+] - 2 K0 ||
    k0_k0: float
    edge: float  # largest deviation found in the excluded last row/column

    @property
    def interior_max(self) -> float:
        return max(self.k0_kplus, self.k0_kminus, self.kminus_kplus, self.k0_k0)


def check_commutators(K0: TruncatedOperator, Kplus: TruncatedOperator, Kminus: TruncatedOperator) -> CommutatorReport:
    """Max-norm deviations from [K0, K+-] = +-K+- and [K-, K+] = 2 K0.

    Only indices < dim-1 are asserted; the last row and column, where the
    truncation necessarily breaks the algebra, are reported separately.
    """
    if not (K0.dim == Kplus.dim == Kminus.dim):
        raise ValidationError("check_commutators: operators differ in dimension")
    a, p, m = K0.entries, Kplus.entries, Kminus.entries
    devs = [_comm(a, p) - p, _comm(a, m) + m, _comm(m, p) - 2 * a, _comm(a, a)]
    inner = slice(0, K0.dim - 1)
    interior = [float(np.abs(d[inner, inner]).max()) for d in devs]
    edge = max(float(np.abs(d).max()) for d in devs)
    return CommutatorReport(*interior, edge=edge)


def casimir(K0: TruncatedOperator, Kplus: TruncatedOperator, Kminus: TruncatedOperator) -> np.ndarray:
    """Matrix of K0^2 - (K+K- + K-K+)/2; on interior indices it is k(k-1) times identity."""
    a, p, m = K0.entries, Kplus.entries, Kminus.entries
    return a @ a - 0.5 * (p @ m + m @ p)


def displace_ground_state(beta: complex, params: ModelParams, dim: int = DEFAULT_DIM) -> np.ndarray:
    """exp(beta K+ - conj(beta) K-) |0> in the truncated basis."""
    _, kp, km = build_generators(params, dim)
    gen = beta * kp.entries - np.conj(beta) * km.entries
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    return expm(gen) @ e0


def evolve(vector: np.ndarray, T: float, params: ModelParams) -> np.ndarray:
    """exp(-i T H) vector, with H = 2 omega0 K0 in units of mc^2 and T in hbar/mc^2."""
    k = derive_spectral(params).k
    n = np.arange(len(vector))
    return np.exp(-2j * params.omega0 * T * (n + k)) * vector
