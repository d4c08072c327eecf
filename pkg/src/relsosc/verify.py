"""One check per acceptance property, shared by the test-suite and ``verify-all``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import coherent, model, pathint, su11
from .model import ModelParams

DEFAULT_PARAMS = ModelParams(0.5, 1.0)
REGIME_PARAMS = (ModelParams(0.5, 0.1), ModelParams(0.5, 0.125 * 4), ModelParams(0.5, 1.0))
PATH_LABELS = (0.3 + 0.1j, -0.2 + 0.25j)  # (final, initial)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: float
    tol: float
    elapsed: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: measured {self.measured:.3e} (tol {self.tol:.1e}, {self.elapsed:.2f} s)"


def _random_labels(rng, size: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def check_orthonormality(params=None) -> CheckResult:
    devs = {f"({p.omega0}, {p.g0})": float(np.abs(model.gram_matrix(10, p) - np.eye(11)).max()) for p in REGIME_PARAMS}
    worst = max(devs.values())
    return CheckResult(1, "orthonormality", worst < 1e-8, worst, 1e-8, detail=devs)


def check_eigen_residual(params=None) -> CheckResult:
    rho = np.linspace(0.1, 10.0, 50)
    sets = REGIME_PARAMS if params is None else (params,)
    worst = max(model.eigen_residual(n, rho, p) for p in sets for n in range(9))
    return CheckResult(2, "eigen-equation residual", worst < 1e-9, worst, 1e-9)


def check_algebra(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    gens = su11.build_generators(p, 64)
    rep = su11.check_commutators(*gens)
    k = model.derive_spectral(p).k
    cas = su11.casimir(*gens)[:63, :63]
    cas_dev = float(np.abs(cas - k * (k - 1) * np.eye(63)).max())
    worst = max(rep.interior_max, cas_dev)
    return CheckResult(3, "commutators and Casimir", worst < 1e-12, worst, 1e-12, detail={"edge": rep.edge})


def check_ladder(params=None) -> CheckResult:
    """Projections carry the basis sign -1: A^- psi_n = -k_n f(E_n) psi_(n-1)."""
    p = params or DEFAULT_PARAMS
    worst = 0.0
    for n in range(6):
        up = model.ladder_projection("+", n, p)
        want = -model.ladder_coefficient(n + 1, p) * model.f_at_level(n + 1, p)
        worst = max(worst, abs(up - want) / abs(want))
        if n:
            down = model.ladder_projection("-", n, p)
            want = -model.ladder_coefficient(n, p) * model.f_at_level(n, p)
            worst = max(worst, abs(down - want) / abs(want))
    return CheckResult(4, "ladder actions", worst < 1e-7, worst, 1e-7)


def check_cs_cross_form(params=None) -> CheckResult:
    p = params if params is not None and params.regime == "supercritical" else DEFAULT_PARAMS
    rng = np.random.default_rng(5)
    zetas = _random_labels(rng, 20, 0.7)
    rhos = rng.uniform(0.2, 6.0, 20)
    worst = 0.0
    for z, r in zip(zetas, rhos):
        a = coherent.cs_position_series(z, r, p)
        b = coherent.cs_position_closed(z, r, p)
        worst = max(worst, abs(a - b))
    return CheckResult(5, "coherent-state series vs closed form", worst < 1e-10, worst, 1e-10)


def check_overlap_propagator(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    rng = np.random.default_rng(6)
    bras, kets = _random_labels(rng, 100, 0.9), _random_labels(rng, 100, 0.9)
    worst = 0.0
    variant = 0.0
    for zb, zk in zip(bras, kets):
        worst = max(worst, abs(coherent.overlap(zb, zk, p) - coherent.overlap_spectral(zb, zk, p)))
        for wt in (0.1, 1.0, 5.0):
            T = wt / p.omega0
            spectral = coherent.propagator_spectral(zb, zk, T, p)
            worst = max(worst, abs(coherent.propagator_closed(zb, zk, T, p) - spectral))
            variant = max(variant, abs(coherent.propagator_closed(zb, zk, T, p, paper_form=True) - spectral))
    return CheckResult(6, "overlap and propagator", worst < 1e-10, worst, 1e-10, detail={"paper_form_discrepancy": variant})


def check_completeness(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    m = coherent.completeness_check(p, n_max=10)
    diag = float(np.abs(np.diag(m) - 1).max())
    off = float(np.abs(m - np.diag(np.diag(m))).max())
    ok = diag < 1e-6 and off < 1e-10
    return CheckResult(7, "completeness", ok, max(diag, off), 1e-10, detail={"diagonal": diag, "off_diagonal": off})


def check_partition(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    worst = 0.0
    for wb in (0.5, 1.0, 2.0):
        beta = wb / p.omega0
        z = coherent.partition_function(beta, p).z
        worst = max(worst, abs(z - coherent.partition_direct_sum(beta, p, 200)) / z)
    return CheckResult(8, "partition function", worst < 1e-14, worst, 1e-14)


def kernel_error_order(params: ModelParams, zf: complex, zi: complex) -> float:
    eps = np.array([0.1, 0.05, 0.025]) / params.omega0
    err = [abs(pathint.short_time_kernel(zf, zi, e, params) - coherent.propagator_closed(zf, zi, e, params)) for e in eps]
    return float(np.polyfit(np.log(eps), np.log(err), 1)[0])


def check_path_integral(params=None, seed: int = 0) -> CheckResult:
    p = params or DEFAULT_PARAMS
    zf, zi = PATH_LABELS
    T = 0.2 / p.omega0
    exact = coherent.propagator_closed(zf, zi, T, p)
    order = kernel_error_order(p, zf, zi)
    devs = [abs(pathint.compose_slices(zf, zi, pathint.SlicingConfig(n, T), p).value - exact) for n in (1, 2, 3)]
    mc = pathint.compose_slices(zf, zi, pathint.SlicingConfig(16, T, "monte-carlo", seed=seed), p)
    z_score = abs(mc.value - exact) / mc.error
    ok = abs(order - 2) <= 0.2 and devs[0] > devs[1] > devs[2] and z_score <= 3
    detail = {"kernel_order": order, "deviations": devs, "mc_value": mc.value, "mc_se": mc.error, "mc_z": z_score}
    return CheckResult(9, "path-integral convergence", ok, z_score, 3.0, detail=detail)


def check_classical(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    start = pathint.PhasePoint(1.0, 0.3)
    traj = pathint.integrate_trajectory(start, 5 * pathint.orbit_period(p), 2000, p)
    drift = float(np.abs(traj.tau - start.tau).max())
    lin = float(np.abs(traj.phi - start.phi - 2 * p.omega0 * traj.t).max())
    ok = drift < 1e-9 and lin < 1e-8
    return CheckResult(10, "classical dynamics", ok, max(drift, lin), 1e-9, detail={"tau_drift": drift, "phi_residual": lin})


def check_bohr_sommerfeld(params=None) -> CheckResult:
    p = params or DEFAULT_PARAMS
    k = model.derive_spectral(p).k
    energy_dev = max(abs(pathint.bohr_sommerfeld_energy(n, p) / model.energy(n, p) - 1) for n in range(21))
    action_dev = 0.0
    for n in range(1, 6):
        traj = pathint.integrate_trajectory(pathint.PhasePoint.from_p(n / k), pathint.orbit_period(p), 2000, p)
        action_dev = max(action_dev, abs(pathint.action_integral(traj) - 2 * math.pi * n / k))
    ok = energy_dev < 1e-14 and action_dev < 1e-8
    return CheckResult(11, "Bohr-Sommerfeld", ok, energy_dev, 1e-14, detail={"energy": energy_dev, "action": action_dev})


def check_alpha_nu_sweep(params=None) -> CheckResult:
    omega0 = params.omega0 if params is not None else 1.0
    g_crit = 1 / (8 * omega0**2)
    sweep = model.alpha_nu_sweep(omega0, 0.0, 4 * g_crit, 100)
    below = sweep.g0 < g_crit
    im_below = float(max(np.abs(sweep.alpha[below].imag).max(), np.abs(sweep.nu[below].imag).max()))
    im_above = bool(np.all(sweep.alpha[sweep.g0 > g_crit].imag != 0))
    crit = model.derive_spectral(ModelParams.critical(omega0))
    merge = abs(crit.alpha.real - crit.nu.real)
    ok = im_below == 0 and im_above and merge < 1e-12
    return CheckResult(12, "alpha, nu sweep", ok, merge, 1e-12, detail={"im_below": im_below, "im_above_nonzero": im_above})


def check_nonrel_limit(params=None) -> CheckResult:
    g0 = params.g0 if params is not None else 1.0
    rep = model.nonrel_limit_check(g0)
    orders = rep.alpha_order + rep.energy_order
    worst = max(abs(o - 2) for o in orders)
    detail = {"alpha_order": rep.alpha_order, "energy_order": rep.energy_order}
    return CheckResult(13, "non-relativistic limit", worst <= 0.3, worst, 0.3, detail=detail)


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_orthonormality,
    check_eigen_residual,
    check_algebra,
    check_ladder,
    check_cs_cross_form,
    check_overlap_propagator,
    check_completeness,
    check_partition,
    check_path_integral,
    check_classical,
    check_bohr_sommerfeld,
    check_alpha_nu_sweep,
    check_nonrel_limit,
)


def timed(check: Callable[..., CheckResult], params=None, **kwargs) -> CheckResult:
    start = time.perf_counter()
    result = check(params, **kwargs)
    result.elapsed = time.perf_counter() - start
    return result


def run_all(params: ModelParams | None = None, seed: int = 0) -> list[CheckResult]:
    out = []
    for check in CHECKS:
        kwargs = {"seed": seed} if check is check_path_integral else {}
        out.append(timed(check, params, **kwargs))
    return out
