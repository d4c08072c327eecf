import math

import mpmath
import numpy as np
import pytest

from relsosc import model
from relsosc.exceptions import NumericalError, ValidationError
from relsosc.model import ModelParams

mpmath.mp.dps = 40


def _alpha_nu_mpmath(w, g):
    w, g = mpmath.mpf(w), mpmath.mpf(g)
    root = mpmath.sqrt(1 - 8 * g * w**2)
    alpha = mpmath.mpf(1) / 2 + mpmath.sqrt(1 + 2 / w**2 * (1 - root)) / 2
    nu = mpmath.mpf(1) / 2 + mpmath.sqrt(1 + 2 / w**2 * (1 + root)) / 2
    return complex(alpha), complex(nu)


def test_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(0.0, 1.0)
    with pytest.raises(ValidationError):
        ModelParams(0.5, float("nan"))


def test_regimes():
    assert ModelParams(0.5, 0.1).regime == "subcritical"
    assert ModelParams.critical(0.5).regime == "critical"
    assert ModelParams(0.5, 1.0).regime == "supercritical"


def test_alpha_nu_trivial_point():
    sp = model.derive_spectral(ModelParams(1.0, 0.0))
    assert sp.alpha == pytest.approx(1.0, abs=1e-15)
    assert sp.nu == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)


def test_alpha_nu_critical_point():
    w = 0.7
    sp = model.derive_spectral(ModelParams.critical(w))
    want = 0.5 + 0.5 * math.sqrt(1 + 2 / w**2)
    assert sp.alpha == sp.nu
    assert sp.alpha == pytest.approx(want, abs=1e-14)


def test_alpha_nu_closed_values():
    # 9 -+ 4 sqrt 2 are perfect squares, so alpha = sqrt 2 and nu = 1 + sqrt 2
    sp = model.derive_spectral(ModelParams(0.5, 0.25))
    assert abs(sp.alpha - math.sqrt(2)) < 1e-14
    assert abs(sp.nu - (1 + math.sqrt(2))) < 1e-14


@pytest.mark.parametrize("w,g", [(0.5, 0.25), (1e-3, 1.0), (0.2, 0.9), (1.3, 0.02)])
def test_alpha_nu_match_high_precision(w, g):
    sp = model.derive_spectral(ModelParams(w, g))
    alpha, nu = _alpha_nu_mpmath(w, g)
    assert abs(sp.alpha - alpha) < 1e-13 * abs(alpha)
    assert abs(sp.nu - nu) < 1e-13 * abs(nu)


def test_alpha_small_omega_frozen():
    sp = model.derive_spectral(ModelParams(1e-3, 1.0))
    assert sp.alpha.real == pytest.approx(2.000001333338074, rel=1e-14)
    assert sp.d == 1.5


def test_supercritical_pair_is_conjugate():
    sp = model.derive_spectral(ModelParams(1.0, 0.5))
    assert sp.alpha.imag != 0
    assert sp.nu == sp.alpha.conjugate()
    energies = model.energy(np.arange(5), ModelParams(1.0, 0.5))
    assert energies.dtype == float


def test_energy_examples():
    p = ModelParams(1.0, 0.0)
    assert model.energy(0, p) == pytest.approx(1 + (1 + math.sqrt(5)) / 2, abs=1e-14)
    e = model.energy(np.arange(12), ModelParams(0.5, 1.0))
    assert np.allclose(np.diff(e), 1.0, atol=1e-14)


def test_eigenfunctions_vanish_at_origin(any_regime):
    vals = model.eigenfunctions(6, np.array([0.0, 1e-8]), any_regime)
    assert np.abs(vals).max() < 1e-6


def test_orthonormality_all_regimes(any_regime):
    gram = model.gram_matrix(10, any_regime)
    assert np.abs(gram - np.eye(11)).max() < 1e-8


def test_normalisation_by_adaptive_quadrature(supercritical):
    from relsosc.numerics import semi_infinite_quadrature

    norm = semi_infinite_quadrature(lambda r: np.abs(model.eigenfunction(0, r, supercritical)) ** 2)
    cross = semi_infinite_quadrature(
        lambda r: np.conj(model.eigenfunction(0, r, supercritical)) * model.eigenfunction(1, r, supercritical)
    )
    assert abs(norm - 1) < 1e-8
    assert abs(cross) < 1e-8


def test_eigen_residual(any_regime):
    rho = np.linspace(0.1, 10, 50)
    assert max(model.eigen_residual(n, rho, any_regime) for n in range(9)) < 1e-9


def test_hamiltonian_on_constant(supercritical):
    rho = np.array([0.7, 2.5])
    w, g = supercritical.omega0, supercritical.g0
    rho2 = rho**2 + 1j * rho  # rho^(2)
    want = 1 + 0.5 * w**2 * rho2 + g / rho2
    got = model.apply_hamiltonian(lambda x: np.ones_like(x), rho, supercritical)
    assert np.allclose(got, want, atol=1e-14)
    mom = model.apply_momentum(lambda x: np.ones_like(x), rho, supercritical)
    assert np.allclose(mom, -(0.5 * w**2 * rho2 + g / rho2), atol=1e-14)


def test_position_hamiltonian_commutator(subcritical):
    # [rho, H] f = i P f with c = 1
    f = lambda x: np.exp(-0.3 * x**2) * (1 + x + 0.2 * x**3)
    rho = np.linspace(0.3, 4, 9)
    lhs = rho * model.apply_hamiltonian(f, rho, subcritical) - model.apply_hamiltonian(lambda x: x * f(x), rho, subcritical)
    rhs = 1j * model.apply_momentum(f, rho, subcritical)
    assert np.abs(lhs - rhs).max() < 1e-9


def test_lowering_annihilates_ground_state(supercritical):
    rho = np.linspace(0.2, 8, 30)
    f = lambda x: model.eigenfunction(0, x, supercritical)
    scale = np.abs(f(rho)).max()
    assert np.abs(model.apply_A("-", f, rho, supercritical)).max() < 1e-8 * scale


@pytest.mark.parametrize("n", [1, 3])
def test_ladder_projections(n, any_regime):
    down = model.ladder_projection("-", n, any_regime)
    up = model.ladder_projection("+", n, any_regime)
    kf_down = model.ladder_coefficient(n, any_regime) * model.f_at_level(n, any_regime)
    kf_up = model.ladder_coefficient(n + 1, any_regime) * model.f_at_level(n + 1, any_regime)
    assert abs(down + kf_down) < 1e-7 * kf_down
    assert abs(up + kf_up) < 1e-7 * kf_up


def test_f_of_energy_forms(subcritical, supercritical):
    for p in (subcritical, supercritical):
        sp = model.derive_spectral(p)
        e0 = model.energy(0, p)
        want = 2 * p.omega0 * math.sqrt(((sp.alpha - 0.5) * (sp.nu - 0.5)).real)
        assert model.f_of_energy(e0, p) == pytest.approx(want, rel=1e-12)
        assert model.f_at_level(3, p) == pytest.approx(model.f_of_energy(model.energy(3, p), p), rel=1e-12)
    sp = model.derive_spectral(supercritical)
    assert ((sp.alpha - 0.5) * (sp.nu - 0.5)).real == pytest.approx(abs(sp.alpha - 0.5) ** 2, rel=1e-14)


def test_ladder_coefficients():
    p = ModelParams(1.0, 0.0)
    sp = model.derive_spectral(p)
    assert model.ladder_coefficient(0, p) == 0
    assert model.ladder_coefficient(1, p) == pytest.approx(math.sqrt(sp.alpha.real + sp.nu.real), rel=1e-15)
    prod = 1.0
    for n in range(1, 8):
        prod *= model.ladder_coefficient(n, p)
        assert prod == pytest.approx(model.ladder_normalization(n, p), rel=1e-12)
    with pytest.raises(ValidationError):
        model.ladder_coefficient(-1, p)


def test_alpha_nu_sweep_boundary():
    sweep = model.alpha_nu_sweep(1.0, 0.0, 0.5, 100)
    below = sweep.g0 <= 0.125
    assert np.all(sweep.alpha[below].imag == 0)
    assert np.all(sweep.alpha[~below].imag != 0)
    assert list(np.unique(sweep.regime)) == ["critical", "subcritical", "supercritical"]


def test_nonrel_limit():
    rep = model.nonrel_limit_check(1.0)
    assert abs(rep.alpha_error[-1]) < 1e-6
    # E_0 - mc^2 -> hbar omega (d + 1), with an O(omega) correction in hbar omega units
    assert abs(rep.energy_error_hbar_omega[-1]) < 2 * rep.omegas[-1]
    assert all(abs(o - 2) < 0.3 for o in rep.alpha_order + rep.energy_order)

