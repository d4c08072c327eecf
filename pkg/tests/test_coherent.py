import cmath
import math

import numpy as np
import pytest

from relsosc import coherent, model, su11
from relsosc.coherent import CSLabel
from relsosc.exceptions import TruncationError, ValidationError
from relsosc.model import ModelParams
from relsosc.numerics import semi_infinite_quadrature


def test_label_geometry():
    lab = CSLabel.from_group(1.2, 0.4)
    assert lab.tau == pytest.approx(1.2, abs=1e-14)
    assert lab.phi == pytest.approx(0.4, abs=1e-14)
    assert CSLabel(0).phi == 0.0
    with pytest.raises(ValidationError):
        CSLabel(1.0)
    with pytest.raises(ValidationError):
        CSLabel.from_group(-0.1, 0)


def test_coefficients(supercritical):
    k = model.derive_spectral(supercritical).k
    ground = coherent.cs_coefficients(0, supercritical, n_terms=5).coeffs
    assert np.array_equal(ground, [1, 0, 0, 0, 0])
    cs = coherent.cs_coefficients(0.5 * cmath.exp(0.3j), supercritical)
    assert abs(math.fsum(np.abs(cs.coeffs) ** 2) - 1) < 1e-14
    assert cs.tail_bound < 1e-14
    assert abs(cs.coeffs[1] / cs.coeffs[0] - math.sqrt(2 * k) * cs.zeta) < 1e-14


def test_truncation_error(supercritical):
    with pytest.raises(TruncationError):
        coherent.cs_coefficients(0.99999, supercritical)


def test_position_series_ground_and_norm(supercritical):
    rho = np.linspace(0.2, 6, 7)
    assert np.allclose(coherent.cs_position_series(0, rho, supercritical), model.eigenfunction(0, rho, supercritical))
    z = 0.4 - 0.2j
    norm = semi_infinite_quadrature(lambda r: np.abs(coherent.cs_position_series(z, r, supercritical)) ** 2)
    assert abs(norm - 1) < 1e-8


def test_closed_form_agrees_at_critical_point(critical):
    rng = np.random.default_rng(1)
    for _ in range(10):
        z = 0.7 * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
        r = rng.uniform(0.2, 6)
        assert abs(coherent.cs_position_series(z, r, critical) - coherent.cs_position_closed(z, r, critical)) < 1e-10


def test_closed_form_ground_state(critical):
    rho = np.array([0.5, 2.0, 4.0])
    assert np.allclose(coherent.cs_position_closed(0, rho, critical), model.eigenfunction(0, rho, critical), atol=1e-13)


def test_closed_form_radial_continuity(critical):
    # principal branch of (1 - zeta)^(...) gives a continuous curve along a ray
    ts = np.linspace(0, 0.9, 200)
    vals = np.array([coherent.cs_position_closed(t * cmath.exp(2.5j), 1.3, critical) for t in ts])
    assert np.abs(np.diff(vals)).max() < 0.05


def test_overlap_examples(supercritical):
    k = model.derive_spectral(supercritical).k
    z = 0.3 + 0.5j
    assert coherent.overlap(z, z, supercritical) == pytest.approx(1, abs=1e-14)
    assert coherent.overlap(0, z, supercritical) == pytest.approx((1 - abs(z) ** 2) ** k, abs=1e-14)
    assert abs(coherent.overlap(z, -0.6j, supercritical) - coherent.overlap_spectral(z, -0.6j, supercritical)) < 1e-12


def test_measure_density(supercritical, subcritical):
    k = model.derive_spectral(supercritical).k
    assert coherent.measure_density(0, supercritical) == pytest.approx((2 * k - 1) / math.pi)
    assert coherent.measure_density(0.5, supercritical) == pytest.approx((2 * k - 1) / math.pi / 0.75**2)


def test_completeness(any_regime):
    m = coherent.completeness_check(any_regime, n_max=10)
    assert np.abs(np.diag(m) - 1).max() < 1e-6
    assert np.abs(m - np.diag(np.diag(m))).max() < 1e-10


def test_completeness_detects_wrong_measure(supercritical):
    k = model.derive_spectral(supercritical).k
    m = coherent.completeness_check(supercritical, n_max=4, measure_prefactor=2 * k)
    assert np.abs(np.diag(m) - 1).max() > 0.1


def test_generator_matrix_elements(supercritical):
    k = model.derive_spectral(supercritical).k
    assert np.allclose(coherent.generator_matrix_elements(0, 0, supercritical), (0, 0, k))
    lab = CSLabel.from_group(0.9, 1.1)
    k0 = coherent.generator_matrix_elements(lab, lab, supercritical)[2]
    assert k0 == pytest.approx(k * math.cosh(0.9), rel=1e-13)

    _, kp_, km_ = su11.build_generators(supercritical, 200)
    zb, zk = 0.3 - 0.2j, -0.1 + 0.4j
    vb = coherent.coefficient_array(zb, k, 200)
    vk = coherent.coefficient_array(zk, k, 200)
    got = coherent.generator_matrix_elements(zb, zk, supercritical)
    assert abs(got[0] - np.vdot(vb, km_ @ vk)) < 1e-12
    assert abs(got[1] - np.vdot(vb, kp_ @ vk)) < 1e-12


def test_hk_energy_function(supercritical):
    k = model.derive_spectral(supercritical).k
    w = supercritical.omega0
    assert coherent.hk_energy_function(0, 0, supercritical) == pytest.approx(model.energy(0, supercritical))
    lab = CSLabel.from_group(0.6, 2.0)
    assert coherent.hk_energy_function(lab, lab, supercritical) == pytest.approx(2 * k * w * math.cosh(0.6))
    zb, zk = 0.2j, 0.5
    ratio = coherent.generator_matrix_elements(zb, zk, supercritical)[2] / coherent.overlap(zb, zk, supercritical)
    assert abs(coherent.hk_energy_function(zb, zk, supercritical) - 2 * w * ratio) < 1e-13


def test_propagator_examples(supercritical):
    k = model.derive_spectral(supercritical).k
    w = supercritical.omega0
    zb, zk = 0.3 + 0.1j, -0.2 + 0.25j
    assert abs(coherent.propagator_closed(zb, zk, 0.0, supercritical) - coherent.overlap(zb, zk, supercritical)) < 1e-15
    assert coherent.propagator_closed(0, 0, 1.3, supercritical) == pytest.approx(cmath.exp(-2j * w * k * 1.3))
    for wt in (0.1, 1.0, 5.0):
        T = wt / w
        assert abs(coherent.propagator_closed(zb, zk, T, supercritical)
                   - coherent.propagator_spectral(zb, zk, T, supercritical)) < 1e-10


def test_propagator_periodicity(supercritical):
    # T -> T + pi/omega0 multiplies by the global phase exp(-2 pi i k)
    k = model.derive_spectral(supercritical).k
    zb, zk, T = 0.5j, 0.3 - 0.3j, 0.8
    period = math.pi / supercritical.omega0
    a = coherent.propagator_spectral(zb, zk, T, supercritical)
    b = coherent.propagator_spectral(zb, zk, T + period, supercritical)
    assert abs(b - cmath.exp(-2j * math.pi * k) * a) < 1e-12


def test_printed_propagator_variant_disagrees(supercritical):
    zb, zk, T = 0.3 + 0.1j, -0.2 + 0.25j, 2.0
    spectral = coherent.propagator_spectral(zb, zk, T, supercritical)
    assert abs(coherent.propagator_closed(zb, zk, T, supercritical, paper_form=True) - spectral) > 0.1


def test_partition_function(supercritical):
    for wb in (0.5, 1.0, 2.0):
        beta = wb / supercritical.omega0
        res = coherent.partition_function(beta, supercritical)
        direct = coherent.partition_direct_sum(beta, supercritical, 200)
        assert abs(res.z - direct) / res.z < 1e-14
    big = coherent.partition_function(80.0, supercritical)
    assert big.z == pytest.approx(math.exp(-80.0 * model.energy(0, supercritical)), rel=1e-12)
    with pytest.raises(ValidationError):
        coherent.partition_function(0.0, supercritical)

