import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egps.errors import DomainError, PreconditionError
from egps.grid import TensorGrid
from egps.model import (Field, Harmonic, ModelParams, OpticalLattice, PhysicalParams,
                        RadialPower, Tabulated, Zero, chemical_potential, energy,
                        energy_terms, evaluate_potential, lp_norm, nondimensionalize,
                        reduce_dimension)
from egps.radial import RadialGrid


def _oscillator(n=2048, half=16.0):
    g = TensorGrid(1, ((-half, half),), (n,))
    x = g.axes[0]
    phi = np.pi ** -0.25 * np.exp(-x ** 2 / 2)
    return g, Field(g, phi / g.norm(phi))


# -- nondimensionalize -------------------------------------------------------

def test_nondim_beta_unity():
    beta, _ = nondimensionalize(PhysicalParams(1.0, 1.0, 1.0, 4 * math.pi, 1.0))
    assert beta == pytest.approx(1.0, rel=1e-15)


def test_nondim_lambda_unity():
    _, lam = nondimensionalize(PhysicalParams(1.0, 2.5, 1.0, 2.5, 1 / (4 * math.pi)))
    assert lam == pytest.approx(1.0, rel=1e-15)


def test_nondim_matches_extended_precision():
    mpmath.mp.dps = 50
    n, a, xs = mpmath.mpf(100), mpmath.mpf("5e-9"), mpmath.mpf("1e-6")
    cl = 64 / (15 * mpmath.sqrt(mpmath.pi))
    beta_ref = 4 * mpmath.pi * n * a / xs
    lam_ref = 4 * mpmath.pi * cl * n ** mpmath.mpf(1.5) * (a / xs) ** mpmath.mpf(2.5)
    beta, lam = nondimensionalize(
        PhysicalParams(1.4e-25, 5e-9, 100.0, 1e-6, 64 / (15 * math.sqrt(math.pi))))
    assert beta == pytest.approx(float(beta_ref), rel=1e-13)
    assert lam == pytest.approx(float(lam_ref), rel=1e-13)


def test_nondim_norm_constant_scaling():
    b1, l1 = nondimensionalize(PhysicalParams(1.0, 1e-8, 50.0, 1e-6, 0.3))
    b2, l2 = nondimensionalize(PhysicalParams(1.0, 1e-8, 50.0, 1e-6, 0.3, norm_constant=2.0))
    assert b2 == pytest.approx(b1 / 4)
    assert l2 == pytest.approx(l1 / 8)


@pytest.mark.parametrize("field", ["mass", "scattering_length", "particle_number",
                                   "length_scale", "lhy_constant", "norm_constant"])
def test_nondim_rejects_nonpositive(field):
    kw = dict(mass=1.0, scattering_length=1.0, particle_number=1.0, length_scale=1.0,
              lhy_constant=1.0, norm_constant=1.0)
    kw[field] = 0.0
    with pytest.raises(DomainError):
        PhysicalParams(**kw)


# -- potentials --------------------------------------------------------------

def test_harmonic_at_origin():
    assert evaluate_potential(Harmonic((1, 1, 1)), (0, 0, 0)) == 0.0


def test_harmonic_single_axis():
    assert evaluate_potential(Harmonic((1, 0, 0)), (2, 5, 7)) == pytest.approx(2.0)


def test_optical_lattice_value():
    v = OpticalLattice(1e3, 5 * math.pi)
    assert evaluate_potential(v, (0.2, 0.2)) == pytest.approx(-2000.0)


def test_radial_power_and_zero():
    assert evaluate_potential(RadialPower(2.0, 3.0), (1.0, 0.0)) == pytest.approx(2.0)
    assert evaluate_potential(Zero(), (0.3,)) == 0.0


def test_harmonic_dimension_mismatch():
    with pytest.raises(DomainError):
        evaluate_potential(Harmonic((1, 2)), (1.0, 2.0, 3.0))


def test_tabulated_needs_matching_grid():
    g = RadialGrid(3, 1.0, 16)
    good = Tabulated(np.linspace(0, 1, 16))
    assert np.array_equal(g.potential_values(good), np.linspace(0, 1, 16))
    with pytest.raises(DomainError):
        g.potential_values(Tabulated(np.zeros(8)))
    with pytest.raises(DomainError):
        TensorGrid(2, counts=(8, 8)).potential_values(Tabulated(np.zeros(63)))


def test_lattice_not_radial():
    with pytest.raises(DomainError):
        RadialGrid(2, 1.0, 16).potential_values(OpticalLattice(1.0, 1.0))


# -- model parameters and fields ---------------------------------------------

@pytest.mark.parametrize("kw", [dict(dim=4, beta=0, lam=0), dict(dim=3, beta=0, lam=-1),
                                dict(dim=3, beta=0, lam=0, c=0.0),
                                dict(dim=1, beta=math.nan, lam=0)])
def test_model_params_validation(kw):
    with pytest.raises(DomainError):
        ModelParams(**kw)


def test_field_validation():
    g = RadialGrid(1, 1.0, 8)
    with pytest.raises(PreconditionError):
        Field(g, np.ones(9))
    with pytest.raises(PreconditionError):
        Field(g, np.full(8, np.inf))
    f = Field(g, np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


# -- energy and chemical potential -------------------------------------------

def test_energy_of_zero_field():
    for g in (RadialGrid(3, 1.0, 32), TensorGrid(2, counts=(10, 12))):
        assert energy(Field(g, np.zeros(g.size)), ModelParams(g.dim, -3.0, 0.5)) == 0.0


def test_energy_harmonic_oscillator():
    _, f = _oscillator()
    m = ModelParams(1, 0.0, 0.0, 1.0, Harmonic(1.0))
    assert energy(f, m) == pytest.approx(0.5, abs=1e-3)


def test_mu_harmonic_oscillator():
    _, f = _oscillator()
    m = ModelParams(1, 0.0, 0.0, 1.0, Harmonic(1.0))
    assert chemical_potential(f, m) == pytest.approx(0.5, abs=1e-3)


def test_mu_flat_field_without_gradients():
    # the jump at the edge of the support is the only gradient; remove it by
    # subtracting the kinetic term and compare what remains
    g = TensorGrid(1, ((0.0, 1.0),), (99,))
    a, beta, lam = 3.0, -2.0, 0.7
    support = np.abs(g.axes[0] - 0.5) < 0.2
    phi = np.where(support, a, 0.0)
    c = g.norm(phi)
    m = ModelParams(1, beta, lam, c)
    f = Field(g, phi)
    kinetic = energy_terms(f, m)["kinetic"]
    assert chemical_potential(f, m) - kinetic / c ** 2 == pytest.approx(
        beta * a ** 2 + lam * a ** 3, rel=1e-12)


def _direct_mu(phi, h, beta, lam, v, c):
    """Independent trapezoid/first-difference quadrature with plain loops."""
    n = len(phi)
    padded = [0.0] + list(phi) + [0.0]
    kin = 0.0
    for i in range(n + 1):
        d = (padded[i + 1] - padded[i]) / h
        kin += 0.5 * d * d * h
    rest = 0.0
    for i in range(n):
        p = phi[i]
        rest += h * (v[i] * p * p + beta * p ** 4 + lam * abs(p) ** 5)
    return (kin + rest) / c ** 2


def test_mu_matches_direct_summation(rng):
    g = TensorGrid(1, ((-2.0, 2.0),), (64,))
    phi = rng.standard_normal(64)
    c = 1.7
    phi *= c / g.norm(phi)
    m = ModelParams(1, -3.5, 0.25, c, Harmonic(1.3))
    v = 0.5 * (1.3 * g.axes[0]) ** 2
    ref = _direct_mu(phi, g.spacing[0], -3.5, 0.25, v, c)
    assert chemical_potential(Field(g, phi), m) == pytest.approx(ref, rel=1e-12)


def test_mu_requires_normalized_field():
    g = RadialGrid(3, 1.0, 32)
    with pytest.raises(PreconditionError):
        chemical_potential(Field(g, np.ones(32)), ModelParams(3, 0.0, 0.0, 1.0))


def test_energy_dimension_mismatch():
    g = RadialGrid(2, 1.0, 16)
    with pytest.raises(PreconditionError):
        energy(Field(g, np.ones(16)), ModelParams(3, 0.0, 0.0))


def _random_field(grid, seed, c):
    v = np.random.default_rng(seed).random(grid.size) + 0.05
    return Field(grid, v * (c / grid.norm(v)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), beta=st.floats(-50, 50), lam=st.floats(0, 5),
       c=st.floats(0.2, 5), radial=st.booleans(), dim=st.integers(1, 3))
def test_mu_energy_identity(seed, beta, lam, c, radial, dim):
    grid = RadialGrid(dim, 1.0, 40) if radial else TensorGrid(dim, counts=(10,) * dim)
    f = _random_field(grid, seed, c)
    m = ModelParams(dim, beta, lam, c, Harmonic(2.0))
    lhs = chemical_potential(f, m) * c ** 2 - energy(f, m)
    rhs = beta / 2 * lp_norm(f, 4) ** 4 + 3 * lam / 5 * lp_norm(f, 5) ** 5
    scale = max(abs(lhs), abs(rhs), energy_terms(f, m)["kinetic"])
    assert abs(lhs - rhs) <= 1e-10 * scale


@pytest.mark.parametrize("s", [2.0, 0.5])
def test_energy_termwise_scaling(s):
    g = RadialGrid(3, 1.0, 64)
    f = _random_field(g, 3, 1.0)
    m = ModelParams(3, -4.0, 0.3, 1.0, Harmonic(1.0))
    ms = ModelParams(3, -4.0, 0.3, s, Harmonic(1.0))
    t = energy_terms(f, m)
    ts = energy_terms(f.with_values(s * f.values), ms)
    assert ts["kinetic"] == pytest.approx(s ** 2 * t["kinetic"], rel=1e-13)
    assert ts["potential"] == pytest.approx(s ** 2 * t["potential"], rel=1e-13)
    assert ts["cubic"] == pytest.approx(s ** 4 * t["cubic"], rel=1e-13)
    assert ts["lhy"] == pytest.approx(s ** 5 * t["lhy"], rel=1e-13)


# -- dimension reduction -----------------------------------------------------

def test_disk_beta_closed_form():
    red = reduce_dimension(ModelParams(3, -10.0, 0.1), 1.0, "disk")
    assert red.beta_reduced == pytest.approx(-10.0 / math.sqrt(2 * math.pi), rel=1e-10)
    assert red.target_dimension == 2


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.5])
def test_disk_lhy_moment_closed_form(sigma):
    red = reduce_dimension(ModelParams(3, -1.0, 1.0), sigma, "disk")
    exact = (math.pi * sigma ** 2) ** -1.25 * sigma * math.sqrt(2 * math.pi / 5)
    assert red.lambda_reduced == pytest.approx(exact, rel=1e-10)


def test_disk_phase_constant_quadrature():
    sigma, gz = 0.7, 5.0
    red = reduce_dimension(ModelParams(3, 1.0, 1.0, 1.0, Harmonic((1, 1, gz))), sigma, "disk")
    mpmath.mp.dps = 30
    psi = lambda z: (mpmath.pi * sigma ** 2) ** -0.25 * mpmath.exp(-z ** 2 / (2 * sigma ** 2))
    dpsi = lambda z: -z / sigma ** 2 * psi(z)
    ref = mpmath.quad(lambda z: gz ** 2 * z ** 2 * psi(z) ** 2 + dpsi(z) ** 2,
                      [-mpmath.inf, 0, mpmath.inf])
    assert red.phase_constant == pytest.approx(float(ref), rel=1e-9)


def test_cigar_against_quadrature():
    gamma, sigma = 3.0, 1.0
    red = reduce_dimension(ModelParams(3, -2.0, 0.5, 1.0, Harmonic((1, gamma, gamma))),
                           sigma, "cigar")
    mpmath.mp.dps = 30
    # 2D isotropic Gaussian in polar coordinates
    amp = 1 / (mpmath.sqrt(mpmath.pi) * sigma)
    psi = lambda r: amp * mpmath.exp(-r ** 2 / (2 * sigma ** 2))
    polar = lambda fn: 2 * mpmath.pi * mpmath.quad(lambda r: fn(r) * r, [0, mpmath.inf])
    l4 = polar(lambda r: psi(r) ** 4)
    l5 = polar(lambda r: psi(r) ** 5)
    c_ref = polar(lambda r: gamma ** 2 * r ** 2 * psi(r) ** 2 + (r / sigma ** 2 * psi(r)) ** 2)
    assert red.target_dimension == 1
    assert red.beta_reduced == pytest.approx(-2.0 * float(l4), rel=1e-9)
    assert red.lambda_reduced == pytest.approx(0.5 * float(l5), rel=1e-9)
    assert red.phase_constant == pytest.approx(float(c_ref), rel=1e-9)
    assert red.phase_constant == pytest.approx(gamma ** 2 * sigma ** 2 + 1 / sigma ** 2)


def test_reduction_signs_and_model():
    red = reduce_dimension(ModelParams(3, -4.0, 0.2, 1.0, Harmonic((2, 3, 50))), 0.2, "disk")
    assert red.beta_reduced < 0 < red.lambda_reduced
    m2 = red.model(c=3.0)
    assert m2.dim == 2 and m2.c == 3.0 and m2.potential == Harmonic((2.0, 3.0))


def test_reduction_vanishes_monotonically_for_wide_profiles():
    m = ModelParams(3, -4.0, 0.2)
    for case in ("disk", "cigar"):
        reds = [reduce_dimension(m, s, case) for s in (1, 2, 4, 8, 16, 64)]
        b = [abs(r.beta_reduced) for r in reds]
        lam = [r.lambda_reduced for r in reds]
        assert all(x > y for x, y in zip(b, b[1:]))
        assert all(x > y for x, y in zip(lam, lam[1:]))
        assert b[-1] < 0.1 * b[0] and lam[-1] < 0.1 * lam[0]


@pytest.mark.parametrize("bad", [dict(sigma=0.0, case="disk"), dict(sigma=1.0, case="ring")])
def test_reduction_errors(bad):
    with pytest.raises(DomainError):
        reduce_dimension(ModelParams(3, 1.0, 1.0), bad["sigma"], bad["case"])
    with pytest.raises(DomainError):
        reduce_dimension(ModelParams(2, 1.0, 1.0), 1.0, "disk")
