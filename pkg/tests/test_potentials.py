"""Interaction kernels and the Hartree nonlinearity."""

import numpy as np
import pytest

from bosonstar.errors import GridMismatch, UnsupportedDimension
from bosonstar.grids import GridSpec, SpectralField, to_physical
from bosonstar.potentials import (
    Delta,
    Gaussian,
    PowerLaw,
    Sum,
    Yukawa,
    build_kernel,
    hartree_potential,
    spec_from_dict,
    spec_to_dict,
    two_thirds_mask,
    yukawa_symbol_closed_form,
    zero_kernel,
)
from bosonstar.states import gaussian_state, random_state


def test_spec_validation():
    with pytest.raises(ValueError):
        Yukawa(1.0, mu=0.0)
    with pytest.raises(ValueError):
        Gaussian(1.0, sigma=-2.0)
    with pytest.raises(ValueError):
        PowerLaw(1.0, alpha=0.0)
    with pytest.raises(ValueError):
        build_kernel(PowerLaw(1.0, alpha=1.5), GridSpec(1, 32, 10.0))  # alpha >= d


def test_classification():
    assert Delta(-1.0).classify() == "measure"
    assert Yukawa(1.0, 1.0).classify() == "measure_and_lq"
    assert PowerLaw(1.0, 0.5).classify() == "weak_lebesgue"
    assert "measure" in Sum([Delta(1.0), Gaussian(1.0, 1.0)]).classify()


def test_spec_serialization_roundtrip():
    spec = Sum([Delta(-0.3), Yukawa(0.5, 2.0), PowerLaw(1.0, 0.8, rho=0.1)])
    again = spec_from_dict(spec_to_dict(spec))
    assert again == spec
    assert spec_to_dict(Yukawa(-0.5, 1.0)) == {
        "type": "yukawa", "kappa": -0.5, "mu": 1.0}


def test_delta_kernel_gives_pointwise_cubic():
    g = GridSpec(1, 256, 40.0)
    psi = gaussian_state(g, width=1.5, amplitude=0.8)
    kernel = build_kernel(Delta(-0.7), g)
    v = hartree_potential(psi, kernel, dealias=False)
    expect = -0.7 * np.abs(to_physical(psi).values) ** 2
    assert np.max(np.abs(v.values.real - expect)) <= 1e-13


def test_zero_kernel_gives_zero_field():
    g = GridSpec(1, 128, 20.0)
    psi = random_state(g, seed=0)
    v = hartree_potential(psi, zero_kernel(g))
    assert np.max(np.abs(v.values)) == 0.0


def test_gaussian_convolution_closed_form():
    g = GridSpec(1, 512, 60.0)
    width = 1.5
    psi = gaussian_state(g, width=width)
    kernel = build_kernel(Gaussian(0.3, 1.2), g)
    v = hartree_potential(psi, kernel, dealias=False)
    # |psi|^2 is a Gaussian of variance tau^2 = width^2/2
    tau2 = width ** 2 / 2.0
    sig2 = 1.2 ** 2
    x = g.axis_coordinates(0)
    expect = 0.3 * np.sqrt(2 * np.pi * sig2 * tau2 / (sig2 + tau2)) \
        * np.exp(-x ** 2 / (2 * (sig2 + tau2)))
    assert np.max(np.abs(v.values.real - expect)) <= 1e-10


def test_yukawa_symbol_zero_mode_against_radial_quadrature():
    g = GridSpec(3, 16, 12.0)
    kappa, mu = -0.4, 1.3
    kernel = build_kernel(Yukawa(kappa, mu), g)
    # integral of the kernel: 4 pi int r exp(-mu r) dr, by fine quadrature
    r = np.linspace(1e-8, 60.0, 400000)
    integral = 4 * np.pi * np.trapezoid(r * np.exp(-mu * r), r) * kappa
    zero_mode = kernel.symbol[0, 0, 0] * (2 * np.pi) ** 1.5
    assert abs(zero_mode - integral) <= 1e-6 * abs(integral)


def test_yukawa_closed_form_requires_d3():
    with pytest.raises(UnsupportedDimension):
        yukawa_symbol_closed_form(Yukawa(1.0, 1.0), GridSpec(1, 64, 10.0))
    # build_kernel falls back to the sampled kernel
    kernel = build_kernel(Yukawa(1.0, 1.0), GridSpec(1, 64, 10.0))
    assert np.all(np.isfinite(kernel.symbol))


def test_hartree_matches_dense_circular_convolution():
    g = GridSpec(1, 64, 20.0)
    rng = np.random.default_rng(3)
    psi = SpectralField(g, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    kernel = build_kernel(Yukawa(-0.5, 1.0), g)
    v = hartree_potential(psi, kernel, dealias=False)

    xs = g.axis_coordinates(0)
    dx, L = g.dx[0], g.L[0]
    w = -0.5 * np.exp(-np.abs(xs)) / np.maximum(np.abs(xs), dx)
    rho = np.abs(psi.values) ** 2
    oracle = np.zeros(64)
    for j in range(64):
        for k in range(64):
            diff = (xs[j] - xs[k] + L / 2) % L - L / 2
            idx = int(round((diff + L / 2) / dx)) % 64
            oracle[j] += w[idx] * rho[k] * dx
    assert np.max(np.abs(v.values.real - oracle)) <= 1e-10


def test_hartree_realness_for_even_kernels():
    g = GridSpec(2, 64, 20.0)
    psi = random_state(g, seed=4)
    p = to_physical(psi)
    for spec in (Gaussian(-0.5, 1.0), Delta(0.3)):
        kernel = build_kernel(spec, g)
        v = hartree_potential(psi, kernel)
        assert np.max(np.abs(v.values.imag)) == 0.0   # truncated by contract
    # the pre-truncation imaginary residue is roundoff level
    raw = np.fft.ifftn(np.fft.fftn(np.abs(p.values) ** 2))
    assert np.max(np.abs(raw.imag)) <= 1e-12 * np.max(np.abs(raw.real))


def test_hartree_positivity_for_repulsive_kernels():
    g = GridSpec(1, 256, 40.0)
    psi = random_state(g, seed=5)
    p = to_physical(psi)
    for spec in (Gaussian(0.8, 1.0), Yukawa(0.6, 1.5)):
        v = hartree_potential(psi, build_kernel(spec, g))
        total = np.sum(v.values.real * np.abs(p.values) ** 2) * g.cell_volume
        assert total >= -1e-13


def test_hartree_translation_equivariance():
    g = GridSpec(1, 128, 32.0)
    psi = gaussian_state(g, width=1.0)
    kernel = build_kernel(Yukawa(-0.4, 1.0), g)
    v = hartree_potential(psi, kernel)
    shift = 8  # lattice cells
    shifted = SpectralField(g, np.roll(to_physical(psi).values, shift))
    v_shifted = hartree_potential(shifted, kernel)
    assert np.max(np.abs(v_shifted.values - np.roll(v.values, shift))) <= 1e-12


def test_grid_mismatch_rejected():
    g1 = GridSpec(1, 64, 10.0)
    g2 = GridSpec(1, 128, 10.0)
    kernel = build_kernel(Delta(1.0), g1)
    with pytest.raises(GridMismatch):
        hartree_potential(random_state(g2), kernel)


def test_two_thirds_mask():
    g = GridSpec(1, 64, 10.0)
    mask = two_thirds_mask(g)
    modes = np.fft.fftfreq(64, d=1.0 / 64)
    assert np.array_equal(mask, np.abs(modes) < 64 / 3.0)


def test_strength_diagnostics():
    assert Delta(-2.5).strength() == 2.5
    assert abs(Yukawa(-1.0, 2.0).strength() - 4 * np.pi / 4.0) <= 1e-12
    g = GridSpec(1, 512, 50.0)
    s = Yukawa(-1.0, 2.0).strength(g)
    assert s > 0
    assert abs(Gaussian(2.0, 1.0).strength(GridSpec(1, 64, 10.0))
               - 2.0 * np.sqrt(2 * np.pi)) <= 1e-12
