"""Spectral core: transforms, multipliers, free flow, velocity calculus."""

import numpy as np
import pytest

from bosonstar.errors import NonFiniteSymbol
from bosonstar.grids import (
    GridSpec,
    MultiplierSymbol,
    SpectralField,
    apply_multiplier,
    apply_velocity_function,
    bessel_symbol,
    free_propagate,
    tilt_generator_norm,
    tilted_dispersion_imag,
    to_frequency,
    to_physical,
    velocity_component,
    velocity_spectrum,
)
from bosonstar.states import gaussian_state, plane_wave, random_state


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 1000, 10.0)           # not a power of two
    with pytest.raises(ValueError):
        GridSpec(4, 16, 10.0)             # dimension out of range
    with pytest.raises(ValueError):
        GridSpec(1, 16, -1.0)
    with pytest.raises(ValueError):
        GridSpec(3, 512, 10.0)            # 512^3 exceeds the point cap
    g = GridSpec(2, (64, 128), (10.0, 20.0))
    assert g.dx == (10.0 / 64, 20.0 / 128)


def test_frequency_lattice_symmetric_range():
    g = GridSpec(1, 8, 8.0)
    k = sorted(g.axis_frequencies(0) / (2 * np.pi / 8.0))
    assert np.allclose(k, [-4, -3, -2, -1, 0, 1, 2, 3])


def test_constant_field_transforms_to_zero_mode():
    g = GridSpec(1, 64, 10.0)
    f = SpectralField(g, np.full(64, 2.5 + 0.5j))
    fh = to_frequency(f)
    nonzero = np.abs(fh.values) > 1e-13 * np.max(np.abs(fh.values))
    assert nonzero.sum() == 1
    assert nonzero[0]                      # k = 0 sits at fft index 0


def test_transform_roundtrip():
    g = GridSpec(2, 64, 20.0)
    f = random_state(g, seed=1)
    back = to_physical(to_frequency(to_physical(f)))
    ref = to_physical(f)
    assert np.max(np.abs(back.values - ref.values)) <= 1e-13 * np.max(np.abs(ref.values))


def test_plane_wave_is_frequency_delta():
    g = GridSpec(1, 64, 16.0)
    f = plane_wave(g, [5])
    fh = to_frequency(f)
    idx = np.argmax(np.abs(fh.values))
    k = g.axis_frequencies(0)
    assert abs(k[idx] - 2 * np.pi * 5 / 16.0) < 1e-12
    others = np.abs(fh.values).copy()
    others[idx] = 0.0
    assert np.max(others) < 1e-12 * np.abs(fh.values[idx])


def test_parseval():
    g = GridSpec(1, 256, 30.0)
    f = random_state(g, seed=2)
    p = to_physical(f)
    assert abs(p.norm_l2() - f.norm_l2()) <= 1e-12 * f.norm_l2()


def test_multiplier_identity_and_eigenfunction():
    g = GridSpec(1, 128, 16.0)
    f = plane_wave(g, [3])
    one = MultiplierSymbol(lambda k: np.ones_like(k), name="1")
    assert np.allclose(apply_multiplier(f, one).values, f.values)
    s = 0.7
    xi = 2 * np.pi * 3 / 16.0
    out = apply_multiplier(f, bessel_symbol(s))
    assert np.allclose(out.values, (1 + xi ** 2) ** (s / 2) * f.values)


def test_multiplier_inverse_pair_and_composition():
    g = GridSpec(1, 256, 40.0)
    f = random_state(g, seed=3)
    fwd = apply_multiplier(apply_multiplier(f, bessel_symbol(1.3)),
                           bessel_symbol(-1.3))
    assert np.max(np.abs(fwd.values - f.values)) <= 1e-12
    m1, m2 = bessel_symbol(0.4), bessel_symbol(-1.1)
    a = apply_multiplier(apply_multiplier(f, m1), m2)
    b = apply_multiplier(f, m1 * m2)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12


def test_nonfinite_symbol_rejected():
    g = GridSpec(1, 32, 10.0)
    f = random_state(g, seed=4)
    bad = MultiplierSymbol(lambda k: 1.0 / k, name="1/xi")  # inf at xi = 0
    with np.errstate(divide="ignore"):
        with pytest.raises(NonFiniteSymbol):
            apply_multiplier(f, bad)


def test_free_propagate_plane_wave_phase():
    g = GridSpec(1, 64, 16.0)
    f = plane_wave(g, [2], amplitude=1.3)
    xi = 2 * np.pi * 2 / 16.0
    t = 3.7
    out = free_propagate(f, t)
    assert np.allclose(out.values,
                       np.exp(-1j * t * np.sqrt(1 + xi ** 2)) * f.values)


def test_free_propagate_unitary_and_group_law():
    g = GridSpec(1, 4096, 200.0)
    for seed in range(3):
        f = random_state(g, seed=seed)
        n0 = f.norm_l2()
        assert abs(free_propagate(f, 11.0).norm_l2() - n0) <= 1e-12 * n0
        a = free_propagate(free_propagate(f, 4.2), 2.9)
        b = free_propagate(f, 7.1)
        assert np.max(np.abs(a.values - b.values)) <= 1e-12


def test_free_propagate_matches_quadrature_oracle():
    # 1-d Gaussian exp(-x^2) at t=10 against a dense trapezoid evaluation of
    # the Fourier integral (10x oversampled analytic transform).
    g = GridSpec(1, 1024, 100.0)
    f = SpectralField.from_function(g, lambda x: np.exp(-x ** 2))
    t = 10.0
    num = to_physical(free_propagate(f, t))

    xi_max = np.pi / g.dx[0]
    xi = np.linspace(-xi_max, xi_max, 10 * g.n[0] + 1)
    dxi = xi[1] - xi[0]
    fhat = (1.0 / np.sqrt(2.0)) * np.exp(-xi ** 2 / 4.0)
    x = g.axis_coordinates(0)
    central = np.abs(x) <= g.L[0] / 4.0
    phase = np.exp(1j * (np.outer(x[central], xi) - t * np.sqrt(1 + xi ** 2)))
    oracle = phase @ fhat * dxi / np.sqrt(2 * np.pi)

    err = np.max(np.abs(num.values[central] - oracle))
    assert err <= 1e-8 * np.max(np.abs(oracle))


def test_velocity_function_identity_and_eigenmode():
    g = GridSpec(1, 128, 16.0)
    f = random_state(g, seed=5)
    out = apply_velocity_function(f, lambda u: np.ones_like(u))
    assert np.max(np.abs(out.values - f.values)) <= 1e-13

    pw = plane_wave(g, [4])
    xi = 2 * np.pi * 4 / 16.0
    expect = xi ** 2 / (1 + xi ** 2)
    out = apply_velocity_function(pw, lambda u: u)
    assert np.allclose(out.values, expect * pw.values)


def test_velocity_function_is_contraction_for_bounded_f():
    g = GridSpec(2, 64, 20.0)
    for seed in range(3):
        f = random_state(g, seed=seed)
        out = apply_velocity_function(f, lambda u: u)
        assert out.norm_l2() <= f.norm_l2() * (1 + 1e-13)


def test_velocity_spectrum_strictly_inside_unit_interval():
    for grid in (GridSpec(1, 512, 100.0), GridSpec(2, 64, 30.0),
                 GridSpec(3, 16, 10.0)):
        v = np.asarray(velocity_spectrum(grid))
        assert np.min(v) >= 0.0
        assert np.max(v) < 1.0


def test_velocity_component():
    g = GridSpec(2, 64, 16.0)
    const = SpectralField(g, np.ones(g.shape))
    out = velocity_component(const, 0)
    assert np.max(np.abs(out.values)) <= 1e-14

    pw = plane_wave(g, [3, -2])
    xi = np.array([2 * np.pi * 3 / 16.0, -2 * np.pi * 2 / 16.0])
    expect = xi[1] / np.sqrt(1 + xi @ xi)
    out = velocity_component(pw, 1)
    assert np.allclose(out.values, expect * pw.values)
    assert abs(expect) < 1.0

    f = random_state(g, seed=6)
    assert velocity_component(f, 0).norm_l2() <= f.norm_l2() * (1 + 1e-13)


def test_tilted_dispersion_values():
    g = GridSpec(1, 256, 64.0)
    vals = tilted_dispersion_imag(g, [1.0])
    xi = g.axis_frequencies(0)
    assert abs(vals[np.argmin(np.abs(xi))]) <= 1e-14          # xi = 0
    # at |xi| = 1 the exact value is Im sqrt(1 + 2i)
    i_one = np.argmin(np.abs(xi - 1.0))
    exact = np.imag(np.sqrt(complex(xi[i_one] ** 2, 2 * xi[i_one])))
    assert abs(vals[i_one] - exact) <= 1e-14
    assert abs(np.imag(np.sqrt(1 + 2j)) - 0.7861513778) <= 1e-9


def test_tilted_dispersion_orthogonal_direction_is_real():
    g = GridSpec(2, 64, 32.0)
    vals = np.asarray(tilted_dispersion_imag(g, [0.0, 1.0]))
    # modes with xi_y = 0 are orthogonal to the direction
    assert np.max(np.abs(vals[:, 0])) <= 1e-14


def test_tilt_generator_norm_bounded_and_sharp():
    for grid, direction in ((GridSpec(1, 1024, 200.0), [1.0]),
                            (GridSpec(2, 128, 60.0), [0.6, 0.8]),
                            (GridSpec(3, 32, 20.0), [1.0, 0.0, 0.0])):
        norm = tilt_generator_norm(grid, direction)
        assert norm <= 1.0 + 1e-12
        assert norm > 0.8  # approaches 1 on any reasonably fine lattice

    # monotone approach to 1 along xi parallel to the direction
    lam = np.linspace(0.5, 40.0, 200)
    vals = np.imag(np.sqrt(lam ** 2 + 2j * lam))
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] <= 1.0
    assert vals[-1] > 0.999


def test_field_immutability_and_grid_mismatch():
    g = GridSpec(1, 64, 10.0)
    f = random_state(g, seed=7)
    with pytest.raises(ValueError):
        f.values[3] = 0.0
    g2 = GridSpec(1, 128, 10.0)
    f2 = random_state(g2, seed=7)
    with pytest.raises(Exception):
        _ = f + f2
