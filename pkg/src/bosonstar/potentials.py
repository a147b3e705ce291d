"""Interaction potentials, their Fourier symbols, and the Hartree nonlinearity.

A potential ``w`` enters the dynamics only through the convolution
``w * |psi|^2``; on the grid that is a diagonal multiplication by the
kernel's symbol. Symbols are taken in closed form where available
(delta, Gaussian, 3-d screened Coulomb) and otherwise by transforming
the grid-sampled kernel. Signs follow the convention: negative coupling
is attractive/focusing, positive is repulsive/defocusing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, UnsupportedDimension
from .grids import (
    FREQUENCY,
    SpectralField,
    to_frequency,
    to_physical,
)


# ---------------------------------------------------------------------------
# potential specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    """Point interaction: w = kappa * delta_0, a pure cubic nonlinearity."""

    kappa: float

    def classify(self):
        return "measure"

    def strength(self, grid=None):
        """Total-variation norm |kappa|."""
        return abs(self.kappa)


@dataclass(frozen=True)
class Yukawa:
    """Screened attraction/repulsion w = kappa * exp(-mu |x|) / |x|.

    Closed-form symbol in d=3; in other dimensions the kernel is sampled
    with a one-cell core regularization (same treatment as PowerLaw).
    """

    kappa: float
    mu: float

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("Yukawa range parameter mu must be positive")

    def classify(self):
        return "measure_and_lq"

    def strength(self, grid=None):
        if grid is not None and grid.d != 3:
            return _sampled_l1_norm(self, grid)
        return abs(self.kappa) * 4 * np.pi / self.mu ** 2

    def kernel_values(self, r, core):
        return self.kappa * np.exp(-self.mu * r) / np.maximum(r, core)


@dataclass(frozen=True)
class Gaussian:
    """Smooth short-range interaction w = kappa * exp(-|x|^2 / (2 sigma^2))."""

    kappa: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("Gaussian width sigma must be positive")

    def classify(self):
        return "measure_and_lq"

    def strength(self, grid=None):
        d = 3 if grid is None else grid.d
        return abs(self.kappa) * (2 * np.pi * self.sigma ** 2) ** (d / 2.0)


@dataclass(frozen=True)
class PowerLaw:
    """Singular interaction w = kappa * min(|x|, rho)^(-alpha).

    The rho-core regularization keeps the grid sample at x = 0 finite;
    rho defaults to one grid spacing at kernel-build time (rho = None).
    Requires 0 < alpha < d.
    """

    kappa: float
    alpha: float
    rho: float | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("PowerLaw exponent alpha must be positive")
        if self.rho is not None and self.rho <= 0:
            raise ValueError("PowerLaw core radius rho must be positive")

    def classify(self):
        return "weak_lebesgue"

    def strength(self, grid=None):
        if grid is None:
            raise ValueError("PowerLaw strength needs a grid for quadrature")
        return _sampled_l1_norm(self, grid)

    def kernel_values(self, r, core):
        rho = self.rho if self.rho is not None else core
        return self.kappa * np.maximum(r, rho) ** (-self.alpha)


@dataclass(frozen=True)
class Sum:
    """Sum of interaction potentials (measure + function decompositions)."""

    parts: tuple

    def __init__(self, parts):
        object.__setattr__(self, "parts", tuple(parts))

    def classify(self):
        return "+".join(p.classify() for p in self.parts)

    def strength(self, grid=None):
        return sum(p.strength(grid) for p in self.parts)


def validate_spec(spec, d):
    """Check the dimension-dependent constraints of a potential spec."""
    if isinstance(spec, PowerLaw) and not spec.alpha < d:
        raise ValueError(f"PowerLaw needs alpha < d, got alpha={spec.alpha}, d={d}")
    if isinstance(spec, Sum):
        for p in spec.parts:
            validate_spec(p, d)


# serialization to/from the experiment config format -------------------------

_TAGS = {"delta": Delta, "yukawa": Yukawa, "gaussian": Gaussian,
         "power_law": PowerLaw, "sum": Sum}


def spec_to_dict(spec):
    if isinstance(spec, Delta):
        return {"type": "delta", "kappa": spec.kappa}
    if isinstance(spec, Yukawa):
        return {"type": "yukawa", "kappa": spec.kappa, "mu": spec.mu}
    if isinstance(spec, Gaussian):
        return {"type": "gaussian", "kappa": spec.kappa, "sigma": spec.sigma}
    if isinstance(spec, PowerLaw):
        out = {"type": "power_law", "kappa": spec.kappa, "alpha": spec.alpha}
        if spec.rho is not None:
            out["rho"] = spec.rho
        return out
    if isinstance(spec, Sum):
        return {"type": "sum", "parts": [spec_to_dict(p) for p in spec.parts]}
    raise TypeError(f"not a potential spec: {spec!r}")


def spec_from_dict(data):
    data = dict(data)
    tag = data.pop("type", None)
    if tag not in _TAGS:
        raise ValueError(f"unknown potential type {tag!r}")
    if tag == "sum":
        return Sum([spec_from_dict(p) for p in data["parts"]])
    return _TAGS[tag](**data)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvolutionKernel:
    """Symbol samples of an interaction potential on a fixed grid.

    ``symbol`` is the unitary-convention Fourier transform of ``w`` on the
    frequency lattice (real for even ``w``); ``dealias_mask`` implements the
    2/3-rule truncation used when squaring fields.
    """

    grid: object
    symbol: np.ndarray
    spec: object = field(compare=False)
    dealias_mask: np.ndarray = field(compare=False)

    def __init__(self, grid, symbol, spec=None):
        object.__setattr__(self, "grid", grid)
        sym = np.asarray(symbol)
        sym = np.broadcast_to(sym, grid.shape).copy()
        sym.setflags(write=False)
        object.__setattr__(self, "symbol", sym)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "dealias_mask", two_thirds_mask(grid))

    def strength(self):
        """Smallness diagnostic ||w|| (measure norm for delta parts,
        L1 quadrature otherwise)."""
        if self.spec is None:
            return float(np.nan)
        return self.spec.strength(self.grid)


def two_thirds_mask(grid):
    """True on modes kept by the 2/3 dealiasing rule (per axis |k| < n/3)."""
    mask = np.ones(grid.shape, dtype=bool)
    for j in range(grid.d):
        m = grid.n[j]
        k_index = np.fft.fftfreq(m, d=1.0 / m)  # integer mode numbers
        keep = np.abs(k_index) < m / 3.0
        shape = [1] * grid.d
        shape[j] = m
        mask &= keep.reshape(shape)
    mask.setflags(write=False)
    return mask


def _sampled_kernel_symbol(spec, grid):
    """Transform the grid-sampled, core-regularized kernel."""
    r = np.sqrt(grid.radius_squared())
    core = min(grid.dx)
    w = SpectralField(grid, spec.kernel_values(r, core).astype(np.complex128))
    return to_frequency(w).values


def _sampled_l1_norm(spec, grid):
    r = np.sqrt(grid.radius_squared())
    core = min(grid.dx)
    return float(np.sum(np.abs(spec.kernel_values(r, core))) * grid.cell_volume)


def yukawa_symbol_closed_form(spec, grid):
    """Closed-form screened-Coulomb symbol; only available in d=3."""
    if grid.d != 3:
        raise UnsupportedDimension(
            f"Yukawa closed-form symbol requires d=3, grid has d={grid.d}")
    k2 = grid.frequency_radius_squared()
    return spec.kappa * (2 * np.pi) ** (-1.5) * 4 * np.pi / (k2 + spec.mu ** 2)


def build_kernel(spec, grid) -> ConvolutionKernel:
    """Construct the convolution kernel of ``spec`` on ``grid``.

    Uses the analytic symbol where known; PowerLaw (and Yukawa outside
    d=3) fall back to transforming the sampled kernel.
    """
    validate_spec(spec, grid.d)
    if isinstance(spec, Delta):
        symbol = np.full(grid.shape, spec.kappa * (2 * np.pi) ** (-grid.d / 2.0))
    elif isinstance(spec, Gaussian):
        k2 = grid.frequency_radius_squared()
        symbol = (spec.kappa * spec.sigma ** grid.d
                  * np.exp(-spec.sigma ** 2 * k2 / 2.0))
        symbol = np.broadcast_to(symbol, grid.shape)
    elif isinstance(spec, Yukawa):
        try:
            symbol = np.broadcast_to(yukawa_symbol_closed_form(spec, grid), grid.shape)
        except UnsupportedDimension:
            symbol = _sampled_kernel_symbol(spec, grid)
    elif isinstance(spec, PowerLaw):
        symbol = _sampled_kernel_symbol(spec, grid)
    elif isinstance(spec, Sum):
        symbol = sum(build_kernel(p, grid).symbol for p in spec.parts)
    else:
        raise TypeError(f"not a potential spec: {spec!r}")
    return ConvolutionKernel(grid, symbol, spec)


def zero_kernel(grid) -> ConvolutionKernel:
    """The w = 0 kernel (free dynamics)."""
    return ConvolutionKernel(grid, np.zeros(grid.shape), Delta(0.0))


# ---------------------------------------------------------------------------
# nonlinearity
# ---------------------------------------------------------------------------

def hartree_potential(psi: SpectralField, kernel: ConvolutionKernel,
                      dealias: bool = True) -> SpectralField:
    """The self-consistent potential w * |psi|^2, a real physical field.

    |psi|^2 is formed pointwise, optionally 2/3-rule dealiased, convolved
    via the kernel symbol, and the (roundoff-level) imaginary residue is
    discarded so the nonlinear phase stays exactly unitary.
    """
    if kernel.grid != psi.grid:
        raise GridMismatch("kernel and field grids differ")
    p = to_physical(psi)
    density = SpectralField(p.grid, np.abs(p.values) ** 2)
    rho_hat = to_frequency(density).values
    if dealias:
        rho_hat = np.where(kernel.dealias_mask, rho_hat, 0.0)
    scale = (2 * np.pi) ** (psi.grid.d / 2.0)  # convolution theorem factor
    conv = to_physical(SpectralField(psi.grid, scale * kernel.symbol * rho_hat,
                                     FREQUENCY))
    return SpectralField(psi.grid, conv.values.real.astype(np.complex128))
