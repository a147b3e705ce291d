"""Periodic grids, unitary discrete Fourier transforms, and diagonal
Fourier-multiplier calculus.

The transform convention is the unitary one: a field sampled on an
origin-centered box of side ``L`` is mapped to samples of its continuum
Fourier transform on the lattice ``xi_k = 2*pi*k/L``, ``k`` in the
symmetric range ``[-n/2, n/2)``.  Concretely

    psi_hat(xi) = (2*pi)^(-d/2) * sum_j psi(x_j) exp(-i xi . x_j) dx^d
    psi(x)      = (2*pi)^(-d/2) * sum_k psi_hat(xi_k) exp(i xi_k . x) dxi^d

so Parseval holds with quadrature weights ``dx^d`` in physical space and
``dxi^d`` in frequency space, and every operator built from the gradient
becomes pointwise multiplication by its symbol on the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NonFiniteSymbol

#: Hard cap on the total number of grid points (memory guard).
DEFAULT_POINT_CAP = 2 ** 24

PHYSICAL = "physical"
FREQUENCY = "frequency"


def _as_tuple(value, d, name):
    if np.isscalar(value):
        return (value,) * d
    value = tuple(value)
    if len(value) != d:
        raise ValueError(f"{name} must be a scalar or a length-{d} sequence")
    return value


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on an origin-centered box.

    ``n`` points per axis (powers of two), box side ``L`` per axis,
    coordinates ``x_j in [-L/2, L/2)``.
    """

    d: int
    n: tuple
    L: tuple
    point_cap: int = field(default=DEFAULT_POINT_CAP, compare=False)

    def __init__(self, d, n, L, point_cap=DEFAULT_POINT_CAP):
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        n = tuple(int(m) for m in _as_tuple(n, d, "n"))
        L = tuple(float(l) for l in _as_tuple(L, d, "L"))
        for m in n:
            if m <= 0 or (m & (m - 1)) != 0:
                raise ValueError(f"points per axis must be a power of two, got {m}")
        for l in L:
            if l <= 0:
                raise ValueError(f"box side must be positive, got {l}")
        total = int(np.prod(n))
        if total > point_cap:
            raise ValueError(f"total point count {total} exceeds cap {point_cap}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "point_cap", point_cap)

    @property
    def shape(self):
        return self.n

    @property
    def dx(self):
        """Grid spacing per axis."""
        return tuple(l / m for l, m in zip(self.L, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.dx))

    @property
    def freq_cell_volume(self):
        return float(np.prod([2 * np.pi / l for l in self.L]))

    def axis_coordinates(self, j):
        """Physical coordinates along axis ``j``."""
        m = self.n[j]
        return (np.arange(m) - m // 2) * self.dx[j]

    def axis_frequencies(self, j):
        """Frequency lattice 2*pi*k/L along axis ``j``, fft ordering."""
        return 2 * np.pi * np.fft.fftfreq(self.n[j], d=self.dx[j])

    def coordinate_arrays(self):
        """Broadcastable coordinate arrays, one per axis."""
        axes = [self.axis_coordinates(j) for j in range(self.d)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def frequency_arrays(self):
        """Broadcastable frequency arrays, one per axis (fft ordering)."""
        axes = [self.axis_frequencies(j) for j in range(self.d)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def radius_squared(self):
        """|x|^2 on the grid."""
        xs = self.coordinate_arrays()
        return sum(x ** 2 for x in xs)

    def frequency_radius_squared(self):
        """|xi|^2 on the frequency lattice."""
        ks = self.frequency_arrays()
        return sum(k ** 2 for k in ks)


class MultiplierSymbol:
    """A scalar function of the frequency vector, evaluated lazily on a lattice.

    ``fn`` receives one broadcastable array per axis and must return the
    symbol values; evaluations are cached per grid.
    """

    def __init__(self, fn, name=""):
        self.fn = fn
        self.name = name
        self._cache = {}

    def on_grid(self, grid):
        values = self._cache.get(grid)
        if values is None:
            values = np.asarray(self.fn(*grid.frequency_arrays()))
            values = np.broadcast_to(values, grid.shape)
            if not np.all(np.isfinite(values)):
                raise NonFiniteSymbol(
                    f"symbol {self.name or self.fn!r} is not finite on the lattice")
            self._cache[grid] = values
        return values

    def __mul__(self, other):
        if not isinstance(other, MultiplierSymbol):
            return NotImplemented
        return MultiplierSymbol(
            lambda *ks: self.fn(*ks) * other.fn(*ks),
            name=f"({self.name})*({other.name})",
        )


def energy_symbol():
    """sqrt(1 + |xi|^2), the relativistic dispersion relation."""
    return MultiplierSymbol(
        lambda *ks: np.sqrt(1.0 + sum(k ** 2 for k in ks)), name="<xi>")


def bessel_symbol(s):
    """(1 + |xi|^2)^(s/2), a smoothing/roughening power of the dispersion."""
    return MultiplierSymbol(
        lambda *ks: (1.0 + sum(k ** 2 for k in ks)) ** (s / 2.0),
        name=f"<xi>^{s}")


class SpectralField:
    """Complex field on a periodic grid, in physical or frequency representation.

    Values are immutable after construction; every operation returns a new
    field. The two representations are related by the unitary transform
    documented in the module docstring.
    """

    __slots__ = ("grid", "values", "representation")

    def __init__(self, grid, values, representation=PHYSICAL):
        if representation not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown representation {representation!r}")
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise GridMismatch(
                f"values of shape {values.shape} on grid of shape {grid.shape}")
        values = values.copy()
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.representation = representation

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_function(cls, grid, fn):
        """Sample a callable of the physical coordinates."""
        return cls(grid, fn(*grid.coordinate_arrays()), PHYSICAL)

    @classmethod
    def zeros(cls, grid, representation=PHYSICAL):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), representation)

    # -- arithmetic (representation-preserving) ----------------------------

    def _check_compatible(self, other):
        if self.grid != other.grid:
            raise GridMismatch("fields live on different grids")
        if self.representation != other.representation:
            raise GridMismatch("fields are in different representations")

    def __add__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.values + other.values, self.representation)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.values - other.values, self.representation)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.values * scalar, self.representation)

    __rmul__ = __mul__

    # -- norms -------------------------------------------------------------

    @property
    def quad_weight(self):
        return (self.grid.cell_volume if self.representation == PHYSICAL
                else self.grid.freq_cell_volume)

    def norm_l2(self):
        """L2 norm with the grid's quadrature weight (Parseval-consistent)."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.quad_weight))

    def norm_linf(self):
        f = self if self.representation == PHYSICAL else to_physical(self)
        return float(np.max(np.abs(f.values)))

    def norm_lp(self, p):
        f = self if self.representation == PHYSICAL else to_physical(self)
        return float((np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p))

    def norm_hs(self, s):
        """Sobolev norm ||(1 - Laplacian)^(s/2) psi||_L2."""
        fhat = to_frequency(self)
        weight = (1.0 + fhat.grid.frequency_radius_squared()) ** s
        return float(np.sqrt(
            np.sum(weight * np.abs(fhat.values) ** 2) * fhat.grid.freq_cell_volume))


def _phase_ramp(grid, sign):
    """Per-axis phase exp(sign * i * xi * x0) linking DFT and continuum FT."""
    ramp = 1.0
    for j in range(grid.d):
        x0 = grid.axis_coordinates(j)[0]
        shape = [1] * grid.d
        shape[j] = grid.n[j]
        ramp = ramp * np.exp(sign * 1j * grid.axis_frequencies(j) * x0).reshape(shape)
    return ramp


def to_frequency(f: SpectralField) -> SpectralField:
    """Transform to frequency representation (no-op if already there)."""
    if f.representation == FREQUENCY:
        return f
    grid = f.grid
    scale = grid.cell_volume / (2 * np.pi) ** (grid.d / 2.0)
    vals = np.fft.fftn(f.values) * scale * _phase_ramp(grid, -1)
    return SpectralField(grid, vals, FREQUENCY)


def to_physical(f: SpectralField) -> SpectralField:
    """Transform to physical representation (no-op if already there)."""
    if f.representation == PHYSICAL:
        return f
    grid = f.grid
    scale = (2 * np.pi) ** (grid.d / 2.0) / grid.cell_volume
    vals = np.fft.ifftn(f.values * _phase_ramp(grid, +1)) * scale
    return SpectralField(grid, vals, PHYSICAL)


def apply_multiplier(f: SpectralField, m) -> SpectralField:
    """Multiply the frequency coefficients pointwise by a symbol.

    ``m`` is a :class:`MultiplierSymbol` or a raw lattice array. The result
    is returned in the input's representation.
    """
    fhat = to_frequency(f)
    values = m.on_grid(f.grid) if isinstance(m, MultiplierSymbol) else np.asarray(m)
    if not np.all(np.isfinite(values)):
        raise NonFiniteSymbol("multiplier array is not finite on the lattice")
    out = SpectralField(f.grid, fhat.values * values, FREQUENCY)
    return out if f.representation == FREQUENCY else to_physical(out)


def free_propagate(f: SpectralField, t: float) -> SpectralField:
    """Apply the linear flow exp(-i t sqrt(1 - Laplacian))."""
    grid = f.grid
    phase = np.exp(-1j * t * np.sqrt(1.0 + grid.frequency_radius_squared()))
    return apply_multiplier(f, phase)


def velocity_spectrum(grid: GridSpec):
    """Lattice values of |xi|^2 / (1 + |xi|^2), the squared group velocity.

    Every value lies in [0, 1): the dynamics is strictly sub-luminal.
    """
    k2 = grid.frequency_radius_squared()
    return k2 / (1.0 + k2)


def apply_velocity_function(f: SpectralField, fn) -> SpectralField:
    """Functional calculus of the squared velocity operator.

    Applies ``fn`` (defined on [0, 1]) to the squared group-velocity
    multiplier |xi|^2/(1+|xi|^2).
    """
    return apply_multiplier(f, np.asarray(fn(velocity_spectrum(f.grid))))


def velocity_component(f: SpectralField, axis: int) -> SpectralField:
    """Component ``axis`` of the bounded velocity operator.

    Symbol xi_j / sqrt(1+|xi|^2); its modulus is < 1 on the whole lattice.
    """
    grid = f.grid
    if not 0 <= axis < grid.d:
        raise ValueError(f"axis {axis} out of range for dimension {grid.d}")
    kj = grid.frequency_arrays()[axis]
    symbol = kj / np.sqrt(1.0 + grid.frequency_radius_squared())
    return apply_multiplier(f, np.broadcast_to(symbol, grid.shape))


def gradient_component(f: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along ``axis`` (symbol i*xi_j)."""
    grid = f.grid
    kj = grid.frequency_arrays()[axis]
    return apply_multiplier(f, np.broadcast_to(1j * kj, grid.shape))


def tilted_dispersion_imag(grid: GridSpec, direction):
    """Im sqrt(|xi|^2 + 2i n.xi) on the lattice, principal branch.

    This is the symbol of the generator controlling exponential-weight
    growth along the unit vector ``direction``; its modulus never exceeds 1.
    The argument |xi|^2 + 2i n.xi avoids the branch cut (-inf, 0).
    """
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (grid.d,):
        raise ValueError(f"direction must have {grid.d} components")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    ks = grid.frequency_arrays()
    dot = sum(direction[j] * ks[j] for j in range(grid.d))
    z = grid.frequency_radius_squared() + 2j * dot
    return np.broadcast_to(np.imag(np.sqrt(z.astype(np.complex128))), grid.shape)


def tilt_generator_norm(grid: GridSpec, direction) -> float:
    """Max over the lattice of |Im sqrt(|xi|^2 + 2i n.xi)|.

    Operator norm of the weight-growth generator; bounded by 1 for any
    grid and unit direction, approaching 1 along xi parallel to n.
    """
    return float(np.max(np.abs(tilted_dispersion_imag(grid, direction))))
