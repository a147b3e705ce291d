"""Scalar and field diagnostics: conserved quantities, norms, region
localization, exponential weights, and velocity observables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OverflowRisk
from .grids import (
    SpectralField,
    apply_velocity_function,
    free_propagate,
    gradient_component,
    to_frequency,
    to_physical,
    velocity_component,
)
from .potentials import hartree_potential

#: largest exponent representable in float64 arithmetic
_EXP_LIMIT = 700.0


# ---------------------------------------------------------------------------
# conserved quantities
# ---------------------------------------------------------------------------

def mass(psi: SpectralField) -> float:
    """Total probability integral |psi|^2."""
    return psi.norm_l2() ** 2


def momentum(psi: SpectralField) -> np.ndarray:
    """Field momentum -(i/2) integral of conj(psi) grad psi, one entry per axis.

    In frequency space this is (1/2) sum of xi_j |psi_hat|^2, manifestly real.
    """
    fhat = to_frequency(psi)
    density = np.abs(fhat.values) ** 2
    ks = fhat.grid.frequency_arrays()
    w = fhat.grid.freq_cell_volume
    return np.array([0.5 * float(np.sum(ks[j] * density)) * w
                     for j in range(psi.grid.d)])


def energy(psi: SpectralField, kernel, dealias: bool = True) -> float:
    """Conserved energy: kinetic part via the dispersion symbol (Parseval),
    interaction part (1/4) integral (w*|psi|^2)|psi|^2 by grid quadrature."""
    fhat = to_frequency(psi)
    disp = np.sqrt(1.0 + fhat.grid.frequency_radius_squared())
    kinetic = 0.5 * float(np.sum(disp * np.abs(fhat.values) ** 2)) \
        * fhat.grid.freq_cell_volume
    p = to_physical(psi)
    v = hartree_potential(psi, kernel, dealias=dealias)
    interaction = 0.25 * float(np.sum(v.values.real * np.abs(p.values) ** 2)) \
        * p.grid.cell_volume
    return kinetic + interaction


# ---------------------------------------------------------------------------
# convex regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __init__(self, center, radius):
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        center = tuple(float(c) for c in np.atleast_1d(center))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(radius))

    def contains(self, grid):
        xs = grid.coordinate_arrays()
        r2 = sum((xs[j] - self.center[j]) ** 2 for j in range(grid.d))
        return np.broadcast_to(r2 <= self.radius ** 2, grid.shape)

    def point_distance(self, pts):
        delta = pts - np.asarray(self.center)
        return np.maximum(np.linalg.norm(delta, axis=-1) - self.radius, 0.0)


@dataclass(frozen=True)
class HalfSpace:
    """Points x with normal . x <= offset."""

    normal: tuple
    offset: float

    def __init__(self, normal, offset):
        normal = np.atleast_1d(np.asarray(normal, dtype=float))
        norm = np.linalg.norm(normal)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(normal))
        object.__setattr__(self, "offset", float(offset))

    def contains(self, grid):
        xs = grid.coordinate_arrays()
        proj = sum(self.normal[j] * xs[j] for j in range(grid.d))
        return np.broadcast_to(proj <= self.offset, grid.shape)

    def point_distance(self, pts):
        proj = pts @ np.asarray(self.normal)
        return np.maximum(proj - self.offset, 0.0)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, grid):
        xs = grid.coordinate_arrays()
        inside = np.ones(grid.shape, dtype=bool)
        for j in range(grid.d):
            inside &= np.broadcast_to(
                (xs[j] >= self.lo[j]) & (xs[j] <= self.hi[j]), grid.shape)
        return inside

    def clamp(self, pts):
        return np.clip(pts, np.asarray(self.lo), np.asarray(self.hi))

    def point_distance(self, pts):
        return np.linalg.norm(pts - self.clamp(pts), axis=-1)


def region_mass(psi: SpectralField, region) -> float:
    """L2 norm of psi restricted to the grid points inside ``region``."""
    p = to_physical(psi)
    inside = region.contains(p.grid)
    return float(np.sqrt(
        np.sum(np.abs(p.values[inside]) ** 2) * p.grid.cell_volume))


def region_distance(X, Y) -> float:
    """Exact Euclidean distance between two convex regions."""
    if isinstance(X, HalfSpace) and isinstance(Y, HalfSpace):
        n1, n2 = np.asarray(X.normal), np.asarray(Y.normal)
        if np.allclose(n1, -n2):
            # opposing half-spaces n.x <= b1 and n.x >= -b2
            return max(-Y.offset - X.offset, 0.0)
        return 0.0
    if isinstance(X, HalfSpace):
        return _dist_to_halfspace(Y, X)
    if isinstance(Y, HalfSpace):
        return _dist_to_halfspace(X, Y)
    if isinstance(X, Ball) and isinstance(Y, Ball):
        gap = np.linalg.norm(np.asarray(X.center) - np.asarray(Y.center))
        return max(gap - X.radius - Y.radius, 0.0)
    if isinstance(X, Box) and isinstance(Y, Box):
        lo1, hi1 = np.asarray(X.lo), np.asarray(X.hi)
        lo2, hi2 = np.asarray(Y.lo), np.asarray(Y.hi)
        gaps = np.maximum(np.maximum(lo2 - hi1, lo1 - hi2), 0.0)
        return float(np.linalg.norm(gaps))
    # box-ball in either order
    box, ball = (X, Y) if isinstance(X, Box) else (Y, X)
    center = np.asarray(ball.center)
    nearest = box.clamp(center)
    return max(float(np.linalg.norm(center - nearest)) - ball.radius, 0.0)


def _dist_to_halfspace(region, half):
    n = np.asarray(half.normal)
    if isinstance(region, Ball):
        proj = float(np.asarray(region.center) @ n)
        return max(proj - region.radius - half.offset, 0.0)
    if isinstance(region, Box):
        lo, hi = np.asarray(region.lo), np.asarray(region.hi)
        min_proj = float(np.sum(np.where(n > 0, lo * n, hi * n)))
        return max(min_proj - half.offset, 0.0)
    raise TypeError(f"unsupported region type {type(region)!r}")


def separating_functional(X, Y):
    """Unit vector n and midpoint x0 with n.(x-x0) >= dist/2 on X and
    <= -dist/2 on Y. Requires dist(X, Y) > 0."""
    dist = region_distance(X, Y)
    if dist <= 0:
        raise ValueError("regions must be at positive distance")
    if isinstance(X, HalfSpace) or isinstance(Y, HalfSpace):
        half, other, flip = ((X, Y, 1.0) if isinstance(X, HalfSpace)
                             else (Y, X, -1.0))
        nu = np.asarray(half.normal)
        # X = {nu.x <= b}: the separator points opposite the half-space normal
        if isinstance(other, Ball):
            near = float(np.asarray(other.center) @ nu) - other.radius
        elif isinstance(other, Box):
            lo, hi = np.asarray(other.lo), np.asarray(other.hi)
            near = float(np.sum(np.where(nu > 0, lo * nu, hi * nu)))
        else:
            raise TypeError("two half-spaces need opposing normals")
        mid = 0.5 * (half.offset + near)
        return flip * (-nu), mid * nu
    pX = _nearest_point(X, Y)
    pY = _nearest_point(Y, X)
    n = pX - pY
    n = n / np.linalg.norm(n)
    return n, 0.5 * (pX + pY)


def _nearest_point(region, other):
    """Point of ``region`` closest to ``other`` (ball/box pairs)."""
    if isinstance(region, Ball):
        target = (np.asarray(other.center) if isinstance(other, Ball)
                  else other.clamp(np.asarray(region.center)))
        u = target - np.asarray(region.center)
        u = u / np.linalg.norm(u)
        return np.asarray(region.center) + region.radius * u
    if isinstance(region, Box):
        if isinstance(other, Ball):
            return region.clamp(np.asarray(other.center))
        probe = other.clamp(0.5 * (np.asarray(region.lo) + np.asarray(region.hi)))
        return region.clamp(probe)
    raise TypeError(f"unsupported region type {type(region)!r}")


# ---------------------------------------------------------------------------
# exponential weights
# ---------------------------------------------------------------------------

def exp_weight_norm(psi: SpectralField, direction, x0, sign=-1) -> float:
    """||exp(sign * n.(x - x0)) psi||_L2, overflow-safe.

    The weight is applied through a log-sum-exp rescaling so intermediate
    products stay in range; OverflowRisk is raised only if the final value
    itself exceeds double precision.
    """
    direction = np.atleast_1d(np.asarray(direction, dtype=float))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    p = to_physical(psi)
    xs = p.grid.coordinate_arrays()
    ell = sum(direction[j] * (xs[j] - x0[j]) for j in range(p.grid.d))
    exponent = np.broadcast_to(sign * ell, p.grid.shape)
    amp2 = np.abs(p.values) ** 2
    live = amp2 > 0
    if not np.any(live):
        return 0.0
    peak = float(np.max(exponent[live]))
    total = float(np.sum(amp2 * np.exp(2.0 * np.minimum(exponent - peak, 0.0)))
                  * p.grid.cell_volume)
    log_norm = peak + 0.5 * math.log(total)
    if log_norm > _EXP_LIMIT:
        raise OverflowRisk(f"weighted norm exponent {log_norm:.1f} exceeds float64 range")
    return math.exp(log_norm)


def weighted_norm(psi: SpectralField, gamma: float, s: float) -> float:
    """|| <x>^gamma (1-Laplacian)^(s/2) psi ||_L2.

    Derivative applied in frequency space, weight in physical space.
    """
    if not 0 <= gamma <= 2:
        raise ValueError("gamma must lie in [0, 2]")
    if s < 0:
        raise ValueError("s must be nonnegative")
    fhat = to_frequency(psi)
    smooth = (1.0 + fhat.grid.frequency_radius_squared()) ** (s / 2.0)
    g = to_physical(SpectralField(fhat.grid, smooth * fhat.values, "frequency"))
    weight = (1.0 + g.grid.radius_squared()) ** (gamma / 2.0)
    return float(np.sqrt(
        np.sum(weight * np.abs(g.values) ** 2) * g.grid.cell_volume))


# ---------------------------------------------------------------------------
# velocity observables
# ---------------------------------------------------------------------------

def velocity_band_mass(psi: SpectralField, t: float, band) -> float:
    """L2 norm over grid points whose squared average velocity |x|^2/t^2
    lies in the half-open band [a, b)."""
    if t <= 0:
        raise ValueError("band mass needs t > 0")
    a, b = band
    p = to_physical(psi)
    u = p.grid.radius_squared() / t ** 2
    inside = (u >= a) & (u < b)
    return float(np.sqrt(
        np.sum(np.abs(p.values[inside]) ** 2) * p.grid.cell_volume))


def phase_space_norm(psi: SpectralField, t: float, g, f) -> float:
    """|| g(x^2/t^2) f(V^2) psi ||_L2 for the squared-velocity operator V^2.

    ``f`` acts as a frequency multiplier, ``g`` as a physical one. With
    disjoint supports this measures the mismatch between average and
    instantaneous velocity.
    """
    if t <= 0:
        raise ValueError("phase-space norm needs t > 0")
    filtered = to_physical(apply_velocity_function(psi, f))
    weight = g(filtered.grid.radius_squared() / t ** 2)
    return float(np.sqrt(
        np.sum(np.abs(weight * filtered.values) ** 2)
        * filtered.grid.cell_volume))


def velocity_defect(psi: SpectralField, t: float) -> float:
    """Expectation of (x/t - V)^2: sum over axes of ||(x_j/t - V_j) psi||^2.

    Mixes the physical-space position multiplier with the frequency-space
    velocity components.
    """
    if t <= 0:
        raise ValueError("velocity defect needs t > 0")
    p = to_physical(psi)
    xs = p.grid.coordinate_arrays()
    total = 0.0
    for j in range(p.grid.d):
        xpart = np.broadcast_to(xs[j] / t, p.grid.shape) * p.values
        vpart = to_physical(velocity_component(psi, j)).values
        total += float(np.sum(np.abs(xpart - vpart) ** 2)) * p.grid.cell_volume
    return total


def position_velocity_identity_gap(psi: SpectralField, t: float) -> float:
    """Relative gap in the exact conjugation identity
    || x exp(-it<D>) psi ||^2 = || (x + t V) psi ||^2, both sides computed
    independently. Should vanish to roundoff (up to box truncation)."""
    p = to_physical(psi)
    grid = p.grid
    xs = grid.coordinate_arrays()
    evolved = to_physical(free_propagate(psi, t))
    lhs = 0.0
    rhs = 0.0
    for j in range(grid.d):
        xj = np.broadcast_to(xs[j], grid.shape)
        lhs += float(np.sum(np.abs(xj * evolved.values) ** 2)) * grid.cell_volume
        shifted = xj * p.values + t * to_physical(velocity_component(psi, j)).values
        rhs += float(np.sum(np.abs(shifted) ** 2)) * grid.cell_volume
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


# ---------------------------------------------------------------------------
# smooth cutoffs
# ---------------------------------------------------------------------------

def smooth_bump(a: float, b: float):
    """Standard compactly supported bump rescaled to (a, b), peak value 1.

    Built from exp(-1/(1-u^2)); vanishes with all derivatives at a and b.
    """
    if not a < b:
        raise ValueError("bump needs a < b")

    def fn(u):
        u = np.asarray(u, dtype=float)
        v = (2.0 * u - (a + b)) / (b - a)
        out = np.zeros_like(v)
        inside = np.abs(v) < 1.0
        vi = v[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - vi ** 2))
        return out

    return fn


def smooth_plateau(a: float, b: float, margin: float):
    """Smooth cutoff equal to 1 on [a, b], supported in (a-margin, b+margin)."""
    if margin <= 0:
        raise ValueError("margin must be positive")

    def ramp(v):
        # smooth 0 -> 1 transition on (0, 1) via the standard bump primitive
        v = np.clip(v, 0.0, 1.0)
        left = np.exp(-1.0 / np.maximum(v, 1e-300))
        right = np.exp(-1.0 / np.maximum(1.0 - v, 1e-300))
        return left / (left + right)

    def fn(u):
        u = np.asarray(u, dtype=float)
        up = ramp((u - (a - margin)) / margin)
        down = ramp(((b + margin) - u) / margin)
        return up * down

    return fn


# ---------------------------------------------------------------------------
# per-snapshot records
# ---------------------------------------------------------------------------

@dataclass
class ObservableRecord:
    """Named scalar diagnostics at one time."""

    t: float
    scalars: dict

    def __post_init__(self):
        bad = [k for k, v in self.scalars.items() if not np.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite observables at t={self.t}: {bad}")


def standard_record(t, psi, kernel, s, lp=4.0, dealias=True) -> ObservableRecord:
    """The default column set shared by trajectories and experiments."""
    scalars = {
        "mass": mass(psi),
        "energy": energy(psi, kernel, dealias=dealias),
        "Hs_norm": psi.norm_hs(s),
        "Linf_norm": psi.norm_linf(),
        "Lp_norm": psi.norm_lp(lp),
    }
    for j, pj in enumerate(momentum(psi)):
        scalars[f"momentum_{j + 1}"] = pj
    return ObservableRecord(t, scalars)
