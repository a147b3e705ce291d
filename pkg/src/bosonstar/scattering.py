"""Scattering states, wave operators, and their roundtrip at a finite
truncation horizon.

The improper time integrals defining the scattering state and the wave
operator are truncated at a horizon ``T`` and evaluated by the composite
trapezoid rule on the evolution time lattice, in the interaction picture
(the free flow is factored out before integrating, so the integrand decays
like the nonlinearity itself). A power-law fit of the integrand norm over
the trailing half of the horizon provides an extrapolated tail bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyBand, NoContraction, TailNotDecaying
from .grids import (
    SpectralField,
    apply_velocity_function,
    to_frequency,
    to_physical,
    velocity_spectrum,
)
from .observables import smooth_bump
from .potentials import hartree_potential


@dataclass(frozen=True)
class ScatteringConfig:
    horizon: float                 # truncation of the improper time integrals
    dt: float = 0.05
    tol: float = 1e-10             # fixed-point tolerance (relative)
    max_iter: int = 30
    dealias: bool = True
    tail_estimate: bool = True
    check_tail_decay: bool = True

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.dt <= 0 or self.dt > self.horizon:
            raise ValueError("dt must lie in (0, horizon]")


@dataclass
class ScatteringResult:
    state: SpectralField           # scattering state (forward) or initial state (backward)
    residual_history: list
    tail_bound: float
    fitted_decay: float            # fitted integrand exponent beta in <t>^-beta
    integrand_times: np.ndarray
    integrand_norms: np.ndarray
    diagnostic_product: float      # ||w|| * ||psi||_Hs^2 smallness surrogate
    iterations: int = 0
    contraction_ratios: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.residual_history) == 0:
            raise ValueError("residual history must be non-empty")
        if not np.all(np.isfinite(self.residual_history)):
            raise ValueError("residual history contains non-finite values")


def _dispersion(grid):
    return np.sqrt(1.0 + grid.frequency_radius_squared())


def _hs_weight(grid, s):
    return (1.0 + grid.frequency_radius_squared()) ** s


def _hs_norm_hat(values, weight, w_freq):
    return float(np.sqrt(np.sum(weight * np.abs(values) ** 2) * w_freq))


def _interaction_frame(psi_hat, t, grid, kernel, dealias, disp):
    """exp(+i t <D>) (w*|psi|^2) psi in frequency representation."""
    psi_p = to_physical(SpectralField(grid, psi_hat, "frequency"))
    v = hartree_potential(psi_p, kernel, dealias=dealias)
    prod = SpectralField(grid, v.values.real * psi_p.values)
    return np.exp(1j * t * disp) * to_frequency(prod).values


def _fit_integrand_tail(times, norms, horizon):
    """Power-law fit C <t>^-beta of the integrand norm over [horizon/2, horizon];
    returns (beta, tail bound for the integral beyond the horizon)."""
    times = np.asarray(times)
    norms = np.asarray(norms)
    sel = (times >= horizon / 2.0) & (norms > 0)
    if np.count_nonzero(sel) < 4:
        return float("nan"), float("inf")
    x = np.log1p(times[sel])
    y = np.log(norms[sel])
    slope, intercept = np.polyfit(x, y, 1)
    beta = -slope
    if beta <= 1.0:
        return float(beta), float("inf")
    c = np.exp(intercept)
    tail = c * (1.0 + horizon) ** (1.0 - beta) / (beta - 1.0)
    return float(beta), float(tail)


def _check_tail_decay(times, norms, horizon):
    """The integrand norm must keep decreasing over the last quartile."""
    times = np.asarray(times)
    norms = np.asarray(norms)
    sel = times >= 0.75 * horizon
    tail = norms[sel]
    if tail.size < 8:
        return
    half = tail.size // 2
    if np.mean(tail[half:]) >= np.mean(tail[:half]):
        raise TailNotDecaying(
            "interaction integrand stopped decaying over the last quartile "
            f"(mean {np.mean(tail[:half]):.3e} -> {np.mean(tail[half:]):.3e})")


def _diagnostic_product(psi, kernel, s):
    strength = kernel.strength()
    return float(strength * psi.norm_hs(s) ** 2)


def inverse_wave(psi0: SpectralField, kernel, cfg: ScatteringConfig,
                 sample_times=None):
    """Map an initial state to its scattering state.

    Evolves by Strang splitting to the horizon while accumulating the
    interaction-picture Duhamel integral with the trapezoid rule; the
    scattering state is ``psi0 - i * integral``. Returns the result and,
    when ``sample_times`` is given, the interaction-picture frames nearest
    those times (for decay diagnostics).

    Raises TailNotDecaying if the integrand norm fails to decrease over the
    last quartile of the horizon.
    """
    from .dynamics import sobolev_index, strang_step

    grid = psi0.grid
    s = sobolev_index(grid.d)
    disp = _dispersion(grid)
    weight = _hs_weight(grid, s)
    w_freq = grid.freq_cell_volume
    n_steps = int(round(cfg.horizon / cfg.dt))
    dt = cfg.horizon / n_steps

    psi_hat = to_frequency(psi0)
    psi = psi_hat
    g_prev = _interaction_frame(psi_hat.values, 0.0, grid, kernel, cfg.dealias, disp)
    acc = np.zeros_like(g_prev)
    times = [0.0]
    norms = [_hs_norm_hat(g_prev, weight, w_freq)]

    wanted = list(sample_times) if sample_times is not None else []
    frames = {}

    def maybe_store(t, psi_field):
        if not wanted:
            return
        nearest = min(wanted, key=lambda u: abs(u - t))
        if abs(nearest - t) < dt / 2.0:
            phi = np.exp(1j * t * disp) * to_frequency(psi_field).values
            frames[nearest] = phi

    maybe_store(0.0, psi)
    for m in range(1, n_steps + 1):
        t = m * dt
        psi = strang_step(psi, kernel, dt, dealias=cfg.dealias)
        g = _interaction_frame(to_frequency(psi).values, t, grid, kernel,
                               cfg.dealias, disp)
        acc = acc + 0.5 * dt * (g_prev + g)
        g_prev = g
        times.append(t)
        norms.append(_hs_norm_hat(g, weight, w_freq))
        maybe_store(t, psi)

    if cfg.check_tail_decay:
        _check_tail_decay(times, norms, cfg.horizon)
    beta, tail = (_fit_integrand_tail(times, norms, cfg.horizon)
                  if cfg.tail_estimate else (float("nan"), float("inf")))

    state = SpectralField(grid, psi_hat.values - 1j * acc, "frequency")
    result = ScatteringResult(
        state=state,
        residual_history=list(norms),
        tail_bound=tail,
        fitted_decay=beta,
        integrand_times=np.asarray(times),
        integrand_norms=np.asarray(norms),
        diagnostic_product=_diagnostic_product(psi0, kernel, s),
    )
    if sample_times is not None:
        ordered = sorted(frames.items())
        return result, ([t for t, _ in ordered],
                        [SpectralField(grid, v, "frequency") for _, v in ordered])
    return result


def wave_operator(psi_plus: SpectralField, kernel, cfg: ScatteringConfig):
    """Map a scattering state back to an initial state.

    Solves the backward integral equation (free flow of the scattering
    state plus the Duhamel tail integral truncated at the horizon) by
    fixed-point iteration in the interaction picture, starting from the free
    solution. Raises NoContraction when successive-difference ratios exceed
    one twice in a row.
    """
    from .dynamics import sobolev_index

    grid = psi_plus.grid
    s = sobolev_index(grid.d)
    disp = _dispersion(grid)
    weight = _hs_weight(grid, s)
    w_freq = grid.freq_cell_volume
    n_steps = int(round(cfg.horizon / cfg.dt))
    dt = cfg.horizon / n_steps
    times = np.arange(n_steps + 1) * dt

    plus_hat = to_frequency(psi_plus).values
    scale = _hs_norm_hat(plus_hat, weight, w_freq)

    # interaction picture of the free solution is constant
    current = [plus_hat.copy() for _ in times]
    diffs, ratios = [], []
    converged = False
    norms = None
    for _ in range(cfg.max_iter):
        g = [_interaction_frame(np.exp(-1j * t * disp) * phi, t, grid, kernel,
                                cfg.dealias, disp)
             for t, phi in zip(times, current)]
        # reverse cumulative trapezoid: integral from t_m to the horizon
        total = np.zeros_like(g[0])
        partials = [None] * len(g)
        partials[-1] = total.copy()
        for m in range(len(g) - 2, -1, -1):
            total = total + 0.5 * dt * (g[m] + g[m + 1])
            partials[m] = total.copy()
        nxt = [plus_hat + 1j * p for p in partials]
        diff = max(_hs_norm_hat(a - b, weight, w_freq)
                   for a, b in zip(nxt, current))
        diffs.append(diff)
        if len(diffs) > 1 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
        current = nxt
        norms = [_hs_norm_hat(v, weight, w_freq) for v in g]
        if diff <= cfg.tol * scale:
            converged = True
            break
        if len(ratios) >= 2 and ratios[-1] > 1.0 and ratios[-2] > 1.0:
            raise NoContraction(ratios)

    beta, tail = (_fit_integrand_tail(times, norms, cfg.horizon)
                  if cfg.tail_estimate else (float("nan"), float("inf")))
    initial = SpectralField(grid, current[0], "frequency")
    return ScatteringResult(
        state=initial,
        residual_history=diffs,
        tail_bound=tail,
        fitted_decay=beta,
        integrand_times=times,
        integrand_norms=np.asarray(norms),
        diagnostic_product=_diagnostic_product(psi_plus, kernel, s),
        iterations=len(diffs),
        contraction_ratios=ratios,
    )


def roundtrip(psi: SpectralField, kernel, cfg: ScatteringConfig) -> float:
    """Relative Sobolev error of mapping to the scattering state and back."""
    from .dynamics import sobolev_index

    s = sobolev_index(psi.grid.d)
    forward = inverse_wave(psi, kernel, cfg)
    backward = wave_operator(forward.state, kernel, cfg)
    diff = SpectralField(psi.grid,
                         to_frequency(backward.state).values
                         - to_frequency(psi).values, "frequency")
    return diff.norm_hs(s) / psi.norm_hs(s)


@dataclass
class MinVelocityState:
    """A scattering state band-limited in squared velocity, and the initial
    state that evolves into it."""

    initial_state: SpectralField
    scattering_state: SpectralField
    wave_result: ScatteringResult
    band: tuple


def build_min_velocity_state(seed: SpectralField, kernel, band, amplitude,
                             cfg: ScatteringConfig) -> MinVelocityState:
    """Restrict a seed to squared velocities inside ``band`` and pull it back
    through the wave operator.

    A smooth bump supported strictly inside (band[0], band[1]) multiplies the
    seed in frequency space (band[0] <= 0 requests the identity filter); the
    filtered state is rescaled to the requested peak amplitude and mapped to
    an initial state by the backward fixed point.

    Raises EmptyBand when no lattice mode carries squared velocity inside the
    band.
    """
    lo, hi = band
    if not lo < hi <= 1.0:
        raise ValueError("band must satisfy lo < hi <= 1")
    if lo <= 0.0:
        filtered = seed
    else:
        spectrum = velocity_spectrum(seed.grid)
        if not np.any((spectrum > lo) & (spectrum < hi)):
            raise EmptyBand(f"no lattice mode with squared velocity in ({lo}, {hi})")
        filtered = apply_velocity_function(seed, smooth_bump(lo, hi))
    peak = to_physical(filtered).norm_linf()
    if peak == 0:
        raise EmptyBand("band filter annihilated the seed")
    psi_plus = to_frequency(filtered) * (amplitude / peak)
    back = wave_operator(psi_plus, kernel, cfg)
    return MinVelocityState(back.state, psi_plus, back, (lo, hi))
