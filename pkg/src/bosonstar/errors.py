"""Exception types shared across the package."""


class BosonStarError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteSymbol(BosonStarError):
    """A multiplier symbol produced NaN or infinity on the frequency lattice."""


class GridMismatch(BosonStarError):
    """Two objects that must share a grid were built on different grids."""


class UnsupportedDimension(BosonStarError):
    """A closed-form expression is only available in specific dimensions."""


class BlowupDetected(BosonStarError):
    """Norm growth crossed the blow-up proxy threshold during evolution.

    Carries the detection time and the partial trajectory accumulated
    up to that point.
    """

    def __init__(self, t, trajectory=None):
        super().__init__(f"blow-up proxy triggered at t={t:.6g}")
        self.t = t
        self.trajectory = trajectory


class NoContraction(BosonStarError):
    """Fixed-point iteration failed to contract (data too large or horizon too long)."""

    def __init__(self, ratios):
        super().__init__(f"successive-difference ratios not contracting: {ratios}")
        self.ratios = ratios


class TailNotDecaying(BosonStarError):
    """The improper-integral integrand stopped decaying near the truncation horizon."""


class OverflowRisk(BosonStarError):
    """An exponentially weighted quantity exceeds double-precision range."""


class EmptyBand(BosonStarError):
    """No lattice mode falls inside the requested velocity band."""


class WrapAround(BosonStarError):
    """Field mass near the box boundary exceeds the wrap-around tolerance."""


class SupportLeak(BosonStarError):
    """Initial data carries mass outside its declared support region."""


class ConfigInvalid(BosonStarError):
    """Experiment configuration failed validation.

    ``messages`` holds field-level diagnostics.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        super().__init__("; ".join(messages))
        self.messages = list(messages)
