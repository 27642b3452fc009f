"""Exception types shared across the package."""


class ModelError(ValueError):
    """Invalid channel model or scheme parameters."""


class NotDivisible(ModelError):
    """Group size does not divide the element count (strict grouping)."""


class NonSquareGeometry(ModelError):
    """Operation requires M_x == M_y and d_x == d_y."""


class NoClosedForm(ModelError):
    """Requested reference law has no closed form for this prediction."""


class ZeroNoiseDegenerate(ModelError):
    """Observations are noise-free copies; mutual information is unbounded."""
