"""Exception hierarchy shared by every module in the package."""


class CoopDecoherenceError(ValueError):
    """Base class for domain errors (bad inputs, violated invariants)."""


class InvalidStateError(CoopDecoherenceError):
    """A state vector or density matrix violates its invariants."""


class DimensionError(CoopDecoherenceError):
    """Operator, coupling or site index does not fit the state it is applied to."""


class DegenerateCouplingError(CoopDecoherenceError):
    """A qubit coupling triple has zero norm."""


class NotACodewordError(CoopDecoherenceError):
    """A state handed to the decoder is not in the image of the encoder."""


class DimensionCapError(CoopDecoherenceError):
    """A simulation would exceed the configured Hilbert-space dimension cap."""
