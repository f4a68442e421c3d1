"""Exception hierarchy shared by every module in the package."""


class AttentionHardnessError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(AttentionHardnessError, ValueError):
    """Operand dimensions are incompatible."""


class DegenerateRowError(AttentionHardnessError, ArithmeticError):
    """A row that must be normalized has a nonpositive (or zero) sum."""


class ArityError(AttentionHardnessError, ValueError):
    """A reduction received an empty sequence."""


class ConfigError(AttentionHardnessError, ValueError):
    """An attention or polynomial configuration is invalid or incomplete."""


class ResourceError(AttentionHardnessError):
    """A requested computation would exceed the configured size budget."""


class KindError(AttentionHardnessError, ValueError):
    """A problem instance has the wrong kind for the requested operation."""


class GenerationError(AttentionHardnessError):
    """A planted instance could not be produced within the retry budget."""


class VariantError(AttentionHardnessError, ValueError):
    """Unsupported (mechanism, mode) combination or out-of-range error budget."""


class BoundViolationError(VariantError):
    """An additive error budget exceeds the admissible ceiling."""


class SeparationError(AttentionHardnessError):
    """The yes/no output ranges of a gadget do not separate."""


class ConstructionError(AttentionHardnessError):
    """A gadget layout failed its structural self-check."""


class NumericalRangeError(AttentionHardnessError, OverflowError):
    """Values left the representable floating point range."""
