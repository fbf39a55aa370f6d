"""Error types shared across the package."""


class NumericsError(RuntimeError):
    """Raised when a computation leaves its numerically valid regime.

    Carries enough context (step or segment index, offending quantity) to
    point at the failing part of a run. The CLI maps this to exit code 2.
    """

    def __init__(self, message: str, *, step: int | None = None, segment: int | None = None):
        parts = [message]
        if segment is not None:
            parts.append(f"segment {segment}")
        if step is not None:
            parts.append(f"step {step}")
        super().__init__(" | ".join(parts))
        self.step = step
        self.segment = segment
