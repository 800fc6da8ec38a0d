import dataclasses
import math


SCHEDULE_KINDS = ("constant", "logarithmic", "geometric")


def log_cooling(k: float, C: float = 1.0) -> float:
    """Classical annealing temperature C / log(k + 2)."""
    if k < 0:
        raise ValueError(f"cooling step must be non-negative, got {k}")
    if C <= 0:
        raise ValueError(f"cooling constant must be positive, got {C}")
    return C / math.log(k + 2.0)


@dataclasses.dataclass(frozen=True)
class Schedule:
    """
    Step- or time-indexed positive parameter law, used for temperatures and
    diffusion strengths. `value` is the constant level or the starting level
    of a geometric schedule; `C` is the logarithmic constant.
    """
    kind: str = "logarithmic"
    value: float = 1.0
    C: float = 1.0
    ratio: float = 0.99

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind '{self.kind}', expected {SCHEDULE_KINDS}")
        if self.value <= 0 or self.C <= 0:
            raise ValueError("schedule levels must be strictly positive")
        if self.kind == "geometric" and not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"geometric ratio must lie in (0, 1], got {self.ratio}")

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls(kind="constant", value=value)

    @classmethod
    def logarithmic(cls, C: float = 1.0) -> "Schedule":
        return cls(kind="logarithmic", C=C)

    @classmethod
    def geometric(cls, start: float, ratio: float) -> "Schedule":
        return cls(kind="geometric", value=start, ratio=ratio)

    def value_at(self, k: float) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "logarithmic":
            return log_cooling(k, self.C)
        return self.value * self.ratio**k
