import dataclasses


@dataclasses.dataclass(frozen=True)
class DistanceRow:
    """One scale of a limit experiment: the distance to the limit dynamics at the horizon."""
    scale: float
    distance: float
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
