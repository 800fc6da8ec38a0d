import numpy as np
import numpy.typing as npt


"""
RngStream:

Seeded, splittable random stream. Built on the counter-based Philox bit
generator keyed by (seed, spawn key), so a substream depends only on its
index and never on how many draws its siblings made.
"""
class RngStream:

    def __init__(self, seed: int = 0, key: tuple = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.key = tuple(int(k) for k in key)
        seedseq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.Philox(seedseq))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.key + (int(index),))

    def spawn(self, n: int) -> list["RngStream"]:
        return [self.substream(i) for i in range(n)]

    def normal(self, size=None) -> npt.NDArray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0) -> npt.NDArray:
        return self.generator.uniform(low, high, size)

    def choice(self, n: int, size: int, p: npt.NDArray = None) -> npt.NDArray:
        return self.generator.choice(n, size=size, replace=True, p=p)


# fixed substream slots, so adding draws to one phase never shifts another
INIT_STREAM = 0
STEP_STREAM = 1
REFERENCE_STREAM = 2
