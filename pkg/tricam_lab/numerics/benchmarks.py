"""
Wall-clock timing of the convolution backends.

Used by the bench subcommand to show the scan backend growing
linearly in n while the fourier backend grows like n log n.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from numerics.field import make_grid
from numerics.kernels import G1, get_backend

logger = logging.getLogger('numerics')


@dataclass
class BackendTiming:
    """Best-of-repeats seconds per convolution for each grid size."""

    backend: str
    sizes: List[int] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)

    def growth_per_doubling(self) -> List[float]:
        """Time ratio between consecutive sizes, normalised to one doubling of n."""
        ratios = []
        for i in range(1, len(self.sizes)):
            doublings = math.log2(self.sizes[i] / self.sizes[i - 1])
            ratios.append((self.seconds[i] / self.seconds[i - 1]) ** (1.0 / doublings))
        return ratios


def time_backend(backend: str, sizes: Sequence[int], repeats: int = 5,
                 domain_l: float = 20.0, seed: int = 0) -> BackendTiming:
    """Time G₁ convolution of a random smooth field at each size."""
    rng = np.random.default_rng(seed)
    impl = get_backend(backend)
    timing = BackendTiming(backend=str(backend))

    for n in sizes:
        grid = make_grid(-domain_l, domain_l, n)
        values = np.exp(-grid.x ** 2) * (1.0 + 0.1 * rng.standard_normal())
        impl.apply(values, grid, G1)  # warm caches before timing
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            impl.apply(values, grid, G1)
            best = min(best, time.perf_counter() - start)
        timing.sizes.append(int(n))
        timing.seconds.append(best)
        logger.info('%s backend n=%d: %.3e s', backend, n, best)

    return timing


def benchmark_backends(sizes: Sequence[int], backends: Sequence[str] = ('scan', 'fourier'),
                       repeats: int = 5) -> Dict[str, BackendTiming]:
    return {name: time_backend(name, sizes, repeats) for name in backends}
