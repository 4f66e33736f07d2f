"""
Run results shared by every engine
"""

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from swarmq.swarm import GlobalBest, SwarmState

# Called after every completed iteration; must not mutate the state
Observer = Callable[[int, SwarmState, GlobalBest], None]


@dataclass
class RunResult:
    """Final global best plus per-iteration trace of one engine run"""

    engine: str
    gbest_fit: float
    gbest_pos: np.ndarray
    gbest_particle: int
    trace: np.ndarray
    occupancy: np.ndarray
    seconds: float

    @property
    def checksum(self) -> str:
        return trace_checksum(self.trace)


def trace_checksum(trace) -> str:
    """sha256 over the little-endian float64 bytes of a gbest_fit trace."""
    data = np.ascontiguousarray(np.asarray(trace, dtype="<f8")).tobytes()
    return hashlib.sha256(data).hexdigest()


def notify(observer: Optional[Observer], iteration: int, state: SwarmState, gbest: GlobalBest) -> None:
    if observer is not None:
        observer(iteration, state, gbest)
