"""
Fitness registry.

The library maximizes, so the textbook minimization benchmarks are registered
negated:

    cubic       sum_i x_i^3 - 0.8 x_i^2 - 1000 x_i + 8000     box [-100, 100]
    sphere      -sum_i x_i^2                                   box [-5.12, 5.12]
    rosenbrock  -sum_{i<d-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2
                                                               box [-5, 10]
    griewank    -(1 + sum_i x_i^2 / 4000 - prod_i cos(x_i / sqrt(i + 1)))
                                                               box [-600, 600]

cubic has its box maximum 900,000 per axis at x = 100; the other three peak at
0 (origin for sphere and griewank, all-ones for rosenbrock). Rosenbrock with a
single axis has no terms and is identically 0.

Evaluators take positions axis-major, shaped (dims, n), and accumulate the
per-axis terms in ascending axis order with element-wise operations only, so a
batch of n particles is bitwise identical to n one-particle evaluations.
"""

from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from swarmq.errors import FitnessDomainError, UnknownNameError

BatchEvaluator = Callable[[np.ndarray], np.ndarray]


class FitnessFn(BaseModel):
    """A named fitness function with its per-axis box"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = Field(..., description="Registry identifier")
    lo: float = Field(..., description="Lower bound of every axis")
    hi: float = Field(..., description="Upper bound of every axis")
    evaluator: BatchEvaluator = Field(..., description="Maps (dims, n) positions to n fitness values")
    checked: bool = Field(True, description="Reject inputs outside [lo, hi]")

    def covers(self, lo: float, hi: float) -> bool:
        """True when [lo, hi] lies inside the box on every axis."""
        return not self.checked or (self.lo <= lo and hi <= self.hi)

    def check_domain(self, positions: np.ndarray) -> None:
        if self.checked and positions.size:
            lo = positions.min()
            hi = positions.max()
            if lo < self.lo or hi > self.hi or np.isnan(lo) or np.isnan(hi):
                raise FitnessDomainError(
                    f"{self.name}: input outside box [{self.lo}, {self.hi}] (min={lo}, max={hi})"
                )

    def evaluate_batch(self, positions: np.ndarray) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.float64)
        if positions.ndim != 2:
            raise ValueError(f"positions must be (dims, n), got shape {positions.shape}")
        self.check_domain(positions)
        return self.evaluator(positions)

    def __call__(self, pos) -> float:
        pos = np.asarray(pos, dtype=np.float64).reshape(-1, 1)
        return float(self.evaluate_batch(pos)[0])


def _cubic_batch(x: np.ndarray) -> np.ndarray:
    acc = np.zeros(x.shape[1])
    for d in range(x.shape[0]):
        xd = x[d]
        acc = acc + (xd * xd * xd - 0.8 * (xd * xd) - 1000.0 * xd + 8000.0)
    return acc


def _sphere_batch(x: np.ndarray) -> np.ndarray:
    acc = np.zeros(x.shape[1])
    for d in range(x.shape[0]):
        acc = acc + x[d] * x[d]
    return -acc


def _rosenbrock_batch(x: np.ndarray) -> np.ndarray:
    acc = np.zeros(x.shape[1])
    for d in range(x.shape[0] - 1):
        a = x[d + 1] - x[d] * x[d]
        b = 1.0 - x[d]
        acc = acc + (100.0 * (a * a) + b * b)
    return -acc


def _griewank_batch(x: np.ndarray) -> np.ndarray:
    total = np.zeros(x.shape[1])
    prod = np.ones(x.shape[1])
    for d in range(x.shape[0]):
        total = total + x[d] * x[d] / 4000.0
        prod = prod * np.cos(x[d] / np.sqrt(d + 1.0))
    return -(1.0 + total - prod)


CUBIC = FitnessFn(name="cubic", lo=-100.0, hi=100.0, evaluator=_cubic_batch)
SPHERE = FitnessFn(name="sphere", lo=-5.12, hi=5.12, evaluator=_sphere_batch)
ROSENBROCK = FitnessFn(name="rosenbrock", lo=-5.0, hi=10.0, evaluator=_rosenbrock_batch)
GRIEWANK = FitnessFn(name="griewank", lo=-600.0, hi=600.0, evaluator=_griewank_batch)

FITNESS: dict[str, FitnessFn] = {fn.name: fn for fn in (CUBIC, SPHERE, ROSENBROCK, GRIEWANK)}


def cubic(pos) -> float:
    return CUBIC(pos)


def sphere(pos) -> float:
    return SPHERE(pos)


def rosenbrock(pos) -> float:
    return ROSENBROCK(pos)


def griewank(pos) -> float:
    return GRIEWANK(pos)


def get_fitness(name: str) -> FitnessFn:
    try:
        return FITNESS[name]
    except KeyError:
        raise UnknownNameError("fitness", name, list(FITNESS)) from None


def negated(fn: FitnessFn) -> FitnessFn:
    """Turn a minimization objective into one the engines can maximize."""
    inner = fn.evaluator

    def _negated(x: np.ndarray) -> np.ndarray:
        return -inner(x)

    return FitnessFn(name=f"neg-{fn.name}", lo=fn.lo, hi=fn.hi, evaluator=_negated, checked=fn.checked)


def from_scalar(name: str, lo: float, hi: float, func: Callable[[np.ndarray], float]) -> FitnessFn:
    """Wrap a one-particle objective (dims reals -> real) as a batch evaluator.

    Intended for user objectives; columns are evaluated one at a time in
    particle order.
    """

    def _batch(x: np.ndarray) -> np.ndarray:
        return np.array([float(func(x[:, j])) for j in range(x.shape[1])], dtype=np.float64)

    return FitnessFn(name=name, lo=lo, hi=hi, evaluator=_batch)
