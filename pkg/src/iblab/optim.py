"""Multi-restart fixed-step gradient descent over encoder logits.

The engine evaluates all restarts of one optimization as a single batched
tensor computation; each restart's trajectory depends only on its own rows,
so results match running the restarts one at a time. Restarts draw their
initial logits from substreams spawned off the configured master seed,
giving deterministic, platform-independent output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for one multi-restart gradient-descent run.

    ``grad_tolerance`` is an infinity-norm stopping threshold; a run that
    never reaches it simply uses the full iteration budget and is reported
    as unconverged rather than raising.

    The default step is sized so that the softmax saturation tail (optimal
    encoders are deterministic, so logits keep growing and the residual
    information gap decays like 1/(step * iterations)) lands well inside
    the acceptance tolerances within the default iteration budget.
    """

    step_size: float = 0.5
    max_iters: int = 5000
    grad_tolerance: float = 1e-7
    restarts: int = 10
    init_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ParameterError(f"step_size must be > 0, got {self.step_size}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.grad_tolerance > 0:
            raise ParameterError(f"grad_tolerance must be > 0, got {self.grad_tolerance}")
        if self.restarts < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if self.init_scale < 0:
            raise ParameterError(f"init_scale must be >= 0, got {self.init_scale}")
        if int(self.seed) < 0:
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed}")

    def replace(self, **changes) -> "OptimizerConfig":
        return dataclasses.replace(self, **changes)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    """Independent substream for one restart of a run with master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(restart,)))


def stack_inits(seed: int, restarts: int, scale: float, shapes) -> list[np.ndarray]:
    """Initial logit blocks, one (restarts, *shape) array per block.

    Restart r draws all of its blocks sequentially from its own substream.
    """
    blocks = [np.empty((restarts,) + tuple(shape)) for shape in shapes]
    for r in range(restarts):
        rng = restart_rng(seed, r)
        for block, shape in zip(blocks, shapes):
            block[r] = rng.normal(0.0, scale, size=shape)
    return blocks


@dataclass(frozen=True)
class DescentResult:
    """Final state of a batched descent: one entry per restart."""

    blocks: list[np.ndarray]
    objective: np.ndarray
    grad_norm: np.ndarray
    extras: dict[str, np.ndarray]
    iterations: int

    @property
    def best(self) -> int:
        """Index of the restart with the lowest final objective."""
        return int(np.argmin(self.objective))


def descend(value_grad, blocks: list[np.ndarray], cfg: OptimizerConfig) -> DescentResult:
    """Run fixed-step gradient descent on every restart in the batch.

    ``value_grad(blocks) -> (objective, grads, extras)`` with one leading
    restart axis throughout. Stops when every restart's gradient infinity
    norm falls below the tolerance or the iteration budget is exhausted;
    the returned objective/extras correspond to the returned blocks.
    """
    restarts = blocks[0].shape[0]
    iteration = 0
    while True:
        objective, grads, extras = value_grad(blocks)
        grad_norm = np.zeros(restarts)
        for g in grads:
            np.maximum(grad_norm, np.abs(g).reshape(restarts, -1).max(axis=1), out=grad_norm)
        if iteration >= cfg.max_iters or np.all(grad_norm <= cfg.grad_tolerance):
            return DescentResult(blocks, objective, grad_norm, extras, iteration)
        blocks = [b - cfg.step_size * g for b, g in zip(blocks, grads)]
        iteration += 1
