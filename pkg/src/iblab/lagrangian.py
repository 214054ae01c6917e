"""The compression/prediction trade-off objective -I(T;Y) + beta * h(I(X;T)).

``h`` is a monotonically increasing surrogate applied to the compression
term: the identity gives the classic trade-off objective, while strictly
convex choices (square, power, exponential) let a beta sweep trace the full
compression/prediction frontier even when the label is a deterministic
function of the source, where the identity surrogate only visits corners.

Optimization is plain multi-restart gradient descent on softmax logits (see
:mod:`iblab.optim`); restarts are the lever against local optima. Sweep
points are mutually independent and safe to compute in parallel; here they
run sequentially in ascending beta order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import InstanceCache, lagrangian_value_grad, log_softmax
from .errors import BracketError, ParameterError, ValidationError
from .optim import DescentResult, OptimizerConfig, descend, stack_inits
from .prob import Encoder, JointXY, ensure_joint

# A compression-targeting bisection accepts a point within this many nats.
COMPRESSION_TOL = 0.02
MAX_BISECT_STEPS = 30

_SURROGATE_KINDS = ("identity", "square", "power", "exponential")


@dataclass(frozen=True)
class Surrogate:
    """A monotone transform h applied to I(X;T); h(0) = 0 for every kind.

    kinds: ``identity`` h(r) = r; ``square`` h(r) = r^2; ``power`` h(r) = r^u
    with u > 1; ``exponential`` h(r) = exp(scale * r) - 1 with scale > 0.
    All but the identity are strictly convex on [0, inf).
    """

    kind: str = "identity"
    param: float | None = None

    def __post_init__(self):
        if self.kind not in _SURROGATE_KINDS:
            raise ParameterError(f"unknown surrogate kind {self.kind!r}")
        if self.kind == "power":
            if self.param is None or not self.param > 1.0:
                raise ParameterError("power surrogate requires exponent u > 1")
        elif self.kind == "exponential":
            if self.param is None or not self.param > 0.0:
                raise ParameterError("exponential surrogate requires scale > 0")
        elif self.param is not None:
            raise ParameterError(f"surrogate {self.kind!r} takes no parameter")

    def value(self, r):
        r = np.maximum(r, 0.0)  # guard float noise; mutual information is >= 0
        if self.kind == "identity":
            return r
        if self.kind == "square":
            return r * r
        if self.kind == "power":
            return r ** self.param
        return np.expm1(self.param * r)

    def deriv(self, r):
        r = np.maximum(r, 0.0)
        if self.kind == "identity":
            return np.ones_like(np.asarray(r, dtype=float))
        if self.kind == "square":
            return 2.0 * r
        if self.kind == "power":
            return self.param * r ** (self.param - 1.0)
        return self.param * np.exp(self.param * r)

    @classmethod
    def identity(cls) -> "Surrogate":
        return cls("identity")

    @classmethod
    def square(cls) -> "Surrogate":
        return cls("square")

    @classmethod
    def power(cls, u: float) -> "Surrogate":
        return cls("power", float(u))

    @classmethod
    def exponential(cls, scale: float) -> "Surrogate":
        return cls("exponential", float(scale))

    @classmethod
    def parse(cls, text: str) -> "Surrogate":
        """Parse ``identity``, ``square``, ``power:u`` or ``exp:s``."""
        name, sep, arg = text.partition(":")
        name = name.strip().lower()
        if name == "exp":
            name = "exponential"
        if name in ("identity", "square"):
            if sep:
                raise ParameterError(f"surrogate {name!r} takes no parameter")
            return cls(name)
        if name in ("power", "exponential"):
            if not sep:
                raise ParameterError(f"surrogate {name!r} needs a parameter, e.g. {name}:2")
            try:
                return cls(name, float(arg))
            except ValueError as exc:
                raise ParameterError(f"bad surrogate parameter {arg!r}") from exc
        raise ParameterError(f"unknown surrogate {text!r}")

    def spec_string(self) -> str:
        if self.param is None:
            return self.kind
        short = "exp" if self.kind == "exponential" else self.kind
        return f"{short}:{self.param:g}"


def as_surrogate(h) -> Surrogate:
    return h if isinstance(h, Surrogate) else Surrogate.parse(str(h))


@dataclass(frozen=True, eq=False)
class EncoderParams:
    """Unconstrained logits whose row-wise softmax is the encoder q(t|x)."""

    logits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.logits, dtype=float)
        if arr.ndim != 2:
            raise ValidationError("EncoderParams: logits must be a 2-d matrix")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("EncoderParams: non-finite logits")
        arr.setflags(write=False)
        object.__setattr__(self, "logits", arr)

    @property
    def n_x(self) -> int:
        return self.logits.shape[0]

    @property
    def card(self) -> int:
        return self.logits.shape[1]

    def realize(self) -> Encoder:
        return Encoder(log_softmax(self.logits)[1])


@dataclass(frozen=True)
class IBPoint:
    """One solved point on the compression/prediction plane."""

    beta: float
    i_xt: float
    i_ty: float
    objective: float
    converged: bool
    restarts_used: int
    best_restart_seed: int
    grad_norm: float = float("nan")
    params: EncoderParams | None = field(default=None, repr=False)


def _check_dims(data: JointXY, params: EncoderParams) -> None:
    if params.n_x != data.n_x:
        raise ValidationError(
            f"logits have {params.n_x} rows but the joint has |X| = {data.n_x}"
        )


def eval_lagrangian(data, params: EncoderParams, beta: float, h="identity"):
    """Evaluate the objective; returns (objective, i_xt, i_ty) in nats."""
    data = ensure_joint(data)
    h = as_surrogate(h)
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    _check_dims(data, params)
    cache = InstanceCache(data.matrix)
    obj, _grads, extras = lagrangian_value_grad(cache, params.logits[None], beta, h)
    return float(obj[0]), float(extras["i_xt"][0]), float(extras["i_ty"][0])


def grad_lagrangian(data, params: EncoderParams, beta: float, h="identity") -> np.ndarray:
    """Exact gradient of the objective with respect to the logits."""
    data = ensure_joint(data)
    h = as_surrogate(h)
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    _check_dims(data, params)
    cache = InstanceCache(data.matrix)
    _obj, grads, _extras = lagrangian_value_grad(cache, params.logits[None], beta, h)
    return grads[0][0]


def _point_from_result(beta: float, res: DescentResult, cfg: OptimizerConfig) -> IBPoint:
    r = res.best
    return IBPoint(
        beta=float(beta),
        i_xt=float(res.extras["i_xt"][r]),
        i_ty=float(res.extras["i_ty"][r]),
        objective=float(res.objective[r]),
        converged=bool(res.grad_norm[r] <= cfg.grad_tolerance),
        restarts_used=cfg.restarts,
        best_restart_seed=r,
        grad_norm=float(res.grad_norm[r]),
        params=EncoderParams(res.blocks[0][r]),
    )


def optimize_at_beta(data, beta: float, h="identity", card_t: int | None = None,
                     cfg: OptimizerConfig | None = None) -> IBPoint:
    """Minimize the objective at one beta with multi-restart descent.

    Returns the restart with the lowest objective. ``converged`` is True only
    if that restart met the gradient tolerance; non-convergence is reported,
    never raised. ``card_t`` defaults to |X| so the beta -> 0 endpoint can
    reach I(T;Y) = I(X;Y).
    """
    data = ensure_joint(data)
    h = as_surrogate(h)
    cfg = cfg or OptimizerConfig()
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    card_t = data.n_x if card_t is None else int(card_t)
    if card_t < 1:
        raise ParameterError(f"card_t must be >= 1, got {card_t}")
    cache = InstanceCache(data.matrix)
    blocks = stack_inits(cfg.seed, cfg.restarts, cfg.init_scale, [(data.n_x, card_t)])
    res = descend(lambda b: lagrangian_value_grad(cache, b[0], beta, h), blocks, cfg)
    return _point_from_result(beta, res, cfg)


def sweep_beta(data, betas, h="identity", card_t: int | None = None,
               cfg: OptimizerConfig | None = None) -> list[IBPoint]:
    """One optimized point per beta, in ascending order.

    Point j runs its own independent restarts, seeded from cfg.seed + j, so
    a single-element sweep is identical to :func:`optimize_at_beta` and any
    point can be recomputed in isolation.
    """
    data = ensure_joint(data)
    cfg = cfg or OptimizerConfig()
    betas = [float(b) for b in betas]
    if not betas:
        raise ParameterError("sweep_beta: empty beta list")
    if any(b < 0 for b in betas):
        raise ParameterError("sweep_beta: betas must be >= 0")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ParameterError("sweep_beta: betas must be ascending")
    return [
        optimize_at_beta(data, b, h, card_t, cfg.replace(seed=cfg.seed + j))
        for j, b in enumerate(betas)
    ]


def beta_at_compression(data, target_r: float, h="identity", card_t: int | None = None,
                        cfg: OptimizerConfig | None = None,
                        beta_lo: float = 1e-4, beta_hi: float = 4.0):
    """Bisect beta until the solved I(X;T) is within 0.02 nats of ``target_r``.

    I(X;T) of the optimized encoder decreases in beta, so beta_lo must land
    at or above the target and beta_hi at or below it; otherwise a
    :class:`~iblab.errors.BracketError` is raised. After 30 bisection steps
    the closest point found is returned even if it misses the tolerance, so
    callers must compare ``point.i_xt`` against the target themselves.

    Returns ``(beta, point)``.
    """
    data = ensure_joint(data)
    cfg = cfg or OptimizerConfig()
    if not beta_lo < beta_hi:
        raise ParameterError(f"need beta_lo < beta_hi, got [{beta_lo}, {beta_hi}]")
    if beta_lo < 0:
        raise ParameterError(f"beta_lo must be >= 0, got {beta_lo}")
    h_x = data.entropy_x()
    if not 0.0 <= target_r < h_x:
        raise ParameterError(
            f"target_r must lie in [0, H(X) = {h_x:.6f}), got {target_r}"
        )

    evals = 0

    def solve(beta: float) -> IBPoint:
        nonlocal evals
        point = optimize_at_beta(data, beta, h, card_t, cfg.replace(seed=cfg.seed + evals))
        evals += 1
        return point

    lo, hi = float(beta_lo), float(beta_hi)
    p_lo, p_hi = solve(lo), solve(hi)
    best = min([(lo, p_lo), (hi, p_hi)], key=lambda bp: abs(bp[1].i_xt - target_r))
    if abs(best[1].i_xt - target_r) <= COMPRESSION_TOL:
        return best
    if (p_lo.i_xt - target_r) * (p_hi.i_xt - target_r) > 0:
        raise BracketError(
            f"I(X;T) at both endpoints is on the same side of {target_r:.6f} nats "
            f"(lo: {p_lo.i_xt:.6f}, hi: {p_hi.i_xt:.6f})"
        )
    for _ in range(MAX_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        p_mid = solve(mid)
        if abs(p_mid.i_xt - target_r) < abs(best[1].i_xt - target_r):
            best = (mid, p_mid)
        if abs(p_mid.i_xt - target_r) <= COMPRESSION_TOL:
            return best
        # i_xt decreases in beta: overshoot above the target moves lo up.
        if p_mid.i_xt > target_r:
            lo = mid
        else:
            hi = mid
    return best
