"""The disentanglement objective -I(T;Y) - I(X;S,Y) + I(S;T).

A single optimization of this objective over the encoder pair
(q(s|x), q(t|x)) drives the solution toward maximum compression,
I(X;T) = I(T;Y) = H(Y), without any trade-off multiplier: maximizing
I(X;S,Y) forces (S,Y) to cover all of X, maximizing I(T;Y) forces T to
cover Y, and minimizing I(S;T) removes the overlap, leaving exactly the
label-relevant information in T. The three terms carry fixed unit weights.

The objective never goes below -H(Y) - H(X) (``analytic_minimum``), and on
balanced deterministic instances with card_t >= |Y| and card_s >= the
largest class size that floor is attained exactly by t = class(x), s =
within-class index. I(S;T) is computed exactly from the discrete joints,
not estimated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import InstanceCache, disenib_value_grad, log_softmax
from .errors import ParameterError, ValidationError
from .optim import OptimizerConfig, descend, stack_inits
from .prob import ZERO_CUT, Encoder, InformationProfile, JointXY, ensure_joint

DEFAULT_EPSILON = 0.05
# More restarts than the trade-off optimizer: both encoders carry label
# permutation symmetry, so the saddle structure is richer.
DEFAULT_RESTARTS = 20


@dataclass(frozen=True, eq=False)
class DisenIBParams:
    """Logit pair realizing the encoders (q(t|x), q(s|x)) via row softmax."""

    logits_t: np.ndarray
    logits_s: np.ndarray

    def __post_init__(self):
        for name in ("logits_t", "logits_s"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise ValidationError(f"DisenIBParams: {name} must be a 2-d matrix")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"DisenIBParams: non-finite {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.logits_t.shape[0] != self.logits_s.shape[0]:
            raise ValidationError("DisenIBParams: logit blocks disagree on |X|")

    @property
    def n_x(self) -> int:
        return self.logits_t.shape[0]

    @property
    def card_t(self) -> int:
        return self.logits_t.shape[1]

    @property
    def card_s(self) -> int:
        return self.logits_s.shape[1]

    def realize_t(self) -> Encoder:
        return Encoder(log_softmax(self.logits_t)[1])

    def realize_s(self) -> Encoder:
        return Encoder(log_softmax(self.logits_s)[1])


@dataclass(frozen=True)
class ConsistencyReport:
    """Distance of a solution from maximum compression, with diagnostics.

    ``gap`` = |I(X;T) - H(Y)| + |I(T;Y) - H(Y)| and the verdict is
    ``gap < epsilon``. For data whose label is not a deterministic function
    of the source, I(X;Y) < H(Y) and the report carries ``i_xy`` so callers
    can judge against either candidate target; the verdict itself always
    uses H(Y). ``reconstruction_shortfall`` = H(X) - I(X;S,Y) shows how far
    the (S,Y) pair fell short of covering X, e.g. when card_s is too small;
    shortfalls are reported, never repaired.
    """

    gap: float
    epsilon: float
    consistent: bool
    i_xt: float
    i_ty: float
    i_xsy: float
    i_st: float
    objective: float
    h_y: float
    h_x: float
    i_xy: float
    converged: bool | None = None
    restarts_used: int | None = None
    best_restart_seed: int | None = None

    @property
    def reconstruction_shortfall(self) -> float:
        return self.h_x - self.i_xsy


def _check_dims(data: JointXY, params: DisenIBParams) -> None:
    if params.n_x != data.n_x:
        raise ValidationError(
            f"logits have {params.n_x} rows but the joint has |X| = {data.n_x}"
        )


def eval_disenib(data, params: DisenIBParams):
    """Evaluate the objective; returns (objective, InformationProfile)."""
    data = ensure_joint(data)
    _check_dims(data, params)
    cache = InstanceCache(data.matrix)
    obj, _grads, ex = disenib_value_grad(
        cache, params.logits_t[None], params.logits_s[None]
    )
    profile = InformationProfile(
        float(ex["i_xt"][0]), float(ex["i_ty"][0]),
        float(ex["i_xsy"][0]), float(ex["i_st"][0]),
    )
    return float(obj[0]), profile


def grad_disenib(data, params: DisenIBParams):
    """Exact gradients of the objective; returns (grad_logits_t, grad_logits_s)."""
    data = ensure_joint(data)
    _check_dims(data, params)
    cache = InstanceCache(data.matrix)
    _obj, grads, _ex = disenib_value_grad(
        cache, params.logits_t[None], params.logits_s[None]
    )
    return grads[0][0], grads[1][0]


def analytic_minimum(data) -> float:
    """The objective floor -H(Y) - H(X).

    Attained exactly only on balanced deterministic instances with
    card_t >= |Y| and card_s >= the largest class size; on other data it is
    a strict lower bound.
    """
    data = ensure_joint(data)
    return -data.entropy_y() - data.entropy_x()


def default_card_t(data) -> int:
    """Number of labels with positive mass: the smallest T that can carry Y."""
    data = ensure_joint(data)
    return int(np.count_nonzero(data.matrix.sum(axis=0) > ZERO_CUT))

def default_card_s(data) -> int:
    """Largest class support size: the smallest S for which (S,Y) can pin down X."""
    data = ensure_joint(data)
    return int((data.matrix > ZERO_CUT).sum(axis=0).max())


def consistency_check(data, params: DisenIBParams, epsilon: float = DEFAULT_EPSILON) -> ConsistencyReport:
    """Measure how far a given encoder pair sits from maximum compression."""
    data = ensure_joint(data)
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    objective, profile = eval_disenib(data, params)
    return _build_report(data, objective, profile, epsilon)


def _build_report(data: JointXY, objective: float, profile: InformationProfile,
                  epsilon: float, converged=None, restarts_used=None,
                  best_restart_seed=None) -> ConsistencyReport:
    h_y = data.entropy_y()
    gap = abs(profile.i_xt - h_y) + abs(profile.i_ty - h_y)
    return ConsistencyReport(
        gap=gap,
        epsilon=float(epsilon),
        consistent=bool(gap < epsilon),
        i_xt=profile.i_xt,
        i_ty=profile.i_ty,
        i_xsy=profile.i_xsy,
        i_st=profile.i_st,
        objective=objective,
        h_y=h_y,
        h_x=data.entropy_x(),
        i_xy=data.mutual_information(),
        converged=converged,
        restarts_used=restarts_used,
        best_restart_seed=best_restart_seed,
    )


def optimize_disenib(data, card_t: int | None = None, card_s: int | None = None,
                     cfg: OptimizerConfig | None = None,
                     epsilon: float = DEFAULT_EPSILON):
    """Single-optimization search for maximum compression.

    Multi-restart gradient descent on both logit blocks at once; there is no
    trade-off hyperparameter anywhere. Returns the best restart's
    ``(DisenIBParams, ConsistencyReport)``; non-convergence shows up in the
    report, it is never raised.
    """
    data = ensure_joint(data)
    cfg = cfg or OptimizerConfig(restarts=DEFAULT_RESTARTS)
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    needed_t = default_card_t(data)
    card_t = needed_t if card_t is None else int(card_t)
    card_s = default_card_s(data) if card_s is None else int(card_s)
    if card_t < needed_t:
        raise ParameterError(
            f"card_t = {card_t} cannot carry the {needed_t} labels with positive mass"
        )
    if card_s < 1:
        raise ParameterError(f"card_s must be >= 1, got {card_s}")

    cache = InstanceCache(data.matrix)
    blocks = stack_inits(
        cfg.seed, cfg.restarts, cfg.init_scale,
        [(data.n_x, card_t), (data.n_x, card_s)],
    )
    res = descend(lambda b: disenib_value_grad(cache, b[0], b[1]), blocks, cfg)
    r = res.best
    params = DisenIBParams(res.blocks[0][r], res.blocks[1][r])
    profile = InformationProfile(
        float(res.extras["i_xt"][r]), float(res.extras["i_ty"][r]),
        float(res.extras["i_xsy"][r]), float(res.extras["i_st"][r]),
    )
    report = _build_report(
        data, float(res.objective[r]), profile, epsilon,
        converged=bool(res.grad_norm[r] <= cfg.grad_tolerance),
        restarts_used=cfg.restarts,
        best_restart_seed=r,
    )
    return params, report
