"""Variational bounds on the mutual-information terms, computed exactly.

On discrete variables the bounds and their gaps are plain finite sums:

* prediction lower bound:     I(T;Y)   >= E_{q(y,t)} ln p(y|t) + H(Y),
  with gap E_{q(t)} KL[q(Y|t) || p(Y|t)];
* reconstruction lower bound: I(X;S,Y) >= E_{q(x,s,y)} ln r(x|s,y) + H(X),
  with gap E_{q(s,y)} KL[q(X|s,y) || r(X|s,y)];
* compression upper bound:    I(X;T)   <= E_{q(x,t)} ln q(t|x) - E_{q(t)} ln v(t),
  with gap KL[q(T) || v(T)] for any strictly positive prior v.

Each bound is tight exactly when its variational argument equals the true
conditional/marginal on the support, and the ``optimal_*`` helpers return
those arguments in closed form. A decoder/reconstructor/prior that assigns
zero mass to an outcome that actually occurs would make the bound -inf;
that degenerate case raises :class:`~iblab.errors.SupportError` instead of
poisoning downstream sweeps with infinities.

Conditioning cells with zero probability (a t or (s,y) that never occurs)
get uniform conditional rows by convention; they carry zero weight in every
expectation, so the choice is observationally inert.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SupportError, ValidationError
from .prob import (
    ZERO_CUT,
    CompositeJoint,
    Distribution,
    Encoder,
    JointXY,
    _check_rows,
    _frozen,
    compose_xsy,
    compose_xt,
    compose_yt,
    ensure_encoder,
    ensure_joint,
    kl_divergence,
    mutual_information,
)


@dataclass(frozen=True, eq=False)
class Decoder:
    """Row-stochastic p(y|t): one row per bottleneck symbol."""

    cond: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.cond, "Decoder", ndim=2)
        _check_rows(arr, "Decoder", 1e-12)
        object.__setattr__(self, "cond", arr)


@dataclass(frozen=True, eq=False)
class Reconstructor:
    """Row-stochastic r(x|s,y); row s * |Y| + y conditions on the pair (s, y)."""

    cond: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.cond, "Reconstructor", ndim=2)
        _check_rows(arr, "Reconstructor", 1e-12)
        object.__setattr__(self, "cond", arr)


@dataclass(frozen=True, eq=False)
class PriorT:
    """A prior distribution over the bottleneck variable."""

    probs: Distribution

    def __post_init__(self):
        p = self.probs if isinstance(self.probs, Distribution) else Distribution(self.probs)
        object.__setattr__(self, "probs", p)


def _as_prior(prior) -> np.ndarray:
    if isinstance(prior, PriorT):
        return prior.probs.probs
    if isinstance(prior, Distribution):
        return prior.probs
    return Distribution(np.asarray(prior, dtype=float)).probs


def _masked_plogq(p: np.ndarray, q: np.ndarray, what: str) -> float:
    """sum p ln q over the support of p; SupportError where q vanishes there."""
    mask = p > ZERO_CUT
    if np.any(mask & (q <= ZERO_CUT)):
        raise SupportError(f"{what}: zero probability assigned to an outcome that occurs")
    return float((p * np.where(mask, np.log(np.where(mask, q, 1.0)), 0.0)).sum())


def ity_lower_bound(data, enc_t, dec: Decoder) -> float:
    """E_{q(y,t)} ln p(y|t) + H(Y); never exceeds I(T;Y)."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    qyt = compose_yt(data, enc_t).tensor
    if dec.cond.shape != (enc_t.n_z, data.n_y):
        raise ValidationError(
            f"decoder shape {dec.cond.shape} does not match (|T|, |Y|) = "
            f"({enc_t.n_z}, {data.n_y})"
        )
    return _masked_plogq(qyt, dec.cond.T, "ity_lower_bound") + data.entropy_y()


def ixsy_lower_bound(data, enc_s, rec: Reconstructor) -> float:
    """E_{q(x,s,y)} ln r(x|s,y) + H(X); never exceeds I(X;S,Y)."""
    data, enc_s = ensure_joint(data), ensure_encoder(enc_s)
    q_xsy = compose_xsy(data, enc_s).tensor                    # (x, s, y)
    if rec.cond.shape != (enc_s.n_z * data.n_y, data.n_x):
        raise ValidationError(
            f"reconstructor shape {rec.cond.shape} does not match "
            f"(|S|*|Y|, |X|) = ({enc_s.n_z * data.n_y}, {data.n_x})"
        )
    # rows (s, y) -> tensor layout (s, y, x) -> align with q as (x, s, y)
    r_xsy = rec.cond.reshape(enc_s.n_z, data.n_y, data.n_x).transpose(2, 0, 1)
    return _masked_plogq(q_xsy, r_xsy, "ixsy_lower_bound") + data.entropy_x()


def vib_upper_bound(data, enc_t, prior) -> float:
    """E_{q(x,t)} ln q(t|x) - E_{q(t)} ln v(t); never falls below I(X;T)."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    v = _as_prior(prior)
    if v.shape[0] != enc_t.n_z:
        raise ValidationError(
            f"prior has {v.shape[0]} entries but the encoder has |T| = {enc_t.n_z}"
        )
    px = data.matrix.sum(axis=1)
    q = enc_t.cond
    qt = px @ q
    mask = q > ZERO_CUT
    cond_term = float(
        (px[:, None] * np.where(mask, q * np.log(np.where(mask, q, 1.0)), 0.0)).sum()
    )
    return cond_term - _masked_plogq(qt, v, "vib_upper_bound")


def _rows_from_joint(joint: np.ndarray) -> np.ndarray:
    """Conditional rows p(col | row) with uniform rows at zero-mass conditions."""
    mass = joint.sum(axis=1, keepdims=True)
    n_cols = joint.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(mass > ZERO_CUT, joint / np.where(mass > 0, mass, 1.0), 1.0 / n_cols)
    return rows


def optimal_decoder(data, enc_t) -> Decoder:
    """The tight argument q(y|t) of the prediction bound."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    qyt = compose_yt(data, enc_t).tensor                       # (y, t)
    return Decoder(_rows_from_joint(qyt.T))


def optimal_reconstructor(data, enc_s) -> Reconstructor:
    """The tight argument q(x|s,y) of the reconstruction bound."""
    data, enc_s = ensure_joint(data), ensure_encoder(enc_s)
    q_xsy = compose_xsy(data, enc_s).tensor                    # (x, s, y)
    joint_rows = q_xsy.transpose(1, 2, 0).reshape(enc_s.n_z * data.n_y, data.n_x)
    return Reconstructor(_rows_from_joint(joint_rows))


def bottleneck_prior(data, enc_t) -> PriorT:
    """The tight argument of the compression bound: the marginal q(t)."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    px = data.matrix.sum(axis=1)
    return PriorT(Distribution(px @ enc_t.cond))


class BoundCheck(NamedTuple):
    """Result of one verification: ``worst`` is the largest violation seen."""

    name: str
    passed: bool
    worst: float
    tolerance: float


def prediction_gap(data, enc_t, dec: Decoder) -> float:
    """E_{q(t)} KL[q(Y|t) || p(Y|t)]: the exact slack of the prediction bound."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    qyt = compose_yt(data, enc_t).tensor                       # (y, t)
    qt = qyt.sum(axis=0)
    truth = _rows_from_joint(qyt.T)
    return float(sum(
        qt[t] * kl_divergence(truth[t], dec.cond[t])
        for t in range(qt.shape[0]) if qt[t] > ZERO_CUT
    ))


def reconstruction_gap(data, enc_s, rec: Reconstructor) -> float:
    """E_{q(s,y)} KL[q(X|s,y) || r(X|s,y)]: exact slack of the reconstruction bound."""
    data, enc_s = ensure_joint(data), ensure_encoder(enc_s)
    q_xsy = compose_xsy(data, enc_s).tensor
    joint_rows = q_xsy.transpose(1, 2, 0).reshape(enc_s.n_z * data.n_y, data.n_x)
    mass = joint_rows.sum(axis=1)
    truth = _rows_from_joint(joint_rows)
    return float(sum(
        mass[i] * kl_divergence(truth[i], rec.cond[i])
        for i in range(mass.shape[0]) if mass[i] > ZERO_CUT
    ))


def compression_gap(data, enc_t, prior) -> float:
    """KL[q(T) || v(T)]: the exact slack of the compression bound."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    px = data.matrix.sum(axis=1)
    return kl_divergence(Distribution(px @ enc_t.cond), Distribution(_as_prior(prior)))


def _positive_rows(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    rows = np.maximum(rng.exponential(1.0, size=shape), 1e-12)
    return rows / rows.sum(axis=1, keepdims=True)


def run_bound_checks(data, seed: int = 0, trials: int = 25,
                     card_t: int | None = None, card_s: int | None = None,
                     tolerance: float = 1e-10) -> list[BoundCheck]:
    """Exercise every bound and gap identity on random variational arguments.

    Draws ``trials`` random (encoder, decoder, reconstructor, prior) tuples
    for the given instance and records the worst violation of each relation;
    also verifies that the closed-form optimal arguments make every bound
    tight. Used by the ``check`` CLI subcommand.
    """
    data = ensure_joint(data)
    card_t = data.n_y if card_t is None else int(card_t)
    card_s = min(data.n_x, 4) if card_s is None else int(card_s)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    worst: dict[str, float] = {}

    def record(name: str, violation: float) -> None:
        worst[name] = max(worst.get(name, 0.0), violation)

    for _ in range(trials):
        enc_t = Encoder(_positive_rows(rng, (data.n_x, card_t)))
        enc_s = Encoder(_positive_rows(rng, (data.n_x, card_s)))
        dec = Decoder(_positive_rows(rng, (card_t, data.n_y)))
        rec = Reconstructor(_positive_rows(rng, (card_s * data.n_y, data.n_x)))
        prior = PriorT(Distribution(_positive_rows(rng, (1, card_t))[0]))

        i_ty = mutual_information(compose_yt(data, enc_t))
        i_xt = mutual_information(compose_xt(data, enc_t))
        xsy = compose_xsy(data, enc_s).tensor
        i_xsy = mutual_information(
            CompositeJoint(xsy.reshape(data.n_x, -1), ("x", "sy"))
        )

        pred_lb = ity_lower_bound(data, enc_t, dec)
        rec_lb = ixsy_lower_bound(data, enc_s, rec)
        comp_ub = vib_upper_bound(data, enc_t, prior)

        record("prediction_lower_bound<=I(T;Y)", pred_lb - i_ty)
        record("dpi:I(T;Y)<=I(X;T)", i_ty - i_xt)
        record("compression_upper_bound>=I(X;T)", i_xt - comp_ub)
        record("reconstruction_lower_bound<=I(X;S,Y)", rec_lb - i_xsy)
        record("prediction_gap_identity",
               abs((i_ty - pred_lb) - prediction_gap(data, enc_t, dec)))
        record("reconstruction_gap_identity",
               abs((i_xsy - rec_lb) - reconstruction_gap(data, enc_s, rec)))
        record("compression_gap_identity",
               abs((comp_ub - i_xt) - compression_gap(data, enc_t, prior)))
        record("tight_at_optimal_decoder",
               abs(ity_lower_bound(data, enc_t, optimal_decoder(data, enc_t)) - i_ty))
        record("tight_at_optimal_reconstructor",
               abs(ixsy_lower_bound(data, enc_s, optimal_reconstructor(data, enc_s)) - i_xsy))
        record("tight_at_marginal_prior",
               abs(vib_upper_bound(data, enc_t, bottleneck_prior(data, enc_t)) - i_xt))

    return [
        BoundCheck(name, violation <= tolerance, violation, tolerance)
        for name, violation in worst.items()
    ]
