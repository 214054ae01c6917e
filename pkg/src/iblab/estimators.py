"""scikit-learn style wrappers around the encoder optimizers.

Both estimators are fit on a joint distribution: ``X`` is the |X| x |Y|
probability matrix itself (or a :class:`~iblab.prob.JointXY`), not a sample
matrix. After fitting, ``transform`` maps arrays of source-symbol indices
to posterior rows over the learned bottleneck, and ``predict`` decodes the
most probable label index through the closed-form optimal decoder, so the
fitted encoders compose with ordinary pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .disenib import optimize_disenib
from .errors import ValidationError
from .lagrangian import optimize_at_beta
from .optim import OptimizerConfig
from .prob import ensure_joint
from .variational import optimal_decoder


def _as_indices(X, n_x: int) -> np.ndarray:
    idx = np.asarray(X)
    if idx.ndim == 2 and idx.shape[1] == 1:
        idx = idx[:, 0]
    if idx.ndim != 1:
        raise ValidationError("expected a 1-d array of source-symbol indices")
    idx = idx.astype(int)
    if np.any(idx < 0) or np.any(idx >= n_x):
        raise ValidationError(f"source indices must lie in [0, {n_x})")
    return idx


class _EncoderEstimator(TransformerMixin, BaseEstimator):
    """Shared fitted-state plumbing; subclasses set encoder_/decoder_ in fit."""

    def _optimizer_config(self, restarts_default: int) -> OptimizerConfig:
        return OptimizerConfig(
            step_size=self.step_size,
            max_iters=self.max_iters,
            grad_tolerance=self.grad_tolerance,
            restarts=restarts_default if self.restarts is None else self.restarts,
            init_scale=self.init_scale,
            seed=0 if self.random_state is None else int(self.random_state),
        )

    def transform(self, X):
        """Posterior rows q(t|x) for an array of source-symbol indices."""
        check_is_fitted(self, "encoder_")
        return self.encoder_[_as_indices(X, self.encoder_.shape[0])]

    def predict(self, X):
        """Most probable label index for each source symbol, via the decoder."""
        check_is_fitted(self, "decoder_")
        posterior_y = self.transform(X) @ self.decoder_
        return np.argmax(posterior_y, axis=1)


class IBLagrangian(_EncoderEstimator):
    """Bottleneck encoder fit by minimizing -I(T;Y) + beta * h(I(X;T)).

    Parameters
    ----------
    beta : float, default 0.5
        Trade-off multiplier on the compression term.
    surrogate : str, default "identity"
        ``identity``, ``square``, ``power:u`` or ``exp:s``.
    card_t : int or None
        Bottleneck cardinality; defaults to |X| so beta -> 0 can recover all
        label information.
    restarts : int or None
        Independent descent restarts (None = 10).
    random_state : int, default 0
        Master seed for the restart substreams.

    Attributes
    ----------
    encoder_ : ndarray (|X|, card_t); fitted q(t|x).
    decoder_ : ndarray (card_t, |Y|); closed-form optimal p(y|t).
    point_ : IBPoint with the solved (beta, I(X;T), I(T;Y), objective).
    i_xt_, i_ty_, objective_, converged_ : scalars copied from ``point_``.
    """

    def __init__(self, beta=0.5, surrogate="identity", card_t=None, step_size=0.1,
                 max_iters=5000, grad_tolerance=1e-7, restarts=None,
                 init_scale=0.1, random_state=0):
        self.beta = beta
        self.surrogate = surrogate
        self.card_t = card_t
        self.step_size = step_size
        self.max_iters = max_iters
        self.grad_tolerance = grad_tolerance
        self.restarts = restarts
        self.init_scale = init_scale
        self.random_state = random_state

    def fit(self, X, y=None):
        joint = ensure_joint(X)
        cfg = self._optimizer_config(restarts_default=10)
        point = optimize_at_beta(joint, self.beta, self.surrogate, self.card_t, cfg)
        encoder = point.params.realize()
        self.joint_ = joint
        self.point_ = point
        self.encoder_ = encoder.cond
        self.decoder_ = optimal_decoder(joint, encoder).cond
        self.i_xt_ = point.i_xt
        self.i_ty_ = point.i_ty
        self.objective_ = point.objective
        self.converged_ = point.converged
        self.n_features_in_ = joint.n_y
        return self


class DisenIB(_EncoderEstimator):
    """Encoder pair fit by minimizing -I(T;Y) - I(X;S,Y) + I(S;T).

    A single fit, with no trade-off hyperparameter, drives the
    label-relevant encoder T toward maximum compression
    (I(X;T) = I(T;Y) = H(Y)) while the nuisance encoder S absorbs the
    label-irrelevant remainder of X.

    Parameters
    ----------
    card_t : int or None
        Cardinality of T; defaults to the number of labels with mass.
    card_s : int or None
        Cardinality of S; defaults to the largest class support size.
    epsilon : float, default 0.05
        Gap threshold (nats) for the maximum-compression verdict.
    restarts : int or None
        Independent descent restarts (None = 20).

    Attributes
    ----------
    encoder_ : ndarray; fitted q(t|x) (alias ``encoder_t_``).
    encoder_s_ : ndarray; fitted q(s|x).
    decoder_ : ndarray; closed-form optimal p(y|t).
    report_ : ConsistencyReport with the four mutual informations and verdict.
    consistent_, gap_ : verdict shortcuts copied from ``report_``.
    """

    def __init__(self, card_t=None, card_s=None, epsilon=0.05, step_size=0.1,
                 max_iters=5000, grad_tolerance=1e-7, restarts=None,
                 init_scale=0.1, random_state=0):
        self.card_t = card_t
        self.card_s = card_s
        self.epsilon = epsilon
        self.step_size = step_size
        self.max_iters = max_iters
        self.grad_tolerance = grad_tolerance
        self.restarts = restarts
        self.init_scale = init_scale
        self.random_state = random_state

    def fit(self, X, y=None):
        joint = ensure_joint(X)
        cfg = self._optimizer_config(restarts_default=20)
        params, report = optimize_disenib(
            joint, self.card_t, self.card_s, cfg, epsilon=self.epsilon
        )
        enc_t = params.realize_t()
        self.joint_ = joint
        self.params_ = params
        self.report_ = report
        self.encoder_ = enc_t.cond
        self.encoder_t_ = enc_t.cond
        self.encoder_s_ = params.realize_s().cond
        self.decoder_ = optimal_decoder(joint, enc_t).cond
        self.i_xt_ = report.i_xt
        self.i_ty_ = report.i_ty
        self.objective_ = report.objective
        self.gap_ = report.gap
        self.consistent_ = report.consistent
        self.converged_ = report.converged
        self.n_features_in_ = joint.n_y
        return self

    def transform_s(self, X):
        """Posterior rows q(s|x) of the nuisance encoder."""
        check_is_fitted(self, "encoder_s_")
        return self.encoder_s_[_as_indices(X, self.encoder_s_.shape[0])]
