"""Batched objective/gradient kernels shared by the optimizers.

Encoders are parameterized by unconstrained logits realized through a
row-wise softmax, and a batch of R restarts is evaluated at once: logits
have shape (R, n_x, card). Every reduction stays within a single restart's
row block, so results are independent of how runs are batched.

Gradients are exact. With q short for the realized conditionals:

    dI(X;T)  / dq(t|x) = p(x) ln[q(t|x) / q(t)]
    dI(T;Y)  / dq(t|x) = sum_y p(x,y) ln q(y|t)
    dI(X;SY) / dq(s|x) = sum_y p(x,y) ln q(x|s,y)
    dI(S;T)  / dq(s|x) = p(x) sum_t q(t|x) ln[q(s,t) / q(s)]   (and sym. in t)

followed by the softmax chain rule per row. Joint cells that vanish
(possible only where the data itself has zero mass) are floored before the
log; the flooring only ever touches cells that are multiplied by zero mass,
so 0 ln 0 = 0 holds and no -inf or nan propagates.
"""

from __future__ import annotations

import numpy as np

# Log floor: keeps logs finite on exactly-zero cells, all of which carry
# zero weight in every sum they enter.
_TINY = 1e-300


def log_softmax(logits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stable row-wise log-softmax over the last axis; returns (log q, q)."""
    shift = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shift)
    z = e.sum(axis=-1, keepdims=True)
    return shift - np.log(z), e / z


def _flog(a: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(a, _TINY))


def softmax_chain(q: np.ndarray, grad_q: np.ndarray) -> np.ndarray:
    """Pull a gradient in conditional-probability space back to logits."""
    inner = (q * grad_q).sum(axis=-1, keepdims=True)
    return q * (grad_q - inner)


class InstanceCache:
    """Per-instance constants reused across optimizer iterations."""

    __slots__ = (
        "pxy", "pxy_t", "px", "py", "n_x", "n_y",
        "row_plogp", "h_x", "h_y", "h_y_given_x", "i_xy",
    )

    def __init__(self, matrix: np.ndarray):
        pxy = np.ascontiguousarray(matrix, dtype=float)
        self.pxy = pxy
        self.pxy_t = np.ascontiguousarray(pxy.T)
        self.px = pxy.sum(axis=1)
        self.py = pxy.sum(axis=0)
        self.n_x, self.n_y = pxy.shape
        mask = pxy > 0.0
        # row_plogp[x] = sum_y p(x,y) ln p(x,y)
        self.row_plogp = np.where(mask, pxy * _flog(pxy), 0.0).sum(axis=1)
        self.h_x = -float(np.where(self.px > 0.0, self.px * _flog(self.px), 0.0).sum())
        self.h_y = -float(np.where(self.py > 0.0, self.py * _flog(self.py), 0.0).sum())
        # H(Y|X) = H(X,Y) - H(X)
        self.h_y_given_x = -float(self.row_plogp.sum()) - self.h_x
        self.i_xy = self.h_y - self.h_y_given_x


def _t_side_terms(cache: InstanceCache, logits_t: np.ndarray):
    """Quantities shared by both objectives for the label-relevant encoder."""
    lq_t, q_t = log_softmax(logits_t)                  # (R, n, ct)
    qt = np.matmul(cache.px, q_t)                      # q(t): (R, ct)
    ln_qt = _flog(qt)
    qyt = np.matmul(cache.pxy_t, q_t)                  # q(y,t): (R, m, ct)
    ln_qyt = _flog(qyt)
    e_t = (qt * ln_qt).sum(axis=-1)                    # -H(T)
    e_yt = (qyt * ln_qyt).sum(axis=(-2, -1))           # -H(Y,T)
    i_ty = cache.h_y - e_t + e_yt
    # sum_x p(x) sum_t q(t|x) ln q(t|x) = -H(T|X)
    cond_t = np.matmul(cache.px, q_t * lq_t).sum(axis=-1)
    i_xt = cond_t - e_t
    # dI(T;Y)/dq(t|x); zero cells of q(y,t) only pair with p(x,y) = 0
    grad_ity_q = np.matmul(cache.pxy, ln_qyt - ln_qt[:, None, :])
    return lq_t, q_t, qt, ln_qt, e_t, i_ty, i_xt, grad_ity_q


def lagrangian_value_grad(cache: InstanceCache, logits_t: np.ndarray, beta: float, h):
    """Objective -I(T;Y) + beta * h(I(X;T)) and its logit gradient.

    ``h`` is a surrogate with vectorized ``value``/``deriv`` methods.
    Returns (objective (R,), [grad (R,n,ct)], extras dict).
    """
    lq_t, q_t, qt, ln_qt, _e_t, i_ty, i_xt, grad_ity_q = _t_side_terms(cache, logits_t)
    objective = -i_ty + beta * h.value(i_xt)
    # dI(X;T)/dq(t|x) = p(x) (ln q(t|x) - ln q(t))
    grad_ixt_q = cache.px[None, :, None] * (lq_t - ln_qt[:, None, :])
    grad_q = -grad_ity_q + (beta * h.deriv(i_xt))[:, None, None] * grad_ixt_q
    grad = softmax_chain(q_t, grad_q)
    return objective, [grad], {"i_xt": i_xt, "i_ty": i_ty}


def disenib_value_grad(cache: InstanceCache, logits_t: np.ndarray, logits_s: np.ndarray):
    """Objective -I(T;Y) - I(X;S,Y) + I(S;T) and its logit gradients.

    Returns (objective (R,), [grad_t, grad_s], extras dict with all four
    mutual informations).
    """
    lq_t, q_t, qt, ln_qt, e_t, i_ty, i_xt, grad_ity_q = _t_side_terms(cache, logits_t)

    lq_s, q_s = log_softmax(logits_s)                  # (R, n, cs)
    qs = np.matmul(cache.px, q_s)                      # q(s): (R, cs)
    ln_qs = _flog(qs)
    qsy = np.matmul(cache.pxy_t, q_s)                  # q(y,s): (R, m, cs)
    ln_qsy = _flog(qsy)
    e_s = (qs * ln_qs).sum(axis=-1)                    # -H(S)
    e_sy = (qsy * ln_qsy).sum(axis=(-2, -1))           # -H(S,Y)
    cond_s = np.matmul(cache.px, q_s * lq_s).sum(axis=-1)   # -H(S|X)
    # I(X;S,Y) = H(S,Y) - H(S|X) - H(Y|X)
    i_xsy = cond_s - e_sy - cache.h_y_given_x

    # q(s,t) = sum_x p(x) q(s|x) q(t|x): (R, cs, ct)
    qst = np.matmul((q_s * cache.px[:, None]).transpose(0, 2, 1), q_t)
    ln_qst = _flog(qst)
    e_st = (qst * ln_qst).sum(axis=(-2, -1))           # -H(S,T)
    i_st = e_st - e_s - e_t

    objective = -i_ty - i_xsy + i_st

    # dI(X;SY)/dq(s|x) = sum_y p(x,y) ln q(x|s,y)
    grad_ixsy_q = (
        cache.px[:, None] * lq_s
        + cache.row_plogp[:, None]
        - np.matmul(cache.pxy, ln_qsy)
    )
    # dI(S;T)/dq(s|x) = p(x) sum_t q(t|x) ln q(t|s); symmetric for t
    grad_ist_qs = cache.px[:, None] * (
        np.matmul(q_t, ln_qst.transpose(0, 2, 1)) - ln_qs[:, None, :]
    )
    grad_ist_qt = cache.px[:, None] * (
        np.matmul(q_s, ln_qst) - ln_qt[:, None, :]
    )

    grad_t = softmax_chain(q_t, grad_ist_qt - grad_ity_q)
    grad_s = softmax_chain(q_s, grad_ist_qs - grad_ixsy_q)
    extras = {"i_xt": i_xt, "i_ty": i_ty, "i_xsy": i_xsy, "i_st": i_st}
    return objective, [grad_t, grad_s], extras
