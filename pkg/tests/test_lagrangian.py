import math

import numpy as np
import pytest

from iblab import (
    BracketError,
    EncoderParams,
    ParameterError,
    Surrogate,
    beta_at_compression,
    eval_lagrangian,
    grad_lagrangian,
    make_deterministic,
    make_noisy,
    make_random_joint,
    optimize_at_beta,
    sweep_beta,
)
from iblab.optim import OptimizerConfig
from oracles import fd_grad, mi_oracle, rel_err

LN2 = math.log(2.0)
NOISY = make_noisy(8, 2, 0.2)
ALL_SURROGATES = (
    Surrogate.identity(), Surrogate.square(), Surrogate.power(1.5),
    Surrogate.exponential(2.0),
)


# ---------------------------------------------------------------- surrogate

def test_surrogate_values_and_derivatives():
    r = 0.75
    assert Surrogate.identity().value(r) == r
    assert Surrogate.identity().deriv(r) == 1.0
    assert Surrogate.square().value(r) == pytest.approx(r * r)
    assert Surrogate.square().deriv(r) == pytest.approx(2 * r)
    assert Surrogate.power(1.5).value(r) == pytest.approx(r ** 1.5)
    assert Surrogate.power(1.5).deriv(r) == pytest.approx(1.5 * r ** 0.5)
    assert Surrogate.exponential(2.0).value(r) == pytest.approx(math.exp(2 * r) - 1)
    assert Surrogate.exponential(2.0).deriv(r) == pytest.approx(2 * math.exp(2 * r))


def test_surrogate_zero_at_origin():
    for h in ALL_SURROGATES:
        assert h.value(0.0) == 0.0


def test_surrogate_monotone_convex_grid():
    grid = np.linspace(0.0, 3.0, 31)
    for h in ALL_SURROGATES:
        values = h.value(grid)
        diffs = np.diff(values)
        assert np.all(diffs >= 0.0)
        if h.kind != "identity":
            assert np.all(np.diff(diffs) > -1e-12)  # convex


def test_surrogate_parse():
    assert Surrogate.parse("identity").kind == "identity"
    assert Surrogate.parse("square").spec_string() == "square"
    assert Surrogate.parse("power:1.5") == Surrogate.power(1.5)
    assert Surrogate.parse("exp:2") == Surrogate.exponential(2.0)
    for bad in ("power", "power:1", "exp:-1", "cubic", "identity:3"):
        with pytest.raises(ParameterError):
            Surrogate.parse(bad)


# ---------------------------------------------------------------- eval

def test_eval_beta_zero_is_minus_ity():
    data = make_random_joint(5, 3, seed=2)
    params = EncoderParams(np.random.default_rng(0).normal(0, 1, (5, 3)))
    for h in ALL_SURROGATES:
        obj, i_xt, i_ty = eval_lagrangian(data, params, 0.0, h)
        assert obj == pytest.approx(-i_ty, abs=1e-15)


def test_eval_uniform_encoder_objective_is_zero():
    data = make_random_joint(6, 3, seed=5)
    params = EncoderParams(np.zeros((6, 4)))
    for h in ALL_SURROGATES:
        for beta in (0.0, 0.5, 2.0):
            obj, i_xt, i_ty = eval_lagrangian(data, params, beta, h)
            assert abs(obj) <= 1e-12
            assert abs(i_xt) <= 1e-12 and abs(i_ty) <= 1e-12


def test_eval_class_encoder_half_beta():
    # identity-on-class encoder via saturated logits: obj = -ln2 + 0.5 ln2
    data = make_deterministic(4, 2)
    logits = 40.0 * np.eye(2)[np.arange(4) % 2]
    obj, i_xt, i_ty = eval_lagrangian(data, EncoderParams(logits), 0.5, "identity")
    assert obj == pytest.approx(-0.5 * LN2, abs=1e-9)
    assert obj == pytest.approx(-0.346574, abs=5e-7)


def test_eval_rejects_negative_beta_and_bad_dims():
    data = make_deterministic(4, 2)
    params = EncoderParams(np.zeros((4, 2)))
    with pytest.raises(ParameterError):
        eval_lagrangian(data, params, -0.1)
    with pytest.raises(Exception):
        eval_lagrangian(data, EncoderParams(np.zeros((5, 2))), 0.1)


# ---------------------------------------------------------------- gradient

def test_grad_matches_finite_differences():
    rng = np.random.default_rng(7)
    for case in range(10):
        n, k = 3 + case % 3, 2 + case % 2
        card = 2 + case % 3
        data = make_random_joint(n, k, seed=case)
        logits = rng.normal(0.0, 1.0, (n, card))
        beta = [0.0, 0.3, 1.0, 2.5][case % 4]
        h = ALL_SURROGATES[case % 4]
        g = grad_lagrangian(data, EncoderParams(logits), beta, h)
        fd = fd_grad(lambda L: eval_lagrangian(data, EncoderParams(L), beta, h)[0], logits)
        assert rel_err(g, fd) <= 1e-5


def test_grad_rows_sum_to_zero():
    # softmax gauge invariance: shifting a logit row changes nothing
    data = make_random_joint(5, 3, seed=3)
    logits = np.random.default_rng(1).normal(0, 2, (5, 4))
    g = grad_lagrangian(data, EncoderParams(logits), 0.7, "square")
    assert np.abs(g.sum(axis=1)).max() <= 1e-12


def test_grad_zero_at_uniform_symmetric():
    data = make_deterministic(6, 3)
    g = grad_lagrangian(data, EncoderParams(np.zeros((6, 3))), 0.5, "identity")
    assert np.abs(g).max() <= 1e-12


def test_grad_beta_zero_equals_prediction_term_alone():
    data = make_random_joint(4, 3, seed=9)
    logits = np.random.default_rng(2).normal(0, 1, (4, 3))
    grads = [grad_lagrangian(data, EncoderParams(logits), 0.0, h) for h in ALL_SURROGATES]
    for g in grads[1:]:
        np.testing.assert_array_equal(g, grads[0])


# ---------------------------------------------------------------- optimize

def test_optimize_beta_zero_recovers_full_information():
    data = make_deterministic(4, 2)
    cfg = OptimizerConfig(max_iters=20000)  # budget sized for the 1e-3 check
    point = optimize_at_beta(data, 0.0, "identity", None, cfg)
    assert abs(point.i_ty - data.mutual_information()) <= 1e-3


def test_optimize_large_beta_collapses_to_trivial():
    point = optimize_at_beta(NOISY, 10.0, "identity", None, OptimizerConfig())
    assert abs(point.i_xt) <= 1e-3
    assert point.i_ty <= point.i_xt + 1e-9


def test_optimize_beats_random_search():
    # independent oracle: the best of 1000 seeded random encoders
    beta = 0.5
    point = optimize_at_beta(NOISY, beta, "identity", 2, OptimizerConfig(seed=7))
    pxy = NOISY.matrix
    px = pxy.sum(axis=1)
    rng = np.random.default_rng(1234)
    best = np.inf
    for i in range(1000):
        scale = (0.5, 1.0, 2.0, 4.0)[i % 4]
        logits = rng.normal(0.0, scale, (8, 2))
        z = np.exp(logits - logits.max(axis=1, keepdims=True))
        q = z / z.sum(axis=1, keepdims=True)
        i_ty = mi_oracle(pxy.T @ q)
        i_xt = mi_oracle(px[:, None] * q)
        best = min(best, -i_ty + beta * i_xt)
    assert point.objective <= best + 1e-12


def test_optimize_deterministic_given_seed():
    cfg = OptimizerConfig(max_iters=300, restarts=3, seed=11)
    a = optimize_at_beta(NOISY, 0.2, "identity", 3, cfg)
    b = optimize_at_beta(NOISY, 0.2, "identity", 3, cfg)
    assert (a.i_xt, a.i_ty, a.objective, a.best_restart_seed) == \
           (b.i_xt, b.i_ty, b.objective, b.best_restart_seed)
    np.testing.assert_array_equal(a.params.logits, b.params.logits)


def test_optimize_surrogate_equivalence_at_beta_zero():
    points = [
        optimize_at_beta(NOISY, 0.0, h, 4, OptimizerConfig(max_iters=2000, restarts=4, seed=3))
        for h in ALL_SURROGATES
    ]
    for p in points[1:]:
        assert abs(p.i_ty - points[0].i_ty) <= 1e-3


def test_optimize_validates_parameters():
    with pytest.raises(ParameterError):
        optimize_at_beta(NOISY, -1.0, "identity", 2)
    with pytest.raises(ParameterError):
        optimize_at_beta(NOISY, 0.5, "identity", 0)


# ---------------------------------------------------------------- sweep

def test_sweep_singleton_equals_single_point():
    cfg = OptimizerConfig(max_iters=400, restarts=3, seed=21)
    [swept] = sweep_beta(NOISY, [0.3], "identity", 2, cfg)
    single = optimize_at_beta(NOISY, 0.3, "identity", 2, cfg)
    assert swept.objective == single.objective
    assert swept.i_xt == single.i_xt
    np.testing.assert_array_equal(swept.params.logits, single.params.logits)


def test_sweep_is_deterministic():
    cfg = OptimizerConfig(max_iters=300, restarts=2, seed=5)
    betas = [0.05, 0.2, 0.6]
    a = sweep_beta(NOISY, betas, "identity", 2, cfg)
    b = sweep_beta(NOISY, betas, "identity", 2, cfg)
    assert [(p.i_xt, p.i_ty, p.objective) for p in a] == \
           [(p.i_xt, p.i_ty, p.objective) for p in b]


def test_sweep_prediction_non_increasing():
    betas = list(np.logspace(-3, 0, 8))
    points = sweep_beta(NOISY, betas, "identity", 2, OptimizerConfig(seed=1))
    nontrivial = [p for p in points if p.i_xt > 0.01]
    assert len(nontrivial) >= 3
    for a, b in zip(nontrivial, nontrivial[1:]):
        assert b.i_ty <= a.i_ty + 1e-3
        assert b.i_xt <= a.i_xt + 1e-3
    assert all(p.i_ty <= p.i_xt + 1e-9 for p in points)  # DPI per point
    ceiling = NOISY.mutual_information()
    assert all(0.0 <= p.i_ty <= ceiling + 1e-9 for p in points)
    assert all(p.beta == b for p, b in zip(points, betas))  # order preserved


def test_sweep_validates_order_and_sign():
    with pytest.raises(ParameterError):
        sweep_beta(NOISY, [0.5, 0.1], "identity", 2)
    with pytest.raises(ParameterError):
        sweep_beta(NOISY, [-0.1, 0.5], "identity", 2)
    with pytest.raises(ParameterError):
        sweep_beta(NOISY, [], "identity", 2)


# -------------------------------------------------------- beta_at_compression

def test_compression_target_zero_trivial_endpoint():
    cfg = OptimizerConfig(max_iters=1500, restarts=4)
    beta, point = beta_at_compression(NOISY, 0.0, "identity", 2, cfg,
                                      beta_lo=1e-3, beta_hi=2.0)
    assert abs(point.i_xt) <= 0.02


def test_compression_at_ixy_loses_prediction():
    # matching the data information level costs prediction under the
    # trade-off objective: I(T;Y) lands strictly below I(X;Y)
    target = NOISY.mutual_information()
    cfg = OptimizerConfig(restarts=6)
    beta, point = beta_at_compression(NOISY, target, "identity", 2, cfg,
                                      beta_lo=1e-3, beta_hi=1.0)
    assert abs(point.i_xt - target) <= 0.02
    assert point.i_ty <= target - 0.01


def test_compression_bracket_failure_on_deterministic_instance():
    # y deterministic in x: the identity-surrogate frontier is a corner, and
    # every beta below the critical value solves to i_xt = ln 2 > target, so
    # the failure must be reported, not silent
    det = make_deterministic(8, 2)
    cfg = OptimizerConfig(max_iters=1500, restarts=4)
    with pytest.raises(BracketError):
        beta_at_compression(det, 0.35, "identity", 2, cfg, beta_lo=1e-3, beta_hi=0.5)


def test_compression_validates_parameters():
    with pytest.raises(ParameterError):
        beta_at_compression(NOISY, 0.1, "identity", 2, beta_lo=0.5, beta_hi=0.5)
    with pytest.raises(ParameterError):
        beta_at_compression(NOISY, 5.0, "identity", 2)  # target >= H(X)
    with pytest.raises(ParameterError):
        beta_at_compression(NOISY, -0.2, "identity", 2)
