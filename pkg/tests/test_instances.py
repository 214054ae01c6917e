import math

import numpy as np
import pytest

from iblab import (
    InstanceSpec,
    ParameterError,
    ValidationError,
    make_deterministic,
    make_noisy,
    make_random_joint,
    parse_instance_spec,
)
from oracles import entropy_oracle, mi_oracle


def test_deterministic_balanced_16_4():
    data = make_deterministic(16, 4)
    assert data.entropy_y() == pytest.approx(math.log(4), abs=1e-12)
    assert data.mutual_information() == pytest.approx(data.entropy_y(), abs=1e-12)


def test_deterministic_identity_labeling():
    data = make_deterministic(8, 8)
    assert data.entropy_y() == pytest.approx(math.log(8), abs=1e-12)
    # y == x: the matrix is diagonal
    assert np.count_nonzero(data.matrix - np.diag(np.diag(data.matrix))) == 0


def test_deterministic_unbalanced_10_3():
    # class sizes {4, 3, 3}: H(Y) = -(0.4 ln 0.4 + 2 * 0.3 ln 0.3)
    data = make_deterministic(10, 3)
    expected = entropy_oracle([0.4, 0.3, 0.3])
    assert data.entropy_y() == pytest.approx(expected, abs=1e-12)
    assert data.entropy_y() == pytest.approx(1.0888999753452238, abs=1e-12)
    # six-figure value 1.088900
    assert data.entropy_y() == pytest.approx(1.088900, abs=5e-7)


def test_deterministic_label_rows_are_one_hot():
    data = make_deterministic(12, 5)
    assert np.count_nonzero(data.matrix) == 12  # one nonzero per row: H(Y|X) = 0


def test_deterministic_rejects_bad_k():
    with pytest.raises(ParameterError):
        make_deterministic(4, 5)
    with pytest.raises(ParameterError):
        make_deterministic(4, 0)


def test_noisy_zero_noise_equals_deterministic():
    np.testing.assert_array_equal(
        make_noisy(8, 2, 0.0).matrix, make_deterministic(8, 2).matrix
    )


def test_noisy_half_flip_kills_information():
    data = make_noisy(8, 2, 0.5)
    assert abs(data.mutual_information()) <= 1e-12


def test_noisy_binary_closed_form():
    # I(X;Y) = ln 2 - H_b(0.2)
    data = make_noisy(8, 2, 0.2)
    h_b = entropy_oracle([0.2, 0.8])
    assert data.mutual_information() == pytest.approx(math.log(2) - h_b, abs=1e-12)
    assert data.mutual_information() == pytest.approx(0.192745, abs=5e-7)
    assert data.mutual_information() == pytest.approx(mi_oracle(data.matrix), abs=1e-12)


def test_noisy_strict_informativeness_gap():
    for noise in (0.05, 0.2, 0.4, 0.7):
        for (n, k) in ((8, 2), (12, 3), (9, 3)):
            data = make_noisy(n, k, noise)
            assert data.mutual_information() < data.entropy_y() - 1e-6


def test_noisy_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        make_noisy(8, 1, 0.1)
    with pytest.raises(ParameterError):
        make_noisy(8, 2, 1.0)
    with pytest.raises(ParameterError):
        make_noisy(8, 2, -0.1)


def test_random_joint_deterministic_given_seed():
    a = make_random_joint(6, 4, seed=99)
    b = make_random_joint(6, 4, seed=99)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    c = make_random_joint(6, 4, seed=100)
    assert np.any(c.matrix != a.matrix)


def test_random_joint_strictly_positive_marginals():
    data = make_random_joint(2, 2, seed=5)
    assert data.marginal_x().probs.min() > 0.0
    assert data.marginal_y().probs.min() > 0.0
    assert data.matrix.min() > 0.0


def test_random_joint_validates_by_construction():
    for seed in range(10):
        data = make_random_joint(1 + seed, 1 + (seed % 3), seed)
        assert data.matrix.min() >= 0.0
        assert data.matrix.sum() == pytest.approx(1.0, abs=1e-12)


def test_instance_spec_round_trip():
    for text in (
        "deterministic_mod:n=16,k=4",
        "noisy_mod:n=8,k=2,noise=0.2",
        "random_joint:n=5,k=3,seed=7",
    ):
        spec = parse_instance_spec(text)
        assert str(spec) == text
        spec.build()  # validates


def test_instance_spec_eta_alias():
    spec = parse_instance_spec("noisy_mod:n=8,k=2,eta=0.3")
    assert spec.noise == 0.3


def test_instance_spec_rejects_garbage():
    for text in ("bogus:n=4,k=2", "deterministic_mod:n=4", "deterministic_mod:k=oops,n=4",
                 "deterministic_mod:n=4,k=2,zap=1"):
        with pytest.raises(ValidationError):
            parse_instance_spec(text)
