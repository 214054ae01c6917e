"""Exact information-theoretic primitives on finite discrete distributions.

All quantities are in nats and computed in the linear probability domain on
float64 arrays (numpy's pairwise summation keeps totals accurate at the
problem sizes handled here, |X| <= 1e4). The convention 0 ln 0 = 0 applies
everywhere, and entries below ``ZERO_CUT`` are treated as exact zeros before
any log is evaluated, so no -inf ever propagates.

Value types copy their input and mark the arrays read-only; every operation
is a pure function, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import rel_entr, xlogy

from .errors import SupportError, ValidationError

# Entries below this are treated as exact zeros before taking logs.
ZERO_CUT = 1e-15
# User-supplied simplexes must sum to 1 this tightly.
SIMPLEX_TOL = 1e-12
# Computed joints absorb accumulated rounding, so they get a looser gate.
JOINT_TOL = 1e-11


def _frozen(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"{name}: expected {ndim}-d array, got {arr.ndim}-d")
    if arr.size == 0:
        raise ValidationError(f"{name}: empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_mass(arr: np.ndarray, name: str, tol: float) -> None:
    if np.any(arr < 0.0):
        raise ValidationError(f"{name}: negative entries (min {arr.min():.3e})")
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise ValidationError(f"{name}: entries sum to {total!r}, not 1 within {tol:g}")


def _check_rows(arr: np.ndarray, name: str, tol: float) -> None:
    if np.any(arr < 0.0):
        raise ValidationError(f"{name}: negative entries (min {arr.min():.3e})")
    sums = arr.sum(axis=1)
    worst = float(np.abs(sums - 1.0).max())
    if worst > tol:
        raise ValidationError(f"{name}: row sums deviate from 1 by {worst:.3e} (> {tol:g})")


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector: entries >= 0 summing to 1 within 1e-12."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs, "Distribution", ndim=1)
        _check_mass(arr, "Distribution", SIMPLEX_TOL)
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, index: int, n: int) -> "Distribution":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)


def _default_labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(n))


@dataclass(frozen=True, eq=False)
class JointXY:
    """The data distribution p(x, y) as an |X| x |Y| matrix summing to 1."""

    matrix: np.ndarray
    x_labels: tuple[str, ...] = ()
    y_labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = _frozen(self.matrix, "JointXY", ndim=2)
        _check_mass(arr, "JointXY", SIMPLEX_TOL)
        object.__setattr__(self, "matrix", arr)
        xl = tuple(self.x_labels) or _default_labels("x", arr.shape[0])
        yl = tuple(self.y_labels) or _default_labels("y", arr.shape[1])
        if len(xl) != arr.shape[0] or len(yl) != arr.shape[1]:
            raise ValidationError("JointXY: label count does not match matrix shape")
        object.__setattr__(self, "x_labels", tuple(map(str, xl)))
        object.__setattr__(self, "y_labels", tuple(map(str, yl)))

    @property
    def n_x(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_y(self) -> int:
        return self.matrix.shape[1]

    def marginal_x(self) -> Distribution:
        return Distribution(self.matrix.sum(axis=1))

    def marginal_y(self) -> Distribution:
        return Distribution(self.matrix.sum(axis=0))

    def entropy_x(self) -> float:
        return entropy(self.marginal_x())

    def entropy_y(self) -> float:
        return entropy(self.marginal_y())

    def mutual_information(self) -> float:
        """I(X;Y) of the data itself."""
        return mutual_information(self.as_composite())

    def as_composite(self) -> "CompositeJoint":
        return CompositeJoint(self.matrix, ("x", "y"))

    def to_json(self) -> dict:
        return {
            "x_labels": list(self.x_labels),
            "y_labels": list(self.y_labels),
            "probs": self.matrix.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointXY":
        try:
            probs = obj["probs"]
            xl = obj["x_labels"]
            yl = obj["y_labels"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"JointXY JSON missing field: {exc}") from exc
        return cls(np.asarray(probs, dtype=float), tuple(xl), tuple(yl))


@dataclass(frozen=True, eq=False)
class Encoder:
    """A row-stochastic conditional map q(z|x); rows sum to 1 within 1e-12."""

    cond: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.cond, "Encoder", ndim=2)
        _check_rows(arr, "Encoder", SIMPLEX_TOL)
        object.__setattr__(self, "cond", arr)

    @property
    def n_x(self) -> int:
        return self.cond.shape[0]

    @property
    def n_z(self) -> int:
        return self.cond.shape[1]

    @classmethod
    def uniform(cls, n_x: int, n_z: int) -> "Encoder":
        return cls(np.full((n_x, n_z), 1.0 / n_z))

    @classmethod
    def deterministic(cls, assignment, n_z: int) -> "Encoder":
        """One-hot encoder mapping source symbol x to z = assignment[x]."""
        a = np.asarray(assignment, dtype=int)
        if a.ndim != 1 or np.any(a < 0) or np.any(a >= n_z):
            raise ValidationError("Encoder.deterministic: assignment out of range")
        cond = np.zeros((a.shape[0], n_z))
        cond[np.arange(a.shape[0]), a] = 1.0
        return cls(cond)

    @classmethod
    def identity(cls, n: int) -> "Encoder":
        return cls(np.eye(n))

    def to_json(self, x_labels=None) -> dict:
        labels = list(x_labels) if x_labels else list(_default_labels("x", self.n_x))
        return {
            "x_labels": labels,
            "z_cardinality": self.n_z,
            "probs": self.cond.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Encoder":
        try:
            probs = np.asarray(obj["probs"], dtype=float)
            card = int(obj["z_cardinality"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"Encoder JSON missing/invalid field: {exc}") from exc
        if probs.ndim != 2 or probs.shape[1] != card:
            raise ValidationError(
                f"Encoder JSON: z_cardinality {card} does not match matrix width"
            )
        return cls(probs)


@dataclass(frozen=True, eq=False)
class CompositeJoint:
    """A joint distribution over a named tuple of variables.

    Built by the ``compose_*`` functions; sum tolerance is 1e-11 to absorb
    the rounding accumulated while assembling products of validated inputs.
    """

    tensor: np.ndarray
    axes: tuple[str, ...]

    def __post_init__(self):
        arr = np.array(self.tensor, dtype=float)
        arr = _frozen(arr, "CompositeJoint", ndim=arr.ndim)
        axes = tuple(self.axes)
        if len(axes) != arr.ndim:
            raise ValidationError("CompositeJoint: axes do not match tensor rank")
        if len(set(axes)) != len(axes):
            raise ValidationError("CompositeJoint: duplicate axis names")
        _check_mass(arr, "CompositeJoint", JOINT_TOL)
        object.__setattr__(self, "tensor", arr)
        object.__setattr__(self, "axes", axes)

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise ValidationError(f"CompositeJoint: no axis named {name!r}") from None

    def marginal(self, name: str) -> Distribution:
        keep = self.axis_index(name)
        other = tuple(i for i in range(self.tensor.ndim) if i != keep)
        return Distribution(self.tensor.sum(axis=other))

    def marginalize_out(self, name: str) -> "CompositeJoint":
        drop = self.axis_index(name)
        rest = tuple(a for a in self.axes if a != name)
        return CompositeJoint(self.tensor.sum(axis=drop), rest)


class InformationProfile(NamedTuple):
    """The four mutual informations entering the disentanglement objective."""

    i_xt: float
    i_ty: float
    i_xsy: float
    i_st: float


def ensure_distribution(p) -> Distribution:
    return p if isinstance(p, Distribution) else Distribution(np.asarray(p, dtype=float))


def ensure_joint(data) -> JointXY:
    return data if isinstance(data, JointXY) else JointXY(np.asarray(data, dtype=float))


def ensure_encoder(enc) -> Encoder:
    return enc if isinstance(enc, Encoder) else Encoder(np.asarray(enc, dtype=float))


def _zeroed(arr: np.ndarray) -> np.ndarray:
    # Sub-cutoff entries become exact zeros so xlogy/rel_entr apply 0 ln 0 = 0.
    return np.where(arr < ZERO_CUT, 0.0, arr)


def entropy(p) -> float:
    """Shannon entropy -sum p_i ln p_i in nats; 0 ln 0 = 0."""
    probs = _zeroed(ensure_distribution(p).probs)
    return float(-xlogy(probs, probs).sum())


def mutual_information(joint) -> float:
    """I(A;B) = sum_ab p(a,b) ln[p(a,b) / (p(a) p(b))] of a two-axis joint."""
    if isinstance(joint, JointXY):
        joint = joint.as_composite()
    elif not isinstance(joint, CompositeJoint):
        joint = CompositeJoint(np.asarray(joint, dtype=float), ("a", "b"))
    if joint.tensor.ndim != 2:
        raise ValidationError("mutual_information: expected a joint over exactly two axes")
    t = _zeroed(joint.tensor)
    outer = np.outer(t.sum(axis=1), t.sum(axis=0))
    # rel_entr(0, 0) = 0 covers empty cells; marginals dominate entries, so
    # rel_entr never sees p > 0 with q = 0 on a valid joint.
    return float(rel_entr(t, outer).sum())


def kl_divergence(p, q) -> float:
    """KL(p || q) = sum p_i ln(p_i / q_i); requires q_i = 0 => p_i = 0."""
    pv = _zeroed(ensure_distribution(p).probs)
    qv = _zeroed(ensure_distribution(q).probs)
    if pv.shape != qv.shape:
        raise ValidationError("kl_divergence: support sizes differ")
    if np.any((pv > 0.0) & (qv == 0.0)):
        raise SupportError("kl_divergence: p places mass where q has none")
    return float(rel_entr(pv, qv).sum())


def _check_rows_match(data: JointXY, enc: Encoder, what: str) -> None:
    if enc.n_x != data.n_x:
        raise ValidationError(
            f"{what}: encoder has {enc.n_x} rows but the joint has |X| = {data.n_x}"
        )


def compose_xt(data, enc_t) -> CompositeJoint:
    """q(x,t) = p(x) q(t|x)."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    _check_rows_match(data, enc_t, "compose_xt")
    px = data.matrix.sum(axis=1)
    return CompositeJoint(px[:, None] * enc_t.cond, ("x", "t"))


def compose_yt(data, enc_t) -> CompositeJoint:
    """q(y,t) = sum_x p(x,y) q(t|x)."""
    data, enc_t = ensure_joint(data), ensure_encoder(enc_t)
    _check_rows_match(data, enc_t, "compose_yt")
    return CompositeJoint(np.einsum("xy,xt->yt", data.matrix, enc_t.cond), ("y", "t"))


def compose_xsy(data, enc_s) -> CompositeJoint:
    """q(x,s,y) = p(x,y) q(s|x); marginalizing out s recovers the data joint."""
    data, enc_s = ensure_joint(data), ensure_encoder(enc_s)
    _check_rows_match(data, enc_s, "compose_xsy")
    return CompositeJoint(
        np.einsum("xy,xs->xsy", data.matrix, enc_s.cond), ("x", "s", "y")
    )


def compose_st(data, enc_s, enc_t) -> CompositeJoint:
    """q(s,t) = sum_x p(x) q(s|x) q(t|x) (S and T independent given X)."""
    data, enc_s, enc_t = ensure_joint(data), ensure_encoder(enc_s), ensure_encoder(enc_t)
    _check_rows_match(data, enc_s, "compose_st")
    _check_rows_match(data, enc_t, "compose_st")
    px = data.matrix.sum(axis=1)
    return CompositeJoint(
        np.einsum("x,xs,xt->st", px, enc_s.cond, enc_t.cond), ("s", "t")
    )


def information_triple(data, enc_s, enc_t) -> InformationProfile:
    """All four mutual informations for an encoder pair, computed exactly.

    I(X;S,Y) treats (S,Y) as a single grouped variable, obtained by
    flattening the (x,s,y) joint to a two-axis joint over x and (s,y).
    """
    data = ensure_joint(data)
    i_xt = mutual_information(compose_xt(data, enc_t))
    i_ty = mutual_information(compose_yt(data, enc_t))
    xsy = compose_xsy(data, enc_s).tensor
    i_xsy = mutual_information(
        CompositeJoint(xsy.reshape(xsy.shape[0], -1), ("x", "sy"))
    )
    i_st = mutual_information(compose_st(data, enc_s, enc_t))
    return InformationProfile(i_xt, i_ty, i_xsy, i_st)
