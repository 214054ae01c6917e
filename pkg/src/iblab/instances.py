"""Generators for synthetic discrete joint distributions.

Three families:

* ``deterministic_mod`` -- X uniform over n outcomes, y = x mod k. The label
  is a deterministic function of the source, so I(X;Y) = H(Y) and the
  maximum-compression point I(X;T) = I(T;Y) = H(Y) is exactly attainable.
* ``noisy_mod`` -- the deterministic instance passed through a symmetric
  label-flip channel: each x keeps its label with probability 1 - noise and
  spreads the remaining mass uniformly over the other k - 1 labels. Keeps
  I(X;Y) in closed form (H(Y) minus the flip-channel conditional entropy)
  while making the compression/prediction trade-off smooth instead of a
  corner, so sweeps can actually observe it.
* ``random_joint`` -- i.i.d. positive entries, normalized; a deterministic
  function of the seed, used as fuzz fixtures.

All generators return validated :class:`~iblab.prob.JointXY` values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .prob import JointXY

FAMILIES = ("deterministic_mod", "noisy_mod", "random_joint")


def make_deterministic(n: int, k: int) -> JointXY:
    """X uniform over n symbols, y = x mod k; every row of p(y|x) is one-hot."""
    if n < 1 or k < 1:
        raise ParameterError(f"make_deterministic: n and k must be >= 1, got n={n}, k={k}")
    if k > n:
        raise ParameterError(f"make_deterministic: k={k} exceeds n={n}")
    matrix = np.zeros((n, k))
    matrix[np.arange(n), np.arange(n) % k] = 1.0 / n
    return JointXY(matrix)


def make_noisy(n: int, k: int, noise: float, seed: int | None = None) -> JointXY:
    """Symmetric label flip applied to the deterministic instance.

    The flip is applied in probability mass, so the construction is
    closed-form and ``seed`` is accepted only for interface symmetry with
    the other generators; it is ignored.
    """
    if k < 2:
        raise ParameterError(f"make_noisy: k must be >= 2, got {k}")
    if k > n:
        raise ParameterError(f"make_noisy: k={k} exceeds n={n}")
    if not 0.0 <= noise < 1.0:
        raise ParameterError(f"make_noisy: noise must be in [0, 1), got {noise}")
    matrix = np.full((n, k), noise / (k - 1) / n)
    matrix[np.arange(n), np.arange(n) % k] = (1.0 - noise) / n
    return JointXY(matrix)


def make_random_joint(n: int, k: int, seed: int) -> JointXY:
    """Entries drawn i.i.d. Exp(1), floored at 1e-12, then normalized.

    Bit-identical output for identical (n, k, seed); all marginals strictly
    positive.
    """
    if n < 1 or k < 1:
        raise ParameterError(f"make_random_joint: n and k must be >= 1, got n={n}, k={k}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    entries = np.maximum(rng.exponential(1.0, size=(n, k)), 1e-12)
    return JointXY(entries / entries.sum())


@dataclass(frozen=True)
class InstanceSpec:
    """A parsed description of a generated instance.

    ``noise`` applies to ``noisy_mod`` only; ``seed`` to ``random_joint``
    only. A spec is written ``family:n=N,k=K[,noise=E][,seed=S]``.
    """

    family: str
    n: int
    k: int
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(
                f"unknown instance family {self.family!r}; expected one of {FAMILIES}"
            )

    def build(self) -> JointXY:
        if self.family == "deterministic_mod":
            return make_deterministic(self.n, self.k)
        if self.family == "noisy_mod":
            return make_noisy(self.n, self.k, self.noise)
        return make_random_joint(self.n, self.k, self.seed)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "k": self.k,
            "noise": self.noise,
            "seed": self.seed,
        }

    def __str__(self) -> str:
        parts = [f"n={self.n}", f"k={self.k}"]
        if self.family == "noisy_mod":
            parts.append(f"noise={self.noise:g}")
        if self.family == "random_joint":
            parts.append(f"seed={self.seed}")
        return f"{self.family}:" + ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "InstanceSpec":
        """Parse ``family:n=N,k=K[,noise=E][,seed=S]`` (``eta`` = ``noise``)."""
        family, sep, rest = text.partition(":")
        if not sep or family not in FAMILIES:
            raise ValidationError(
                f"instance spec must look like 'family:n=..,k=..'; got {text!r}"
            )
        fields: dict[str, str] = {}
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValidationError(f"instance spec item {item!r} is not key=value")
            fields[key.strip()] = value.strip()
        if "eta" in fields:
            fields["noise"] = fields.pop("eta")
        try:
            spec = cls(
                family=family,
                n=int(fields.pop("n")),
                k=int(fields.pop("k")),
                noise=float(fields.pop("noise", 0.0)),
                seed=int(fields.pop("seed", 0)),
            )
        except KeyError as exc:
            raise ValidationError(f"instance spec missing field: {exc}") from exc
        except ValueError as exc:
            raise ValidationError(f"instance spec has a non-numeric field: {exc}") from exc
        if fields:
            raise ValidationError(f"instance spec has unknown fields: {sorted(fields)}")
        return spec


def parse_instance_spec(text: str) -> InstanceSpec:
    return InstanceSpec.parse(text)
