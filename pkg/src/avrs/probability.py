"""Exact finite-alphabet probability and information arithmetic.

Everything in this module is a dense table over small alphabets.  All
information quantities are in bits (base-2 logarithms) with the convention
0·log 0 = 0.  Values are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError

__all__ = [
    "PROB_TOL",
    "Alphabet",
    "Distribution",
    "CondDistribution",
    "Channel",
    "DistortionMatrix",
    "JointDistribution",
    "compose_joint",
    "marginal",
    "entropy",
    "entropy_bits",
    "conditional_mutual_information",
    "expected_distortion",
]

PROB_TOL = 1e-9

# Computed mutual informations are clamped at zero when within this much
# below it; anything lower indicates a real bug, not float drift.
_NEG_CLAMP = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    """A finite symbol set; symbols are the indices ``0 .. size-1``."""

    name: str
    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ConfigurationError(f"alphabet {self.name!r}: size must be >= 1")


@dataclass(frozen=True)
class Distribution:
    """A pmf over one alphabet."""

    alphabet: Alphabet
    mass: np.ndarray

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=np.float64)
        if mass.shape != (self.alphabet.size,):
            raise ConfigurationError(
                f"pmf over {self.alphabet.name!r} has shape {mass.shape}, "
                f"expected ({self.alphabet.size},)"
            )
        if np.any(mass < 0):
            raise ConfigurationError(f"pmf over {self.alphabet.name!r} has negative entries")
        if abs(float(mass.sum()) - 1.0) > PROB_TOL:
            raise ConfigurationError(
                f"pmf over {self.alphabet.name!r} sums to {mass.sum():.12f}, not 1"
            )
        object.__setattr__(self, "mass", _frozen(mass))

    def __getitem__(self, symbol: int) -> float:
        return float(self.mass[symbol])


@dataclass(frozen=True)
class CondDistribution:
    """A stochastic matrix: one pmf over ``to_alphabet`` per conditioning symbol."""

    from_alphabet: Alphabet
    to_alphabet: Alphabet
    matrix: np.ndarray  # shape (|from|, |to|), rows sum to 1

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        expected = (self.from_alphabet.size, self.to_alphabet.size)
        if m.shape != expected:
            raise ConfigurationError(
                f"conditional {self.to_alphabet.name!r}|{self.from_alphabet.name!r}: "
                f"shape {m.shape}, expected {expected}"
            )
        if np.any(m < 0):
            raise ConfigurationError("conditional distribution has negative entries")
        sums = m.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > PROB_TOL)[0]
        if bad.size:
            raise ConfigurationError(
                f"conditional row {bad[0]} sums to {sums[bad[0]]:.12f}, not 1"
            )
        object.__setattr__(self, "matrix", _frozen(m))

    def row(self, symbol: int) -> Distribution:
        return Distribution(self.to_alphabet, self.matrix[symbol])


@dataclass(frozen=True)
class Channel:
    """Two-input two-output memoryless channel kernel p(y, z | x, j)."""

    x_alphabet: Alphabet
    j_alphabet: Alphabet
    y_alphabet: Alphabet
    z_alphabet: Alphabet
    kernel: np.ndarray  # shape (|X|, |J|, |Y|, |Z|)

    def __post_init__(self) -> None:
        k = np.asarray(self.kernel, dtype=np.float64)
        expected = (
            self.x_alphabet.size,
            self.j_alphabet.size,
            self.y_alphabet.size,
            self.z_alphabet.size,
        )
        if k.shape != expected:
            raise ConfigurationError(f"channel kernel shape {k.shape}, expected {expected}")
        if np.any(k < 0):
            raise ConfigurationError("channel kernel has negative entries")
        sums = k.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            x, j = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
            raise ConfigurationError(
                f"channel kernel at (x={x}, j={j}) sums to {sums[x, j]:.12f}, not 1"
            )
        object.__setattr__(self, "kernel", _frozen(k))

    @property
    def y_marginal_kernel(self) -> np.ndarray:
        """p(y | x, j), shape (|X|, |J|, |Y|)."""
        return self.kernel.sum(axis=3)

    @property
    def z_marginal_kernel(self) -> np.ndarray:
        """p(z | x, j), shape (|X|, |J|, |Z|)."""
        return self.kernel.sum(axis=2)


@dataclass(frozen=True)
class DistortionMatrix:
    """Per-letter distortion d(x, x̂) >= 0 with its maximum cached."""

    x_alphabet: Alphabet
    xhat_alphabet: Alphabet
    entries: np.ndarray
    d_max: float = field(init=False)

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=np.float64)
        expected = (self.x_alphabet.size, self.xhat_alphabet.size)
        if e.shape != expected:
            raise ConfigurationError(f"distortion matrix shape {e.shape}, expected {expected}")
        if not np.all(np.isfinite(e)):
            raise ConfigurationError("distortion matrix has non-finite entries")
        if np.any(e < 0):
            raise ConfigurationError("distortion matrix has negative entries")
        object.__setattr__(self, "entries", _frozen(e))
        object.__setattr__(self, "d_max", float(e.max()))


@dataclass(frozen=True)
class JointDistribution:
    """A dense joint pmf over an ordered list of named variables."""

    variables: tuple[str, ...]
    alphabets: tuple[Alphabet, ...]
    mass: np.ndarray

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.alphabets):
            raise ConfigurationError("variable and alphabet lists differ in length")
        if len(set(self.variables)) != len(self.variables):
            raise ConfigurationError(f"duplicate variable names in {self.variables}")
        m = np.asarray(self.mass, dtype=np.float64)
        expected = tuple(a.size for a in self.alphabets)
        if m.shape != expected:
            raise ConfigurationError(f"joint mass shape {m.shape}, expected {expected}")
        if np.any(m < 0):
            raise ConfigurationError("joint mass has negative entries")
        if abs(float(m.sum()) - 1.0) > PROB_TOL:
            raise ConfigurationError(f"joint mass sums to {m.sum():.12f}, not 1")
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "alphabets", tuple(self.alphabets))
        object.__setattr__(self, "mass", _frozen(m))

    def axis(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise ConfigurationError(
                f"variable {var!r} not in joint over {self.variables}"
            ) from None


def compose_joint(
    p_x: Distribution,
    q_j_given_x: CondDistribution,
    channel: Channel,
    p_u_given_y: CondDistribution | None = None,
) -> JointDistribution:
    """Chain source, jammer, channel and (optionally) a test channel.

    Returns the joint over (X, J, Y, Z) with mass
    p(x)·q(j|x)·w(y,z|x,j), extended by ·p(u|y) to (X, J, Y, Z, U) when a
    test channel is given.
    """
    if p_x.alphabet != channel.x_alphabet:
        raise ConfigurationError("source alphabet does not match channel X input")
    if q_j_given_x.from_alphabet != channel.x_alphabet:
        raise ConfigurationError("jammer conditioning alphabet does not match channel X input")
    if q_j_given_x.to_alphabet != channel.j_alphabet:
        raise ConfigurationError("jammer output alphabet does not match channel J input")
    mass = np.einsum(
        "x,xj,xjyz->xjyz", p_x.mass, q_j_given_x.matrix, channel.kernel, optimize=True
    )
    variables = ("X", "J", "Y", "Z")
    alphabets = (channel.x_alphabet, channel.j_alphabet, channel.y_alphabet, channel.z_alphabet)
    if p_u_given_y is not None:
        if p_u_given_y.from_alphabet != channel.y_alphabet:
            raise ConfigurationError("test channel conditioning alphabet does not match Y")
        mass = np.einsum("xjyz,yu->xjyzu", mass, p_u_given_y.matrix, optimize=True)
        variables = variables + ("U",)
        alphabets = alphabets + (p_u_given_y.to_alphabet,)
    return JointDistribution(variables, alphabets, mass)


def marginal(joint: JointDistribution, variables: tuple[str, ...] | list[str]) -> JointDistribution:
    """Sum out every variable not named in ``variables``.

    The result's axes follow the requested order.
    """
    variables = tuple(variables)
    if not variables:
        raise ConfigurationError("marginal requires a non-empty variable subset")
    axes = [joint.axis(v) for v in variables]
    drop = tuple(i for i in range(len(joint.variables)) if i not in axes)
    mass = joint.mass.sum(axis=drop) if drop else joint.mass
    # reorder surviving axes to the requested order
    kept = [i for i in range(len(joint.variables)) if i not in drop]
    perm = [kept.index(a) for a in axes]
    mass = np.transpose(mass, perm)
    return JointDistribution(variables, tuple(joint.alphabets[a] for a in axes), mass)


def entropy_bits(mass: np.ndarray, axis: int | tuple[int, ...] | None = None) -> np.ndarray | float:
    """Shannon entropy in bits of a (possibly batched) non-negative table."""
    m = np.asarray(mass, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 0.0, m * np.log2(np.where(m > 0.0, m, 1.0)), 0.0)
    h = -t.sum(axis=axis)
    return float(h) if np.ndim(h) == 0 else h


def entropy(dist: Distribution | JointDistribution) -> float:
    """Entropy H in bits of a pmf or a joint table."""
    return float(entropy_bits(dist.mass))


def conditional_mutual_information(
    joint: JointDistribution, a: str, b: str, given: str | None = None
) -> float:
    """I(A;B|C) in bits; with ``given`` None this is the plain I(A;B).

    Computed as H(A,C) + H(B,C) - H(A,B,C) - H(C); small negative float
    residue is clamped to zero.
    """
    if a == b or given in (a, b):
        raise ConfigurationError("variables of a mutual information must be distinct")
    if given is None:
        h_a = entropy(marginal(joint, (a,)))
        h_b = entropy(marginal(joint, (b,)))
        h_ab = entropy(marginal(joint, (a, b)))
        value = h_a + h_b - h_ab
    else:
        h_ac = entropy(marginal(joint, (a, given)))
        h_bc = entropy(marginal(joint, (b, given)))
        h_abc = entropy(marginal(joint, (a, b, given)))
        h_c = entropy(marginal(joint, (given,)))
        value = h_ac + h_bc - h_abc - h_c
    if value < 0.0:
        if value < -_NEG_CLAMP:
            # beyond float drift for desk-scale tables
            raise NumericError(f"mutual information computed as {value}, below tolerance")
        value = 0.0
    return value


def expected_distortion(
    joint: JointDistribution, d: DistortionMatrix, xvar: str, xhatvar: str
) -> float:
    """E[d(X, X̂)] under ``joint``; the two variables must carry d's alphabets."""
    ax, ah = joint.axis(xvar), joint.axis(xhatvar)
    if joint.alphabets[ax] != d.x_alphabet or joint.alphabets[ah] != d.xhat_alphabet:
        raise ConfigurationError("distortion matrix alphabets do not match joint variables")
    pair = marginal(joint, (xvar, xhatvar))
    return float(np.sum(pair.mass * d.entries))
