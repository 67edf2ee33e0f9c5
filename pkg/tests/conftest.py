"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from avrs.model import AuxiliaryPolicy, ProblemSpec
from avrs.probability import (
    Alphabet,
    Channel,
    CondDistribution,
    Distribution,
    DistortionMatrix,
)


def make_spec(p_x, kernel, d, nj=None) -> ProblemSpec:
    kernel = np.asarray(kernel, dtype=np.float64)
    nx, njk, ny, nz = kernel.shape
    d = np.asarray(d, dtype=np.float64)
    return ProblemSpec(
        Distribution(Alphabet("X", nx), p_x),
        Channel(
            Alphabet("X", nx),
            Alphabet("J", njk),
            Alphabet("Y", ny),
            Alphabet("Z", nz),
            kernel,
        ),
        DistortionMatrix(Alphabet("X", nx), Alphabet("Xhat", d.shape[1]), d),
    )


def classical_spec(p0=0.5) -> ProblemSpec:
    """No jammer, Y = X, Z constant, Hamming distortion."""
    k = np.zeros((2, 1, 2, 1))
    k[0, 0, 0, 0] = 1.0
    k[1, 0, 1, 0] = 1.0
    return make_spec([p0, 1 - p0], k, [[0, 1], [1, 0]])


def xor_spec() -> ProblemSpec:
    """Y = X xor J, Z constant, uniform binary X, Hamming distortion."""
    k = np.zeros((2, 2, 2, 1))
    for x in range(2):
        for j in range(2):
            k[x, j, x ^ j, 0] = 1.0
    return make_spec([0.5, 0.5], k, [[0, 1], [1, 0]])


def identity_z_spec() -> ProblemSpec:
    """Z = X exactly (decoder sees the source), Y constant, binary jammer."""
    k = np.zeros((2, 2, 1, 2))
    for x in range(2):
        for j in range(2):
            k[x, j, 0, x] = 1.0
    return make_spec([0.5, 0.5], k, [[0, 1], [1, 0]])


def wz_spec(flip_y=0.1, jam_extra=0.25, flip_z=0.2) -> ProblemSpec:
    """Binary source; Y is a jammed noisy copy, Z an unjammed noisy copy."""
    k = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for j in range(2):
            py1 = (flip_y + jam_extra * j) if x == 0 else 1 - (flip_y + jam_extra * j)
            pz1 = flip_z if x == 0 else 1 - flip_z
            for y in range(2):
                for z in range(2):
                    k[x, j, y, z] = (py1 if y == 1 else 1 - py1) * (pz1 if z == 1 else 1 - pz1)
    return make_spec([0.5, 0.5], k, [[0, 1], [1, 0]])


def identity_policy(spec: ProblemSpec, u_size: int | None = None) -> AuxiliaryPolicy:
    """U = Y deterministically; reconstruction copies u (padded by need)."""
    ny = spec.y_alphabet.size
    u_size = u_size or ny
    mat = np.zeros((ny, u_size))
    for y in range(ny):
        mat[y, min(y, u_size - 1)] = 1.0
    zeta = np.tile(
        np.arange(u_size)[:, None] % spec.xhat_alphabet.size, (1, spec.z_alphabet.size)
    )
    return AuxiliaryPolicy(
        CondDistribution(spec.y_alphabet, Alphabet("U", u_size), mat),
        zeta,
        spec.z_alphabet,
        spec.xhat_alphabet,
    )


def noisy_policy(spec: ProblemSpec, stay=0.85) -> AuxiliaryPolicy:
    """Binary test channel that follows y with probability ``stay``."""
    mat = np.array([[stay, 1 - stay], [1 - stay, stay]])
    zeta = np.tile(np.arange(2)[:, None], (1, spec.z_alphabet.size))
    return AuxiliaryPolicy(
        CondDistribution(spec.y_alphabet, Alphabet("U", 2), mat),
        zeta,
        spec.z_alphabet,
        spec.xhat_alphabet,
    )


def structured_instance(rng: np.random.Generator, nx: int = 2) -> ProblemSpec:
    """Random instance where Y reads a binary feature of X through noise the
    jammer can deepen but not erase, and Z is blind.  These keep a visible
    gap between the informed and blind distortion floors."""
    nj = int(rng.integers(1, 3))
    feature = rng.integers(0, 2, size=nx)
    while feature.min() == feature.max():
        feature = rng.integers(0, 2, size=nx)
    base = rng.uniform(0.02, 0.12)
    extra = rng.uniform(0.08, 0.3, size=nj)
    extra[0] = 0.0
    k = np.zeros((nx, nj, 2, 1))
    for x in range(nx):
        for j in range(nj):
            flip = min(base + extra[j], 0.45)
            p1 = 1 - flip if feature[x] == 1 else flip
            k[x, j, 1, 0] = p1
            k[x, j, 0, 0] = 1 - p1
    d = np.zeros((nx, 2))
    for x in range(nx):
        wrong = 1 - feature[x]
        d[x, feature[x]] = 0.0
        d[x, wrong] = rng.uniform(0.6, 1.0)
    p_x = 0.8 * rng.dirichlet(np.ones(nx)) + 0.2 / nx
    return make_spec(p_x, k, d)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250810)
