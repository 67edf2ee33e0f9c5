"""Jamming strategies and worst-case jammer search.

Strategies come in three kinds: memoryless kernels q(j|x), symbolwise
deterministic maps x -> j, and block strategies that choose a whole jamming
vector from the whole source block (non-causal).  Randomized block
strategies are mixtures of deterministic ones and cannot improve a
maximization, so block strategies are kept deterministic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Union

import numpy as np

from .errors import ConfigurationError, UsageError
from .probability import Alphabet, CondDistribution
from .mtypes import SymbolVector
from .rng import derive_seed, philox_stream

if TYPE_CHECKING:  # pragma: no cover
    from .coding import SessionConfig

__all__ = [
    "MemorylessJammer",
    "DeterministicJammer",
    "BlockJammer",
    "JammerStrategy",
    "sample_jamming",
    "deterministic_jammer_family",
    "jammer_from_dict",
    "jammer_to_dict",
    "load_jammers",
    "worst_case_search",
    "WorstCaseResult",
]


@dataclass(frozen=True)
class MemorylessJammer:
    """Applies q(j|x) independently at every position."""

    q: CondDistribution
    descriptor: str = "memoryless"

    @property
    def j_alphabet(self) -> Alphabet:
        return self.q.to_alphabet


@dataclass(frozen=True)
class DeterministicJammer:
    """Applies a fixed map x -> j at every position."""

    mapping: tuple[int, ...]
    j_alphabet: Alphabet
    descriptor: str = "deterministic"

    def __post_init__(self) -> None:
        if any(j < 0 or j >= self.j_alphabet.size for j in self.mapping):
            raise ConfigurationError("deterministic jammer map leaves the J alphabet")


@dataclass(frozen=True)
class BlockJammer:
    """A deterministic function of the whole source block.

    ``fn`` receives the source symbol array and must return a jamming array
    of the same length.  ``descriptor`` identifies the function for
    reproducibility records.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    j_alphabet: Alphabet
    descriptor: str


JammerStrategy = Union[MemorylessJammer, DeterministicJammer, BlockJammer]


def fixed_vector_jammer(vector: np.ndarray, j_alphabet: Alphabet, label: str) -> BlockJammer:
    """Block strategy that plays one fixed jamming vector regardless of x."""
    vec = np.ascontiguousarray(np.asarray(vector, dtype=np.int64))
    vec.setflags(write=False)
    return BlockJammer(lambda x: vec, j_alphabet, f"{label}{vec.tolist()}")


def jammer_digest(jammer: JammerStrategy) -> str:
    """Content digest used to seed per-jammer randomness: identical
    strategies share streams wherever they appear in a set."""
    import hashlib

    if isinstance(jammer, MemorylessJammer):
        payload = b"m" + jammer.q.matrix.tobytes()
    elif isinstance(jammer, DeterministicJammer):
        payload = b"d" + bytes(jammer.mapping)
    else:
        payload = b"b" + jammer.descriptor.encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def sample_jamming(
    jammer: JammerStrategy, x: SymbolVector, rng: np.random.Generator
) -> SymbolVector:
    """Draw the jamming vector for the given source block.

    Deterministic rows of a memoryless kernel consume no randomness, so a
    kernel whose rows are all point masses reproduces the matching
    deterministic map bit for bit under any generator state.
    """
    n = len(x)
    if isinstance(jammer, DeterministicJammer):
        mapping = np.asarray(jammer.mapping, dtype=np.int64)
        return SymbolVector(jammer.j_alphabet, mapping[x.symbols])
    if isinstance(jammer, BlockJammer):
        out = np.asarray(jammer.fn(x.symbols), dtype=np.int64)
        if out.shape != (n,):
            raise UsageError("block jammer returned a vector of the wrong length")
        return SymbolVector(jammer.j_alphabet, out)
    if isinstance(jammer, MemorylessJammer):
        q = jammer.q.matrix
        rows = q[x.symbols]  # (n, |J|)
        out = np.argmax(rows, axis=1)
        random_pos = rows.max(axis=1) < 1.0
        if np.any(random_pos):
            cdf = np.cumsum(rows[random_pos], axis=1)
            cdf[:, -1] = 1.0
            u = rng.random(int(random_pos.sum()))
            picks = (u[:, None] >= cdf).sum(axis=1)
            out[random_pos] = picks
        return SymbolVector(jammer.j_alphabet, out)
    raise UsageError(f"unknown jammer strategy {jammer!r}")


def deterministic_jammer_family(spec) -> list[DeterministicJammer]:
    """All |J|^|X| symbolwise deterministic jammers, lexicographic order."""
    nx = spec.x_alphabet.size
    nj = spec.j_alphabet.size
    out = []
    for mapping in itertools.product(range(nj), repeat=nx):
        out.append(
            DeterministicJammer(mapping, spec.j_alphabet, f"det{list(mapping)}")
        )
    return out


def jammer_from_dict(doc: dict, spec, source: str = "<dict>") -> JammerStrategy:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigurationError(f"{source}: jammer document needs a 'kind' field")
    kind = doc["kind"]
    if kind == "memoryless":
        q = np.asarray(doc.get("q"), dtype=np.float64)
        if q.shape != (spec.x_alphabet.size, spec.j_alphabet.size):
            raise ConfigurationError(
                f"{source}: memoryless jammer q must be [x][j] with shape "
                f"({spec.x_alphabet.size}, {spec.j_alphabet.size})"
            )
        return MemorylessJammer(CondDistribution(spec.x_alphabet, spec.j_alphabet, q))
    if kind == "deterministic":
        mapping = doc.get("map")
        if not isinstance(mapping, list) or len(mapping) != spec.x_alphabet.size:
            raise ConfigurationError(f"{source}: deterministic jammer needs a per-x 'map' list")
        return DeterministicJammer(tuple(int(v) for v in mapping), spec.j_alphabet)
    if kind == "fixed-vector":
        vec = doc.get("vector")
        if not isinstance(vec, list):
            raise ConfigurationError(f"{source}: fixed-vector jammer needs a 'vector' list")
        return fixed_vector_jammer(np.asarray(vec), spec.j_alphabet, "fixed-vector")
    raise ConfigurationError(f"{source}: unknown jammer kind {kind!r}")


def jammer_to_dict(jammer: JammerStrategy) -> dict:
    if isinstance(jammer, MemorylessJammer):
        return {"kind": "memoryless", "q": jammer.q.matrix.tolist()}
    if isinstance(jammer, DeterministicJammer):
        return {"kind": "deterministic", "map": list(jammer.mapping)}
    if isinstance(jammer, BlockJammer):
        return {"kind": "block", "descriptor": jammer.descriptor}
    raise UsageError(f"unknown jammer strategy {jammer!r}")


def load_jammers(path: str | Path, spec) -> list[JammerStrategy]:
    """Read a jammer description file: one document or a list of them."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read ({exc})") from None
    docs = doc if isinstance(doc, list) else [doc]
    return [jammer_from_dict(d, spec, source=str(path)) for d in docs]


@dataclass(frozen=True)
class WorstCaseResult:
    jammer: BlockJammer
    estimate: float
    std_error: float
    evaluations: int


def worst_case_search(
    config: "SessionConfig",
    x: SymbolVector,
    budget: int,
    seed: int,
    restarts: int = 4,
    trials_per_estimate: int = 32,
    known_code: bool = False,
) -> WorstCaseResult:
    """Greedy coordinate-ascent search for a damaging jamming vector.

    Starting from random jamming vectors, single-position changes are kept
    whenever the estimated distortion rises.  Candidate comparisons reuse one
    fixed set of channel seeds (common random numbers), so the search is
    reproducible and monotone under seeded replay.  The returned estimate is
    an inner approximation: a lower bound on the true worst case, re-measured
    on fresh seeds with its standard error.

    With ``known_code`` the adversary evaluates against the one realized
    codebook of ``config``; otherwise each evaluation redraws the code, which
    models an adversary knowing only the code distribution.
    """
    from .coding import simulate_session  # local import to avoid a cycle

    if budget < 1:
        raise UsageError("search budget must be >= 1")
    n = len(x)
    nj = config.spec.j_alphabet.size
    rng = philox_stream(seed, "worst-case-search")

    def estimate(vector: np.ndarray, seed_label: str) -> float:
        jam = fixed_vector_jammer(vector, config.spec.j_alphabet, "search-candidate")
        total = 0.0
        for t in range(trials_per_estimate):
            s = derive_seed(seed, seed_label, t)
            code_seed = config.code_seed if known_code else None
            report = simulate_session(x, jam, config, s, code_seed=code_seed)
            total += report.distortion
        return total / trials_per_estimate

    evaluations = 0
    best_vec = np.zeros(n, dtype=np.int64)
    best_val = -np.inf
    for r in range(restarts):
        if evaluations >= budget:
            break
        vec = rng.integers(0, nj, size=n) if r > 0 else np.zeros(n, dtype=np.int64)
        val = estimate(vec, "crn")
        evaluations += 1
        improved = True
        while improved and evaluations < budget:
            improved = False
            for pos in range(n):
                if evaluations >= budget:
                    break
                for j in range(nj):
                    if j == vec[pos]:
                        continue
                    cand = vec.copy()
                    cand[pos] = j
                    cand_val = estimate(cand, "crn")
                    evaluations += 1
                    if cand_val > val:
                        vec, val = cand, cand_val
                        improved = True
                    if evaluations >= budget:
                        break
        if val > best_val:
            best_val, best_vec = val, vec

    # fresh-seed re-measurement of the incumbent
    jam = fixed_vector_jammer(best_vec, config.spec.j_alphabet, f"greedy-search[{seed}]")
    values = []
    for t in range(trials_per_estimate):
        s = derive_seed(seed, "final", t)
        code_seed = config.code_seed if known_code else None
        report = simulate_session(x, jam, config, s, code_seed=code_seed)
        values.append(report.distortion)
    arr = np.asarray(values)
    std_err = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return WorstCaseResult(jam, float(arr.mean()), std_err, evaluations)
