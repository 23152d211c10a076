"""Rank-1 lattice point generation, random shifts, and seed derivation.

All randomness flows through SeedSpec: a master seed plus a derivation path.
Every consumer derives its own stream, so determinism is independent of
evaluation order and parallelism.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

# Stream roles, fixed for reproducibility; new roles append only.
ROLE_SHIFT = 0
ROLE_VECTOR = 1
ROLE_MC = 2
ROLE_REFERENCE = 3
ROLE_STUDY = 4

_ROLE_NAMES = {
    "shift": ROLE_SHIFT,
    "vector": ROLE_VECTOR,
    "mc": ROLE_MC,
    "reference": ROLE_REFERENCE,
    "study": ROLE_STUDY,
}


def role_code(role) -> int:
    if isinstance(role, str):
        try:
            return _ROLE_NAMES[role]
        except KeyError:
            raise UsageError(f"unknown stream role {role!r}") from None
    return int(role)


@dataclass(frozen=True)
class SeedSpec:
    """A 64-bit master seed plus a derivation path.

    Child streams are obtained with numpy's SeedSequence spawn-key mechanism,
    which is a documented pure function of (master, path) and stable across
    platforms. Distinct paths yield independent streams.
    """

    master_seed: int
    path: tuple = field(default=())

    def child(self, *path) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.path + tuple(int(p) for p in path))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))


def derive_replicate_seed(seed: SeedSpec, l: int, role) -> SeedSpec:
    """Child seed for replicate l in the given stream role (pure function)."""
    if l < 1:
        raise UsageError(f"replicate index must be >= 1, got {l}")
    return seed.child(l, role_code(role))


def euler_totient(n: int) -> int:
    """|G_n| = #{a in 1..n : gcd(a, n) = 1}, via trial-division factorization."""
    if n < 1:
        raise UsageError(f"totient needs n >= 1, got {n}")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            result -= result // p
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


def coprime_residues(n: int) -> np.ndarray:
    """All of G_n in increasing order (for brute-force scans; n modest)."""
    a = np.arange(1, n)
    return a[np.fromiter((math.gcd(int(x), n) == 1 for x in a), dtype=bool,
                         count=n - 1)]


@dataclass(frozen=True)
class GeneratingVector:
    """A rank-1 lattice rule's identity: modulus N and components z in G_N^s."""

    n_points: int
    components: tuple

    def __post_init__(self):
        if self.n_points < 2:
            raise UsageError(f"need N >= 2, got {self.n_points}")
        comps = tuple(int(z) for z in self.components)
        object.__setattr__(self, "components", comps)
        for z in comps:
            if not (1 <= z <= self.n_points - 1):
                raise UsageError(f"component {z} outside 1..{self.n_points - 1}")
            if math.gcd(z, self.n_points) != 1:
                raise UsageError(f"gcd({z}, {self.n_points}) != 1")

    @property
    def dimension(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=np.int64)

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        return " ".join([str(self.n_points), str(self.dimension),
                         *map(str, self.components)]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GeneratingVector":
        parts = text.split()
        if len(parts) < 2:
            raise UsageError("vector text needs at least 'N s'")
        n, s = int(parts[0]), int(parts[1])
        comps = [int(p) for p in parts[2:]]
        if len(comps) != s:
            raise UsageError(f"expected {s} components, got {len(comps)}")
        return cls(n, tuple(comps))

    def to_json(self) -> str:
        return json.dumps({"n_points": self.n_points, "z": list(self.components)})

    @classmethod
    def from_json(cls, text: str) -> "GeneratingVector":
        obj = json.loads(text)
        return cls(int(obj["n_points"]), tuple(int(z) for z in obj["z"]))


@dataclass(frozen=True)
class Shift:
    """A random shift Delta in [0,1)^s applied modulo 1 to every point."""

    components: tuple

    def __post_init__(self):
        comps = tuple(float(d) for d in self.components)
        object.__setattr__(self, "components", comps)
        for d in comps:
            if not (0.0 <= d < 1.0):
                raise UsageError(f"shift component {d} outside [0, 1)")

    @property
    def dimension(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    @classmethod
    def zero(cls, s: int) -> "Shift":
        return cls((0.0,) * s)


def sample_generating_vector(n: int, s: int, seed: SeedSpec) -> GeneratingVector:
    """Uniform draw from G_n^s, by per-component rejection on gcd."""
    if n < 2 or s < 1:
        raise UsageError("need n >= 2 and s >= 1")
    rng = seed.generator()
    comps = sample_vector_components(n, s, rng)
    return GeneratingVector(n, tuple(int(z) for z in comps))


def sample_vector_components(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Array form of sample_generating_vector for bulk sampling."""
    out = np.empty(s, dtype=np.int64)
    for j in range(s):
        while True:
            z = int(rng.integers(1, n))
            if math.gcd(z, n) == 1:
                out[j] = z
                break
    return out


def sample_shift(s: int, seed: SeedSpec) -> Shift:
    rng = seed.generator()
    return Shift(tuple(rng.random(s)))


def lattice_point(z: GeneratingVector, delta: Shift, n: int) -> np.ndarray:
    """Point x_n = frac(n z / N + Delta) of the shifted rank-1 lattice."""
    if not (0 <= n <= z.n_points - 1):
        raise UsageError(f"index {n} outside 0..{z.n_points - 1}")
    frac, _ = np.modf(n * z.as_array() / z.n_points + delta.as_array())
    return frac


def lattice_points(z: GeneratingVector, delta: Shift) -> np.ndarray:
    """All N shifted lattice points, shape (N, s)."""
    n = np.arange(z.n_points, dtype=np.int64)
    idx = (n[:, None] * z.as_array()[None, :]) % z.n_points
    frac, _ = np.modf(idx / z.n_points + delta.as_array()[None, :])
    return frac
