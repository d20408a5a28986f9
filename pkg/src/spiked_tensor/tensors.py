"""Sampling and elementary algebra for spiked symmetric Gaussian tensors.

The noise model: an asymmetric precursor with iid N(0, 2/n) entries is
averaged over all permutations of its d indices.  Under this normalization
``<W, x^{(x)d}> ~ N(0, 2/n)`` for every unit vector x, and a distinct-index
entry has variance 2/(n d!).  For d=2 the construction reproduces the usual
Gaussian Wigner matrix (off-diagonal N(0,1/n), diagonal N(0,2/n)).

Spiked samples are ``T = snr * x^{(x)d} + W`` with the spike x drawn from one
of three priors: uniform on the sphere, iid +-1/sqrt(n), or sparse with
exactly round(rho*n) nonzero entries equal to +-1/sqrt(round(rho*n)).

Storage is a dense n^d array, symmetrized eagerly.  After the permutation
average, entries are re-read through a sorted-index gather so that permuted
reads are bit-for-bit identical (a plain float average of transposed copies
differs in the last ulp across index orders because the summation order
differs).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .rng import NOISE_SUBSTREAM, SPIKE_SUBSTREAM, RngSeed

DEFAULT_MEMORY_CAP = 10**8  # scalars; n^d above this refuses to allocate

PRIOR_KINDS = ("spherical", "rademacher", "sparse_rademacher")


class MemoryCapError(ValueError):
    """Requested dense tensor exceeds the configured scalar budget."""


class DimensionMismatchError(ValueError):
    pass


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SpikePrior:
    """Tagged spike prior: spherical | rademacher | sparse_rademacher(rho)."""

    kind: str
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == "sparse_rademacher":
            if self.rho is None or not 0.0 < self.rho <= 1.0:
                raise ValueError("sparse_rademacher requires rho in (0, 1]")
        elif self.rho is not None:
            raise ValueError(f"rho only applies to sparse_rademacher, got kind={self.kind!r}")

    @staticmethod
    def spherical() -> "SpikePrior":
        return SpikePrior("spherical")

    @staticmethod
    def rademacher() -> "SpikePrior":
        return SpikePrior("rademacher")

    @staticmethod
    def sparse(rho: float) -> "SpikePrior":
        return SpikePrior("sparse_rademacher", rho)

    @property
    def is_discrete(self) -> bool:
        return self.kind != "spherical"

    def support_size(self, n: int) -> int:
        """Exact cardinality of the support at dimension n (discrete priors)."""
        if self.kind == "rademacher":
            return 2**n
        if self.kind == "sparse_rademacher":
            k = self.nonzeros(n)
            return math.comb(n, k) * 2**k
        raise ValueError("spherical prior has no finite support")

    def support_size_log_density(self, n: int | None = None) -> float | None:
        """(1/n) log |support|: the exact finite-n value, or the n->inf limit."""
        if self.kind == "spherical":
            return None
        if n is not None:
            return math.log(self.support_size(n)) / n
        if self.kind == "rademacher":
            return math.log(2.0)
        rho = float(self.rho)
        h = -rho * math.log(rho) - (1 - rho) * math.log1p(-rho) if rho < 1.0 else 0.0
        return h + rho * math.log(2.0)

    def nonzeros(self, n: int) -> int:
        """Support size of a sparse sample: round-half-up(rho*n), must be >= 1."""
        if self.kind != "sparse_rademacher":
            return n
        k = round_half_up(self.rho * n)
        if k < 1:
            raise ValueError(f"empty support: round(rho*n) = {k} for rho={self.rho}, n={n}")
        return k

    def label(self) -> str:
        if self.kind == "sparse_rademacher":
            return f"sparse_rademacher(rho={self.rho:g})"
        return self.kind


@dataclass(frozen=True)
class UnitVector:
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        nrm = float(np.linalg.norm(coords))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"not a unit vector: |norm - 1| = {abs(nrm - 1.0):.3e}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


@lru_cache(maxsize=32)
def _sorted_index_gather(n: int, d: int) -> np.ndarray:
    """Flat gather indices mapping every entry to its sorted-index representative."""
    idx = np.indices((n,) * d).reshape(d, -1)
    idx = np.sort(idx, axis=0)
    return np.ravel_multi_index(tuple(idx), (n,) * d)


def check_memory_cap(n: int, d: int, memory_cap: int = DEFAULT_MEMORY_CAP) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if n**d > memory_cap:
        raise MemoryCapError(f"n^d = {n}^{d} = {n**d} exceeds the memory cap {memory_cap}")


@dataclass(frozen=True)
class SymmetricTensor:
    """Dense order-d symmetric tensor; reads are bit-identical under index permutation."""

    n: int
    d: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.shape != (self.n,) * self.d:
            raise DimensionMismatchError(
                f"entries shape {entries.shape} != {(self.n,) * self.d}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __add__(self, other: "SymmetricTensor") -> "SymmetricTensor":
        if (self.n, self.d) != (other.n, other.d):
            raise DimensionMismatchError("tensor shapes differ")
        return SymmetricTensor(self.n, self.d, self.entries + other.entries)

    def __mul__(self, alpha: float) -> "SymmetricTensor":
        return SymmetricTensor(self.n, self.d, alpha * self.entries)

    __rmul__ = __mul__


def symmetrize(array: np.ndarray, memory_cap: int = DEFAULT_MEMORY_CAP) -> SymmetricTensor:
    """Average over all d! index permutations, then make reads exactly symmetric."""
    array = np.asarray(array, dtype=float)
    d = array.ndim
    n = array.shape[0]
    check_memory_cap(n, d, memory_cap)
    if array.shape != (n,) * d:
        raise DimensionMismatchError(f"array is not cubical: shape {array.shape}")
    mean = sum(np.transpose(array, perm) for perm in itertools.permutations(range(d)))
    mean = mean / math.factorial(d)
    exact = mean.reshape(-1)[_sorted_index_gather(n, d)].reshape((n,) * d)
    return SymmetricTensor(n, d, exact)


def rank_one(x: UnitVector, d: int) -> SymmetricTensor:
    """x^{(x)d} with bit-exact symmetry (built from the sorted-index gather)."""
    outer = x.coords
    for _ in range(d - 1):
        outer = np.multiply.outer(outer, x.coords)
    n = x.n
    exact = outer.reshape(-1)[_sorted_index_gather(n, d)].reshape((n,) * d)
    return SymmetricTensor(n, d, exact)


def sample_wigner(
    n: int, d: int, seed: RngSeed, memory_cap: int = DEFAULT_MEMORY_CAP
) -> SymmetricTensor:
    """Symmetrization of an iid N(0, 2/n) precursor; deterministic in the seed."""
    check_memory_cap(n, d, memory_cap)
    rng = seed.generator(NOISE_SUBSTREAM)
    precursor = rng.normal(0.0, math.sqrt(2.0 / n), size=(n,) * d)
    return symmetrize(precursor, memory_cap)


def sample_spike(prior: SpikePrior, n: int, seed: RngSeed) -> UnitVector:
    rng = seed.generator(SPIKE_SUBSTREAM)
    return _draw_spike(prior, n, rng)


def _draw_spike(prior: SpikePrior, n: int, rng: np.random.Generator) -> UnitVector:
    if prior.kind == "spherical":
        g = rng.standard_normal(n)
        return UnitVector(g / np.linalg.norm(g))
    if prior.kind == "rademacher":
        signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
        return UnitVector(signs / math.sqrt(n))
    k = prior.nonzeros(n)
    support = rng.permutation(n)[:k]
    coords = np.zeros(n)
    coords[support] = (2.0 * rng.integers(0, 2, size=k) - 1.0) / math.sqrt(k)
    return UnitVector(coords)


def sample_spike_batch(
    prior: SpikePrior, n: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """(count, n) array of spikes drawn in one stream; rows follow the prior."""
    if prior.kind == "spherical":
        g = rng.standard_normal((count, n))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if prior.kind == "rademacher":
        return (2.0 * rng.integers(0, 2, size=(count, n)) - 1.0) / math.sqrt(n)
    k = prior.nonzeros(n)
    order = np.argsort(rng.random((count, n)), axis=1)  # uniform random support
    rows = np.zeros((count, n))
    signs = (2.0 * rng.integers(0, 2, size=(count, k)) - 1.0) / math.sqrt(k)
    np.put_along_axis(rows, order[:, :k], signs, axis=1)
    return rows


def sample_spiked(
    prior: SpikePrior,
    n: int,
    d: int,
    snr: float,
    seed: RngSeed,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> tuple[UnitVector, SymmetricTensor]:
    """Spike x and sample snr * x^{(x)d} + W; spike and noise use split streams."""
    if snr < 0:
        raise ValueError(f"snr must be >= 0, got {snr}")
    check_memory_cap(n, d, memory_cap)
    x = sample_spike(prior, n, seed)
    noise = sample_wigner(n, d, seed, memory_cap)
    if snr == 0.0:
        return x, noise
    return x, snr * rank_one(x, d) + noise


def rank_one_inner(tensor: SymmetricTensor, x: UnitVector) -> float:
    """<T, x^{(x)d}>: full contraction against the rank-one frame of x."""
    if tensor.n != x.n:
        raise DimensionMismatchError(f"tensor n={tensor.n} vs vector n={x.n}")
    value = tensor.entries
    for _ in range(tensor.d):
        value = value @ x.coords
    return float(value)


def contract(tensor: SymmetricTensor, x: UnitVector) -> np.ndarray:
    """Contract all but the first index: v_i = sum_j T[i, j_2..j_d] x_{j_2}..x_{j_d}.

    Satisfies <contract(T, x), x> = rank_one_inner(T, x); proportional to the
    gradient of x -> <T, x^{(x)d}>, which is what power iteration ascends.
    """
    if tensor.n != x.n:
        raise DimensionMismatchError(f"tensor n={tensor.n} vs vector n={x.n}")
    value = tensor.entries
    for _ in range(tensor.d - 1):
        value = value @ x.coords
    return np.asarray(value, dtype=float)
