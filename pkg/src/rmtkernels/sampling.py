"""Monte Carlo spectra of Wishart matrices and products of Ginibre matrices.

Every realization draws from its own counter-based random stream, so a
batch is bit-for-bit reproducible regardless of how many worker threads
produce it.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError, EmptyBatchError
from .finite import EnsembleSpec, ProductEnsemble, WishartEnsemble
from .macroscopic import ScalingRegime, WishartParams, inverse_scaling_map

__all__ = [
    "RngState",
    "SampleBatch",
    "EmpiricalStats",
    "sample_ginibre",
    "hermitian_eigs",
    "inverse_iteration",
    "wishart_eigs",
    "product_eigs",
    "empirical_stats",
    "ks_distance",
    "worker_count",
]

ALGORITHM = "philox4x64/box-muller"


class RngState:
    """Philox stream keyed by the SHA-256 digest of a seed.

    The first 128 bits of the digest form the Philox key and the stream
    number occupies the high counter word, so streams never overlap.
    Draws advance the state; build a fresh object to restart a stream.
    """

    def __init__(self, seed: int | str | bytes = 0, stream: int = 0):
        if isinstance(seed, int):
            raw = str(seed).encode()
        elif isinstance(seed, str):
            raw = seed.encode()
        else:
            raw = bytes(seed)
        self.seed = seed
        self.digest = hashlib.sha256(raw).digest()
        self.stream = int(stream)
        if not 0 <= self.stream < 2**64:
            raise DomainError("stream must fit in 64 bits")
        key = np.frombuffer(self.digest[:16], dtype="<u8").copy()
        counter = np.array([0, 0, 0, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key, counter=counter))

    def spawn(self, index: int) -> "RngState":
        """Independent child stream, a function of (seed, stream, index) only."""
        return RngState(self.seed, (self.stream * 1_000_003 + int(index) + 1) % 2**64)

    def uniform(self, size: int) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return self._gen.random(size)

    def normal_pairs(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """``count`` pairs of independent standard normals by the Box-Muller transform."""
        u = self.uniform(2 * count)
        r = np.sqrt(-2.0 * np.log1p(-u[:count]))
        phi = 2.0 * math.pi * u[count:]
        return r * np.cos(phi), r * np.sin(phi)

    def record(self) -> dict:
        return {"algorithm": ALGORITHM, "seed": str(self.seed), "digest": self.digest.hex(), "stream": self.stream}


def sample_ginibre(rows: int, cols: int, rng: RngState) -> np.ndarray:
    """rows x cols matrix of iid complex Gaussians with E|X|^2 = 1."""
    if rows < 1 or cols < 1 or rows * cols > 10**7:
        raise DomainError(f"matrix shape {rows}x{cols} out of range")
    re, im = rng.normal_pairs(rows * cols)
    return ((re + 1j * im) * math.sqrt(0.5)).reshape(rows, cols)


def hermitian_eigs(matrix, *, backend: str | None = None, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues of a complex Hermitian matrix.

    Householder reduction to real tridiagonal form, then implicit QL with
    Wilkinson shifts.

    Raises
    ------
    DomainError
        If the matrix is not square or not Hermitian within 1e-12 relative.
    ConvergenceError
        If the QL iteration does not converge in 60 sweeps per eigenvalue.
    """
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    if check:
        scale = max(float(np.max(np.abs(a), initial=0.0)), 1e-300)
        if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-12 * scale:
            raise DomainError("matrix is not Hermitian")
    k = _backend.get(backend)
    d, e = k.householder_tridiagonal(a)
    vals, failed = k.tridiagonal_eigenvalues(d, e)
    if failed:
        raise ConvergenceError("implicit QL did not converge")
    return np.asarray(vals)


def inverse_iteration(matrix, eigenvalue: float, *, steps: int = 3, seed: int = 0) -> np.ndarray:
    """Unit eigenvector for a computed eigenvalue by inverse iteration."""
    a = np.asarray(matrix, dtype=np.complex128)
    n = a.shape[0]
    scale = max(np.linalg.norm(a, 2), 1.0)
    shifted = a - (eigenvalue + 1e-13 * scale) * np.eye(n)
    re, im = RngState(seed).normal_pairs(n)
    v = re + 1j * im
    for _ in range(steps):
        v = np.linalg.solve(shifted, v)
        v /= np.linalg.norm(v)
    return v


@dataclass(frozen=True)
class SampleBatch:
    """Eigenvalue realizations (count x N, each row ascending) with their provenance."""

    spec: EnsembleSpec
    realizations: np.ndarray
    seed: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.realizations.shape[0])

    def pooled(self) -> np.ndarray:
        return np.sort(self.realizations.ravel())


def worker_count(tasks: int) -> int:
    """Thread count: RMT_THREADS if set, else the CPU count, never above ``tasks``."""
    env = os.environ.get("RMT_THREADS")
    n = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n, tasks))


def _clamped(vals: np.ndarray, scale: float) -> np.ndarray:
    if vals.size and vals[0] < -1e-10 * max(scale, 1.0):
        raise ConvergenceError(f"Gram matrix eigenvalue {vals[0]} is negative beyond round-off")
    return np.maximum(vals, 0.0)


def _run(count: int, rng: RngState, one: Callable[[RngState], np.ndarray], N: int) -> np.ndarray:
    if count < 1:
        raise DomainError("count must be positive")
    out = np.empty((count, N))

    def task(i: int) -> None:
        out[i] = one(rng.spawn(i))

    workers = worker_count(count)
    if workers == 1:
        for i in range(count):
            task(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(task, range(count)))
    return out


def wishart_eigs(params: WishartParams, count: int, rng: RngState, *, backend: str | None = None) -> SampleBatch:
    """Eigenvalues of X X^dagger for ``count`` independent N x T Ginibre matrices X."""
    if params.N > 500:
        raise DomainError("wishart_eigs supports N <= 500")

    def one(r: RngState) -> np.ndarray:
        x = sample_ginibre(params.N, params.T, r)
        gram = x @ x.conj().T
        return _clamped(hermitian_eigs(gram, backend=backend, check=False), float(np.real(np.trace(gram))))

    vals = _run(count, rng, one, params.N)
    return SampleBatch(WishartEnsemble(params), vals, rng.record())


def product_eigs(spec: ProductEnsemble, count: int, rng: RngState, *, backend: str | None = None) -> SampleBatch:
    """Squared singular values of Y = X_1 X_2 ... X_M, X_k of size (N + nu_{k-1}) x (N + nu_k)."""
    if spec.N > 300 or spec.M > 4:
        raise DomainError("product_eigs supports N <= 300 and M <= 4")
    sizes = [spec.N] + [spec.N + v for v in spec.nu]

    def one(r: RngState) -> np.ndarray:
        y = sample_ginibre(sizes[0], sizes[1], r)
        for k in range(1, spec.M):
            y = y @ sample_ginibre(sizes[k], sizes[k + 1], r)
        gram = y @ y.conj().T
        return _clamped(hermitian_eigs(gram, backend=backend, check=False), float(np.real(np.trace(gram))))

    vals = _run(count, rng, one, spec.N)
    return SampleBatch(spec, vals, rng.record())


class EmpiricalStats(NamedTuple):
    """Normalized histogram of the pooled (optionally rescaled) eigenvalues and a summary."""

    edges: np.ndarray
    density: np.ndarray
    minimum: float
    maximum: float
    mean: float
    smallest: np.ndarray


def empirical_stats(batch: SampleBatch, bins: int = 50, scaling: ScalingRegime | None = None) -> EmpiricalStats:
    """Histogram (unit total mass) and summary of a batch.

    With ``scaling`` the eigenvalues are first mapped to the microscopic
    variable s of that regime (Wishart batches only). ``smallest`` holds the
    smallest eigenvalue of each realization on the same scale.
    """
    if batch.realizations.size == 0:
        raise EmptyBatchError("batch holds no eigenvalues")
    if bins < 10:
        raise DomainError("bins must be at least 10")
    vals = batch.realizations
    if scaling is not None:
        if not isinstance(batch.spec, WishartEnsemble):
            raise DomainError("microscopic rescaling is defined for Wishart batches")
        vals = inverse_scaling_map(batch.spec.params, scaling, vals)
    pooled = np.asarray(vals).ravel()
    density, edges = np.histogram(pooled, bins=bins, density=True)
    return EmpiricalStats(edges, density, float(pooled.min()), float(pooled.max()), float(pooled.mean()), np.asarray(vals)[:, 0].copy())


def ks_distance(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov distance sup |F_n - F| for sorted samples."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise EmptyBatchError("no samples")
    if np.any(np.diff(x) < 0):
        raise DomainError("samples must be sorted")
    n = x.size
    f = np.broadcast_to(np.asarray(cdf(x), dtype=np.float64), x.shape)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
