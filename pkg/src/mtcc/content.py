"""File library, symbol-level caches and the piece inventory used by delivery."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gf import DEFAULT_BITS, IRREDUCIBLE
from .gf import field as gf_field

__all__ = [
    "SystemConfig",
    "FileLibrary",
    "CacheMap",
    "PieceTable",
    "random_library",
    "distinct_demands",
    "build_piece_table",
    "piece_length_distribution",
]


@dataclass(frozen=True)
class SystemConfig:
    """Network and library dimensions.

    ``K`` users, ``L`` transmitters, ``N`` files of ``F`` symbols, and a
    per-user cache of ``M`` files.  Symbols live in GF(2^field_bits).
    """

    K: int
    L: int
    N: int
    M: float
    F: int
    field_bits: int = DEFAULT_BITS

    def __post_init__(self):
        for name in ("K", "L", "N", "F"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.N < self.K:
            raise ValueError(f"need N >= K for all-distinct demands (N={self.N}, K={self.K})")
        if not 0 <= self.M <= self.N:
            raise ValueError(f"cache size M={self.M} outside [0, N={self.N}]")
        if self.field_bits not in IRREDUCIBLE:
            raise ValueError(f"field_bits must be one of {sorted(IRREDUCIBLE)}")

    @property
    def p(self) -> float:
        """Normalized cache size M/N."""
        return self.M / self.N

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.M).limit_denominator(10**6) / self.N

    @property
    def cached_per_file(self) -> int:
        """Symbols of each file a user stores: (M/N)·F rounded to nearest."""
        return int(round(self.p * self.F))

    def field(self):
        return gf_field(self.field_bits)


@dataclass(frozen=True)
class FileLibrary:
    files: np.ndarray  # (N, F) field symbols

    @property
    def n_files(self) -> int:
        return self.files.shape[0]

    @property
    def file_size(self) -> int:
        return self.files.shape[1]


def random_library(cfg: SystemConfig, seed=None) -> FileLibrary:
    rng = np.random.default_rng(seed)
    return FileLibrary(cfg.field().random(rng, (cfg.N, cfg.F)))


def distinct_demands(K: int) -> tuple[int, ...]:
    """Worst-case demand vector: user k requests file k."""
    return tuple(range(K))


@dataclass(frozen=True)
class CacheMap:
    """Boolean occupancy ``cached[k, n, i]``: user k stores symbol i of file n."""

    cached: np.ndarray

    @property
    def n_users(self) -> int:
        return self.cached.shape[0]

    @property
    def n_files(self) -> int:
        return self.cached.shape[1]

    @property
    def file_size(self) -> int:
        return self.cached.shape[2]

    def indices(self, k: int, n: int) -> np.ndarray:
        return np.flatnonzero(self.cached[k, n])

    def load(self) -> np.ndarray:
        """Total cached symbols per user."""
        return self.cached.sum(axis=(1, 2))

    def __eq__(self, other):
        return isinstance(other, CacheMap) and np.array_equal(self.cached, other.cached)

    __hash__ = None


Key = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class PieceTable:
    """Requested symbols grouped by (requester, exact caching set).

    ``pieces[(r, S)]`` holds the ascending symbol indices of ``W_{d_r}`` that
    are cached by exactly the users in ``S`` among ``users`` and not by ``r``.
    Only nonempty pieces are stored.  ``users`` are global user ids; delivery
    treats them as the full user population of the sub-problem.
    """

    users: tuple[int, ...]
    demands: dict[int, int]
    file_size: int
    pieces: dict[Key, np.ndarray] = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def length(self, r: int, S: tuple[int, ...]) -> int:
        idx = self.pieces.get((r, S))
        return 0 if idx is None else len(idx)

    def lengths(self) -> dict[Key, int]:
        return {key: len(idx) for key, idx in self.pieces.items()}

    def __len__(self) -> int:
        return len(self.pieces)


def build_piece_table(cache: CacheMap, demands: Sequence[int], users: Sequence[int] | None = None) -> PieceTable:
    """Group every requested, locally missing symbol by its exact caching set.

    ``demands[k]`` is the file requested by global user ``k``.  When ``users``
    is given, only those users take part: caching sets are intersected with
    ``users`` and only their demands are served.
    """
    K = cache.n_users
    if len(demands) != K:
        raise ValueError(f"demand vector has length {len(demands)}, expected {K}")
    users = tuple(range(K)) if users is None else tuple(sorted(users))
    if any(not 0 <= d < cache.n_files for d in demands):
        raise ValueError("demand outside the file library")
    pieces: dict[Key, np.ndarray] = {}
    for r in users:
        n = demands[r]
        missing = np.flatnonzero(~cache.cached[r, n])
        if missing.size == 0:
            continue
        others = [k for k in users if k != r]
        code = np.zeros(missing.size, dtype=np.int64)
        for bit, k in enumerate(others):
            code |= cache.cached[k, n, missing].astype(np.int64) << bit
        order = np.argsort(code, kind="stable")
        codes, starts = np.unique(code[order], return_index=True)
        bounds = list(starts[1:]) + [order.size]
        for c, lo, hi in zip(codes.tolist(), starts.tolist(), bounds):
            S = tuple(others[b] for b in range(len(others)) if c >> b & 1)
            pieces[(r, S)] = missing[order[lo:hi]]
    pieces = dict(sorted(pieces.items(), key=lambda kv: kv[0]))
    return PieceTable(users, {r: int(demands[r]) for r in users}, cache.file_size, pieces)


def piece_length_distribution(table: PieceTable, alpha: int) -> list[int]:
    """Lengths of the realized pieces whose caching set has ``alpha - 1`` members."""
    if not 1 <= alpha <= table.n_users:
        raise ValueError(f"alpha must lie in [1, {table.n_users}]")
    return [len(idx) for (r, S), idx in table.pieces.items() if len(S) == alpha - 1]
