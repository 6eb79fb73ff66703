"""Per-user reconstruction of demanded files from the received stream."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LinearNetwork, transmit
from .content import CacheMap, FileLibrary
from .delivery import TransmissionSchedule, combining_coefficients
from .gf import SingularSystem, solve

__all__ = ["DecodeResult", "VerifyReport", "received_streams", "decode_user", "verify_all", "zf_leakage"]


@dataclass
class DecodeResult:
    user: int
    symbols: np.ndarray  # reconstructed W_{d_k}; unresolved positions hold 0
    recovered: np.ndarray  # bool mask of positions known after decoding
    failed_blocks: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    systems: int = 0  # omega x omega systems attempted


@dataclass
class VerifyReport:
    per_user: dict[int, bool]

    @property
    def all_ok(self) -> bool:
        return all(self.per_user.values())


def received_streams(net: LinearNetwork, schedule: TransmissionSchedule) -> np.ndarray:
    if schedule.slots is None:
        raise ValueError("schedule carries no slot vectors; build it with a library")
    return transmit(net, schedule.slots)


class _CacheView:
    """Read access to exactly the symbols user ``k`` stored during placement."""

    def __init__(self, k: int, cache: CacheMap, library: FileLibrary):
        self.k = k
        self._cache = cache
        self._files = library.files

    def read(self, n: int, idx: np.ndarray) -> np.ndarray:
        if not self._cache.cached[self.k, n, idx].all():
            raise LookupError(f"user {self.k} does not cache the requested symbols of file {n}")
        return self._files[n, idx]

    def own(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        idx = self._cache.indices(self.k, n)
        return idx, self._files[n, idx]


def decode_user(k: int, stream: np.ndarray, cache: CacheMap, library: FileLibrary,
                schedule: TransmissionSchedule, net: LinearNetwork) -> DecodeResult:
    """Recover ``W_{d_k}`` for user ``k``.

    In every block whose user set contains ``k``, the groups not containing
    ``k`` are nulled by their precoders.  The user strips the cached
    mini-files of the other members from the remaining groups and solves the
    resulting ``omega x omega`` system for its own mini-files.  A singular
    system leaves that block's symbols unresolved and is recorded in
    ``failed_blocks``.
    """
    F = net.field
    n_k = schedule.demands[k]
    view = _CacheView(k, cache, library)
    out = np.zeros(library.file_size, dtype=np.int64)
    recovered = np.zeros(library.file_size, dtype=bool)
    idx, vals = view.own(n_k)
    out[idx] = vals
    recovered[idx] = True
    result = DecodeResult(k, out, recovered)
    h = net.H[k]

    for b, start in zip(schedule.blocks, schedule.offsets()):
        if k not in b.users:
            continue
        seg = stream[start:start + b.n_slots].reshape(b.omega, b.length).copy()
        phi = combining_coefficients(F, schedule.coefficient_seed, b)
        A = np.zeros((b.omega, b.omega), dtype=np.int64)
        unknowns = []
        for u, g in enumerate(b.groups):
            if k not in g.members:
                continue
            gain = F.dot(h, g.precoder)
            for j, (r, m) in enumerate(zip(g.members, g.minifiles)):
                if r == k:
                    A[:, len(unknowns)] = F.mul(gain, phi[:, u, j])
                    unknowns.append(m)
                elif m is not None:
                    known = np.zeros(b.length, dtype=np.int64)
                    known[:len(m.symbols)] = view.read(schedule.demands[r], m.symbols)
                    seg ^= F.mul(F.mul(gain, phi[:, u, j])[:, None], known[None, :])
        if len(unknowns) != b.omega:
            raise AssertionError(f"user {k} has {len(unknowns)} unknowns in a block with omega={b.omega}")
        if all(m is None for m in unknowns):
            continue
        result.systems += 1
        try:
            X = solve(F, A, seg)
        except SingularSystem:
            result.failed_blocks.append((b.alpha, b.users))
            continue
        for row, m in zip(X, unknowns):
            if m is None:
                continue
            if recovered[m.symbols].any():
                raise AssertionError(f"user {k} recovered symbols twice in block {(b.alpha, b.users)}")
            out[m.symbols] = row[:len(m.symbols)]
            recovered[m.symbols] = True
    return result


def verify_all(library: FileLibrary, demands, decoded: dict[int, np.ndarray]) -> VerifyReport:
    """Compare each user's reconstruction with the file it asked for."""
    return VerifyReport({k: bool(np.array_equal(sym, library.files[demands[k]])) for k, sym in decoded.items()})


def zf_leakage(schedule: TransmissionSchedule, net: LinearNetwork) -> int:
    """Number of (block, group, nulled user) triples where the precoder is not orthogonal to the user."""
    F = net.field
    bad = 0
    for b in schedule.blocks:
        for g in b.groups:
            for k in b.users:
                if k not in g.members and F.dot(net.H[k], g.precoder) != 0:
                    bad += 1
    return bad
