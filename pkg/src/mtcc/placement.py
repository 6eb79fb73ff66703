"""Cache content placement: decentralized, centralized and the two-group hybrid."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .content import CacheMap, SystemConfig

__all__ = [
    "InvalidCentralizedParameter",
    "centralized_t",
    "place_decentralized",
    "place_centralized",
    "place_hybrid",
]


class InvalidCentralizedParameter(ValueError):
    """K_c·M/N is not an integer, so no centralized split exists."""


def centralized_t(K_c: int, cfg: SystemConfig) -> int:
    t = cfg.ratio * K_c
    if t.denominator != 1:
        raise InvalidCentralizedParameter(f"t = K_c*M/N = {K_c}*{cfg.M}/{cfg.N} = {float(t):g} is not an integer")
    return int(t)


def _random_subsets(rng: np.random.Generator, n_users: int, cfg: SystemConfig) -> np.ndarray:
    c = cfg.cached_per_file
    cached = np.zeros((n_users, cfg.N, cfg.F), dtype=bool)
    if c == 0:
        return cached
    for k in range(n_users):
        for n in range(cfg.N):
            cached[k, n, rng.choice(cfg.F, size=c, replace=False)] = True
    return cached


def _leftover_labels(K: int, t: int, count: int, restarts: int = 200) -> list[int]:
    """Indices of ``count`` distinct t-subset labels whose per-user loads differ by at most one.

    Greedy choice of the label with the least-loaded members, restarted with
    shuffled tie-breaking until the loads are balanced.  The shuffles come
    from a fixed seed, so the result is deterministic.
    """
    members = np.array(list(combinations(range(K), t)), dtype=np.int64).reshape(-1, t)
    rng = np.random.default_rng(0)
    best: tuple[int, list[int]] | None = None
    for attempt in range(restarts):
        order = np.arange(len(members)) if attempt == 0 else rng.permutation(len(members))
        cand = members[order]
        load = np.zeros(K, dtype=np.int64)
        free = np.ones(len(order), dtype=bool)
        chosen = []
        for _ in range(count):
            m = load[cand]
            score = np.where(free, m.max(axis=1) * (K * len(members) + 1) + m.sum(axis=1), np.iinfo(np.int64).max)
            i = int(np.argmin(score))
            free[i] = False
            load[cand[i]] += 1
            chosen.append(int(order[i]))
        spread = int(load.max() - load.min()) if count else 0
        if best is None or spread < best[0]:
            best = (spread, sorted(chosen))
        if spread <= 1:
            break
    return best[1]


def _centralized_block(K_c: int, t: int, cfg: SystemConfig) -> np.ndarray:
    """Occupancy for K_c cooperating users; every symbol is held by exactly t of them."""
    cached = np.zeros((K_c, cfg.N, cfg.F), dtype=bool)
    if K_c == 0 or t == 0:
        return cached
    labels = list(combinations(range(K_c), t))
    base, leftover = divmod(cfg.F, len(labels))
    # subfile j gets `base` symbols, plus one leftover symbol for a balanced set of labels
    extra = np.zeros(len(labels), dtype=np.int64)
    extra[_leftover_labels(K_c, t, leftover)] = 1
    sizes = base + extra
    owners = np.zeros((cfg.F, K_c), dtype=bool)
    start = 0
    for label, size in zip(labels, sizes.tolist()):
        owners[start:start + size, list(label)] = True
        start += size
    cached[:] = owners.T[:, None, :]
    return cached


def place_decentralized(cfg: SystemConfig, seed=None) -> CacheMap:
    """Each user independently stores a uniform random (M/N)·F-subset of every file."""
    rng = np.random.default_rng(seed)
    return CacheMap(_random_subsets(rng, cfg.K, cfg))


def place_centralized(cfg: SystemConfig) -> CacheMap:
    """Classic coordinated split over all ``cfg.K`` users.

    Each file is cut into C(K, t) subfiles, t = K·M/N, and the subfile labelled
    by a t-subset is stored by exactly those users.  The placement is
    deterministic.
    """
    t = centralized_t(cfg.K, cfg)
    return CacheMap(_centralized_block(cfg.K, t, cfg))


def place_hybrid(cfg: SystemConfig, K_c: int, seed=None) -> CacheMap:
    """Users ``0..K_c-1`` cooperate (centralized among themselves); the rest place randomly."""
    if not 0 <= K_c <= cfg.K:
        raise ValueError(f"K_c={K_c} outside [0, K={cfg.K}]")
    t = centralized_t(K_c, cfg)
    rng = np.random.default_rng(seed)
    cached = np.concatenate([
        _centralized_block(K_c, t, cfg),
        _random_subsets(rng, cfg.K - K_c, cfg),
    ])
    return CacheMap(cached)

