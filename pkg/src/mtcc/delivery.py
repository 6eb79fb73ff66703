"""Zero-forcing coded multicast delivery and its coding-delay accounting.

For every caching level ``alpha = K..1`` the engine walks the user sets ``T``
of size ``min(alpha + L - 1, K)`` in lexicographic order.  Inside ``T`` every
``alpha``-subset ``U`` gets a precoder nulled at ``T \\ U`` and a random linear
combination of the mini-files ``W_{d_r, U \\ {r}}``, ``r in U``.  The block for
``T`` is repeated ``omega = C(|T| - 1, alpha - 1)`` times with fresh
coefficients, which gives each user in ``T`` exactly as many equations as it
has unknown mini-files in the block.

Each piece ``(r, S)`` is cut into ``C(K - alpha, |T| - alpha)`` consecutive
mini-files of ``ceil(len / n_split)`` symbols (the last ones may be shorter or
empty), and the i-th enclosing ``T`` in lexicographic order carries the i-th
mini-file.  A block repetition lasts as long as its longest mini-file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import combinations
from math import comb
from typing import IO

import numpy as np

from .channel import DegenerateChannel, LinearNetwork
from .content import FileLibrary, PieceTable
from .gf import GF, null_space_vector

__all__ = [
    "MiniFile",
    "Group",
    "Block",
    "TransmissionSchedule",
    "DeliveryReport",
    "block_size",
    "plan_delivery",
    "design_zf_vector",
    "combining_coefficients",
    "schedule_delivery",
    "schedule_tdma",
    "coding_delay_of_schedule",
    "dump_schedule",
]


@dataclass(frozen=True)
class MiniFile:
    requester: int
    cached_by: tuple[int, ...]
    index: int
    symbols: np.ndarray  # positions inside W_{d_requester}


@dataclass(frozen=True)
class Group:
    """One ``alpha``-subset ``U`` of a block; ``minifiles`` aligns with ``members`` (None = empty piece)."""

    members: tuple[int, ...]
    minifiles: tuple[MiniFile | None, ...]
    precoder: np.ndarray | None = None


@dataclass(frozen=True)
class Block:
    alpha: int
    users: tuple[int, ...]
    omega: int
    n_split: int
    length: int
    groups: tuple[Group, ...]

    @property
    def n_slots(self) -> int:
        return self.omega * self.length


@dataclass(frozen=True)
class TransmissionSchedule:
    blocks: tuple[Block, ...]
    n_transmitters: int
    coefficient_seed: int
    demands: dict[int, int]
    slots: np.ndarray | None = None  # (L, total_slots) when materialized

    @property
    def total_slots(self) -> int:
        return sum(b.n_slots for b in self.blocks)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.n_slots
        return out


@dataclass(frozen=True)
class DeliveryReport:
    coding_delay_slots: int
    block_lengths: dict[tuple[int, tuple[int, ...]], int]
    resample_events: int = 0


def block_size(K: int, L: int, alpha: int) -> tuple[int, int, int]:
    """``(|T|, omega, n_split)`` for caching level ``alpha`` with K users and L transmitters."""
    size = min(alpha + L - 1, K)
    return size, comb(size - 1, alpha - 1), comb(K - alpha, size - alpha)


def plan_delivery(table: PieceTable, L: int) -> tuple[Block, ...]:
    """Block structure and mini-file assignment, independent of channel and content.

    Blocks whose mini-files are all empty carry nothing and are left out.
    """
    users = table.users
    K = len(users)
    blocks = []
    for alpha in range(K, 0, -1):
        size, omega, n_split = block_size(K, L, alpha)
        next_fragment: dict[tuple[int, ...], int] = {}
        for T in combinations(users, size):
            groups = []
            length = 0
            for U in combinations(T, alpha):
                frag = next_fragment.get(U, 0)
                next_fragment[U] = frag + 1
                minis = []
                for r in U:
                    S = tuple(u for u in U if u != r)
                    idx = table.pieces.get((r, S))
                    if idx is None:
                        minis.append(None)
                        continue
                    width = -(-len(idx) // n_split)
                    part = idx[frag * width:(frag + 1) * width]
                    length = max(length, len(part))
                    minis.append(MiniFile(r, S, frag, part) if len(part) else None)
                groups.append(Group(U, tuple(minis)))
            if length:
                blocks.append(Block(alpha, T, omega, n_split, length, tuple(groups)))
        assert all(v == n_split for v in next_fragment.values())
    return tuple(blocks)


def design_zf_vector(net: LinearNetwork, T, U) -> np.ndarray:
    """Precoder orthogonal to ``h_k`` for ``k in T \\ U`` and visible to every ``k in U``.

    Raises :class:`DegenerateChannel` when some member of ``U`` also lands in
    the null space (a non-generic ``H``).
    """
    U = tuple(U)
    nulled = [k for k in T if k not in U]
    if len(nulled) >= net.n_transmitters:
        raise ValueError(f"cannot null {len(nulled)} users with L={net.n_transmitters} transmitters")
    psi = null_space_vector(net.field, net.H[nulled].reshape(len(nulled), net.n_transmitters))
    gains = net.field.dot(net.H[list(U)], psi)
    if np.any(gains == 0):
        raise DegenerateChannel(f"precoder for T={tuple(T)}, U={U} vanishes at a served user")
    return psi


def combining_coefficients(field: GF, seed: int, block: Block) -> np.ndarray:
    """Public combining coefficients, shape ``(omega, len(groups), alpha)``.

    Derived from ``(seed, alpha, T)`` only, so transmitters and every user
    regenerate the same values without signaling.
    """
    mask = sum(1 << u for u in block.users)
    rng = np.random.default_rng([seed, block.alpha, mask])
    return field.random(rng, (block.omega, len(block.groups), block.alpha), nonzero=True)


def _attach_precoders(blocks, net: LinearNetwork) -> tuple[Block, ...]:
    out = []
    for b in blocks:
        groups = tuple(replace(g, precoder=design_zf_vector(net, b.users, g.members)) for g in b.groups)
        out.append(replace(b, groups=groups))
    return tuple(out)


def _materialize(blocks, net: LinearNetwork, library: FileLibrary, demands, seed: int) -> np.ndarray:
    F = net.field
    L = net.n_transmitters
    chunks = []
    for b in blocks:
        Y = np.zeros((L, b.omega, b.length), dtype=np.int64)
        phi = combining_coefficients(F, seed, b)
        for u, g in enumerate(b.groups):
            if all(m is None for m in g.minifiles):
                continue
            P = np.zeros((b.alpha, b.length), dtype=np.int64)
            for j, m in enumerate(g.minifiles):
                if m is not None:
                    P[j, :len(m.symbols)] = library.files[demands[m.requester], m.symbols]
            G = F.matmul(phi[:, u, :], P)
            Y ^= F.mul(g.precoder[:, None, None], G[None])
        chunks.append(Y.reshape(L, b.n_slots))
    if not chunks:
        return np.zeros((L, 0), dtype=np.int64)
    return np.concatenate(chunks, axis=1)


def schedule_delivery(table: PieceTable, net: LinearNetwork | None, library: FileLibrary | None = None,
                      seed: int = 0, L: int | None = None) -> TransmissionSchedule:
    """Build the transmission schedule for one piece table.

    With ``net=None`` only the block structure is produced (enough for delay
    accounting; ``L`` must then be given).  With a network, every group gets
    its zero-forcing precoder; passing ``library`` as well fills in the
    transmitted slot vectors.
    """
    if net is None:
        if L is None:
            raise ValueError("L is required when no network is given")
    else:
        L = net.n_transmitters
    blocks = plan_delivery(table, L)
    slots = None
    if net is not None:
        blocks = _attach_precoders(blocks, net)
        if library is not None:
            slots = _materialize(blocks, net, library, table.demands, seed)
    return TransmissionSchedule(blocks, L, seed, dict(table.demands), slots)


def schedule_tdma(table_a: PieceTable, table_b: PieceTable, net: LinearNetwork | None,
                  library: FileLibrary | None = None, seed: int = 0, L: int | None = None) -> TransmissionSchedule:
    """Serve group A to completion, then group B, each with its own schedule."""
    first = schedule_delivery(table_a, net, library, seed, L)
    second = schedule_delivery(table_b, net, library, seed, L)
    slots = None
    if first.slots is not None and second.slots is not None:
        slots = np.concatenate([first.slots, second.slots], axis=1)
    return TransmissionSchedule(first.blocks + second.blocks, first.n_transmitters, seed,
                                {**first.demands, **second.demands}, slots)


def coding_delay_of_schedule(schedule: TransmissionSchedule, resample_events: int = 0) -> DeliveryReport:
    lengths = {(b.alpha, b.users): b.length for b in schedule.blocks}
    return DeliveryReport(sum(b.omega * b.length for b in schedule.blocks), lengths, resample_events)


def dump_schedule(schedule: TransmissionSchedule, fh: IO[str]) -> None:
    """One JSON object per block: alpha, T, omega, blocklen."""
    for b in schedule.blocks:
        fh.write(json.dumps({"alpha": b.alpha, "T": list(b.users), "omega": b.omega, "blocklen": b.length}) + "\n")
