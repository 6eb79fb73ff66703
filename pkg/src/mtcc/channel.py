"""Error-free, zero-delay linear network: r(t) = H s(t) over GF(2^m)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf import GF

__all__ = ["LinearNetwork", "DegenerateChannel", "sample_network", "transmit_slot", "transmit"]


class DegenerateChannel(RuntimeError):
    """The sampled transfer matrix is not in generic position for the requested precoder."""


@dataclass(frozen=True)
class LinearNetwork:
    H: np.ndarray  # (K, L), static for the whole delivery phase
    field: GF
    seed: object = None

    @property
    def n_users(self) -> int:
        return self.H.shape[0]

    @property
    def n_transmitters(self) -> int:
        return self.H.shape[1]


def sample_network(K: int, L: int, field: GF, seed=None) -> LinearNetwork:
    """Transfer matrix with i.i.d. uniform entries, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return LinearNetwork(field.random(rng, (K, L)), field, seed)


def transmit_slot(net: LinearNetwork, s) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (net.n_transmitters,):
        raise ValueError(f"slot vector must have length L={net.n_transmitters}, got shape {s.shape}")
    return net.field.matmul(net.H, s)


def transmit(net: LinearNetwork, slots: np.ndarray) -> np.ndarray:
    """Apply the network to an (L, T) stream of slot vectors; returns the (K, T) received stream."""
    slots = np.asarray(slots, dtype=np.int64)
    if slots.ndim != 2 or slots.shape[0] != net.n_transmitters:
        raise ValueError(f"expected an (L={net.n_transmitters}, T) array, got shape {slots.shape}")
    if slots.shape[1] == 0:
        return np.zeros((net.n_users, 0), dtype=np.int64)
    out = np.zeros((net.n_users, slots.shape[1]), dtype=np.int64)
    for j in range(net.n_transmitters):
        out ^= net.field.mul(net.H[:, j:j + 1], slots[j][None, :])
    return out
