"""Arithmetic over GF(2^m) and small dense linear algebra on top of it.

Field elements are plain integers in ``[0, 2^m)``; vectors and matrices are
integer numpy arrays.  All operations are vectorized through log/antilog
tables, so a single :class:`GF` instance handles scalars, vectors and
matrices alike.
"""

from __future__ import annotations

import functools

import numpy as np

__all__ = [
    "DEFAULT_BITS",
    "IRREDUCIBLE",
    "GF",
    "SingularSystem",
    "field",
    "clmul",
    "rank",
    "rref",
    "null_space_vector",
    "solve",
]

DEFAULT_BITS = 16

# x^8+x^4+x^3+x+1 and x^16+x^12+x^3+x+1
IRREDUCIBLE = {8: 0x11B, 16: 0x1100B}


class SingularSystem(ArithmeticError):
    """Raised when a square system has no unique solution."""


def clmul(a: int, b: int, m: int, poly: int) -> int:
    """Carry-less multiply of two field elements, reduced modulo ``poly``."""
    out = 0
    top = 1 << m
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _power(g: int, e: int, m: int, poly: int) -> int:
    acc = 1
    while e:
        if e & 1:
            acc = clmul(acc, g, m, poly)
        g = clmul(g, g, m, poly)
        e >>= 1
    return acc


class GF:
    """The field GF(2^m) for m in {8, 16}.

    Parameters
    ----------
    m : int
        Symbol width in bits; the field has ``q = 2**m`` elements.
    """

    def __init__(self, m: int = DEFAULT_BITS):
        if m not in IRREDUCIBLE:
            raise ValueError(f"unsupported field width m={m}; choose one of {sorted(IRREDUCIBLE)}")
        self.m = m
        self.poly = IRREDUCIBLE[m]
        self.order = 1 << m
        n = self.order - 1
        factors = _prime_factors(n)
        gen = next(
            g for g in range(2, self.order)
            if all(_power(g, n // f, m, self.poly) != 1 for f in factors)
        )
        self.generator = gen
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = clmul(x, gen, m, self.poly)
        if x != 1:
            raise RuntimeError("generator search failed; polynomial is not irreducible")
        exp[n:] = exp[:n]
        self._exp = exp
        self._log = log

    def __repr__(self) -> str:
        return f"GF(2^{self.m})"

    # -- elementwise -------------------------------------------------------

    @staticmethod
    def add(a, b):
        return np.bitwise_xor(a, b)

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self._exp[(self.order - 1) - self._log[a]]

    def random(self, rng: np.random.Generator, size=None, nonzero: bool = False):
        low = 1 if nonzero else 0
        return rng.integers(low, self.order, size=size, dtype=np.int64)

    # -- products ----------------------------------------------------------

    def dot(self, a, b):
        """Inner product along the last axis."""
        return np.bitwise_xor.reduce(self.mul(a, b), axis=-1)

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        vec = B.ndim == 1
        if vec:
            B = B[:, None]
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
        if A.shape[1] == 0:
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        else:
            out = np.bitwise_xor.reduce(self.mul(A[:, :, None], B[None, :, :]), axis=1)
        return out[:, 0] if vec else out


@functools.lru_cache(maxsize=None)
def field(m: int = DEFAULT_BITS) -> GF:
    """Shared field instance for width ``m`` (tables are built once per process)."""
    return GF(m)


def rref(F: GF, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with first-nonzero pivoting.

    Returns the reduced matrix and the list of pivot columns.
    """
    R = np.array(M, dtype=np.int64, copy=True)
    if R.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = F.mul(R[r], F.inv(R[r, c]))
        factors = R[:, c].copy()
        factors[r] = 0
        if factors.any():
            R ^= F.mul(factors[:, None], R[r][None, :])
        pivots.append(c)
        r += 1
    return R, pivots


def rank(F: GF, M) -> int:
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return 0
    return len(rref(F, M)[1])


def null_space_vector(F: GF, M) -> np.ndarray:
    """A nonzero ``v`` with ``M @ v == 0``.

    The vector is the kernel basis element belonging to the first free column
    of the reduced form, so the result is a deterministic function of ``M``.
    An empty constraint set yields the first standard basis vector.
    """
    M = np.asarray(M, dtype=np.int64)
    cols = M.shape[1]
    v = np.zeros(cols, dtype=np.int64)
    if M.shape[0] == 0:
        v[0] = 1
        return v
    R, pivots = rref(F, M)
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        raise ValueError("matrix has full column rank; null space is trivial")
    f = free[0]
    v[f] = 1
    for i, pc in enumerate(pivots):
        v[pc] = R[i, f]
    return v


def solve(F: GF, A, b) -> np.ndarray:
    """Solve ``A x = b`` for square ``A``; ``b`` may hold several right-hand sides as columns."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    vec = b.ndim == 1
    B = b[:, None] if vec else b
    if B.shape[0] != n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {n}")
    R, pivots = rref(F, np.hstack([A, B]))
    if pivots[:n] != list(range(n)):
        raise SingularSystem(f"{n}x{n} system is singular")
    x = R[:, n:]
    return x[:, 0] if vec else x
