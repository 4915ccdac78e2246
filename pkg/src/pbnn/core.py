"""PBNN state encoding and the one-step map F.

States are packed into an integer: bit ``i-1`` holds ``x_i`` with 1 meaning +1
and 0 meaning -1. The same convention is used by every module and file format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pbnn.canonical import Permutation

WORD_BITS = 64
MIN_N = 3


class StateError(ValueError):
    """Malformed or out-of-range state."""


def check_n(n: int) -> int:
    if not MIN_N <= n <= WORD_BITS:
        raise ValueError(f"dimension n={n} outside {MIN_N}..{WORD_BITS}")
    return n


def check_cn(cn: int) -> int:
    if not isinstance(cn, (int, np.integer)) or not 0 <= cn <= 7:
        raise ValueError(f"connection number {cn!r} outside 0..7")
    return int(cn)


@dataclass(frozen=True)
class BinaryState:
    n: int
    bits: int

    def __post_init__(self) -> None:
        check_n(self.n)
        if self.bits < 0 or self.bits >> self.n:
            raise StateError(f"bits 0x{self.bits:x} do not fit in n={self.n}")

    @classmethod
    def from_values(cls, values: Sequence[int]) -> BinaryState:
        bits = 0
        for i, v in enumerate(values):
            if v not in (-1, 1):
                raise StateError(f"component {i + 1} is {v}, expected -1 or +1")
            if v == 1:
                bits |= 1 << i
        return cls(len(values), bits)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> BinaryState:
        """Accept a ``+/-`` string (index 1 leftmost) or hex (``0x`` optional).

        Hex needs ``n``; a ``+/-`` string carries its own length.
        """
        s = text.strip()
        if s and set(s) <= {"+", "-"}:
            st = cls.from_values([1 if c == "+" else -1 for c in s])
            if n is not None and st.n != n:
                raise StateError(f"state has {st.n} components, expected {n}")
            return st
        h = s[2:] if s.lower().startswith("0x") else s
        if not re.fullmatch(r"[0-9a-fA-F]+", h):
            bad = next((i for i, c in enumerate(s, 1) if c not in "+-"), 1)
            raise StateError(f"state {text!r}: unexpected character at position {bad}")
        if n is None:
            raise StateError("hex state needs an explicit dimension")
        return cls(n, int(h, 16))

    def values(self) -> tuple[int, ...]:
        return tuple(1 if (self.bits >> i) & 1 else -1 for i in range(self.n))

    def to_pm(self) -> str:
        return "".join("+" if (self.bits >> i) & 1 else "-" for i in range(self.n))

    def to_hex(self) -> str:
        return state_hex(self.bits, self.n)

    def __str__(self) -> str:
        return self.to_pm()


def state_hex(bits: int, n: int) -> str:
    return f"{bits:0{(n + 3) // 4}x}"


def full_mask(n: int) -> int:
    return (1 << n) - 1


def weights_for_cn(cn: int) -> tuple[int, int, int]:
    """Weight triple (w_a, w_b, w_c); bit 2 of cn gives w_a, bit 0 gives w_c."""
    cn = check_cn(cn)
    return tuple(1 if (cn >> b) & 1 else -1 for b in (2, 1, 0))  # type: ignore[return-value]


def _sgn(v: int) -> int:
    return 1 if v >= 0 else -1


def truth_table(cn: int) -> int:
    """8-bit neighborhood table: bit k is the output for k = 4*b(x_{i-1}) + 2*b(x_i) + b(x_{i+1})."""
    wa, wb, wc = weights_for_cn(cn)
    mask = 0
    for k in range(8):
        a, b, c = (1 if (k >> s) & 1 else -1 for s in (2, 1, 0))
        total = wa * a + wb * b + wc * c
        assert total != 0, "weighted sum of three +-1 terms is odd"
        if _sgn(total) == 1:
            mask |= 1 << k
    return mask


@dataclass(frozen=True)
class Pbnn:
    n: int
    cn: int
    sigma: Permutation

    def __post_init__(self) -> None:
        check_n(self.n)
        check_cn(self.cn)
        if self.sigma.n != self.n:
            raise ValueError(f"permutation has length {self.sigma.n}, expected {self.n}")

    @property
    def mask(self) -> int:
        return truth_table(self.cn)

    def __str__(self) -> str:
        return f"PBNN(n={self.n}, CN{self.cn}, {self.sigma.label()})"


# ---------------------------------------------------------------------------
# Direct evaluation, one component at a time.

def hidden_layer_direct(x: BinaryState, cn: int) -> BinaryState:
    wa, wb, wc = weights_for_cn(cn)
    v = x.values()
    n = x.n
    y = [_sgn(wa * v[i - 1] + wb * v[i] + wc * v[(i + 1) % n]) for i in range(n)]
    return BinaryState.from_values(y)


def step_direct(x: BinaryState, net: Pbnn) -> BinaryState:
    if x.n != net.n:
        raise ValueError(f"state dimension {x.n} != network dimension {net.n}")
    y = hidden_layer_direct(x, net.cn).values()
    return BinaryState.from_values([y[s - 1] for s in net.sigma.ids])


# ---------------------------------------------------------------------------
# Bit-parallel evaluation. These work on Python ints and on numpy integer
# arrays alike, since both support the same bitwise operators.

def hidden_bits(s, n: int, mask: int):
    """Hidden-layer word for state word(s) ``s`` using the neighborhood table."""
    full = full_mask(n)
    left = ((s << 1) | (s >> (n - 1))) & full  # position i-1 holds x_{i-1}
    right = ((s >> 1) | (s << (n - 1))) & full  # position i-1 holds x_{i+1}
    nleft, ns, nright = ~left & full, ~s & full, ~right & full
    y = s & 0
    for k in range(8):
        if (mask >> k) & 1:
            y = y | ((left if k & 4 else nleft) & (s if k & 2 else ns) & (right if k & 1 else nright))
    return y


def permute_bits(y: int, sigma: Permutation) -> int:
    out = 0
    for i, src in enumerate(sigma.ids):
        out |= ((y >> (src - 1)) & 1) << i
    return out


def hidden_layer(x: BinaryState, cn: int) -> BinaryState:
    return BinaryState(x.n, hidden_bits(x.bits, x.n, truth_table(cn)))


def step(x: BinaryState, net: Pbnn) -> BinaryState:
    """F(x): output component i is hidden component sigma(i)."""
    if x.n != net.n:
        raise ValueError(f"state dimension {x.n} != network dimension {net.n}")
    return BinaryState(net.n, step_bits(x.bits, net))


def step_bits(bits: int, net: Pbnn) -> int:
    return permute_bits(hidden_bits(bits, net.n, net.mask), net.sigma)


def trajectory(x0: BinaryState, net: Pbnn, t_max: int) -> list[BinaryState]:
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    out = [x0]
    x = x0
    for _ in range(t_max):
        x = step(x, net)
        out.append(x)
    return out


def endpoints(n: int) -> tuple[int, int]:
    """Packed x_- and x_+."""
    return 0, full_mask(n)


# ---------------------------------------------------------------------------
# Whole state space at once.

def state_dtype(n: int):
    return np.uint32 if n <= 32 else np.uint64


def _byte_tables(sigma: Permutation, dtype) -> list[np.ndarray]:
    """For each 8-bit chunk of the hidden word, the permuted output contribution."""
    n = sigma.n
    dest: dict[int, int] = {src - 1: i for i, src in enumerate(sigma.ids)}
    byte = np.arange(256, dtype=np.uint64)
    tables = []
    for c in range((n + 7) // 8):
        t = np.zeros(256, dtype=np.uint64)
        for b in range(8):
            src = 8 * c + b
            if src < n:
                t |= ((byte >> np.uint64(b)) & np.uint64(1)) << np.uint64(dest[src])
        tables.append(t.astype(dtype))
    return tables


def transition_table(net: Pbnn) -> np.ndarray:
    """Array ``f`` with ``f[s] = F(s)`` for every packed state s in 0..2^n-1."""
    n = net.n
    dtype = state_dtype(n)
    s = np.arange(1 << n, dtype=dtype)
    y = hidden_bits(s, n, net.mask)
    out = np.zeros_like(s)
    for c, table in enumerate(_byte_tables(net.sigma, dtype)):
        out |= table[(y >> dtype(8 * c)) & dtype(0xFF)]
    return out
