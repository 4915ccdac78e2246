"""Permutation identifiers, the rotation shift R, and canonical identifiers.

A permutation is stored 1-based as its identifier sequence
``(sigma(1), ..., sigma(n))``. Two wirings are equivalent when one is reached
from the other by repeated shifts; the canonical identifier (CPID) is the
lexicographically smallest member of the shift class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence


class PermutationError(ValueError):
    """Malformed permutation text or sequence."""


@dataclass(frozen=True, order=True)
class Permutation:
    ids: tuple[int, ...]

    def __post_init__(self) -> None:
        ids = tuple(int(v) for v in self.ids)
        object.__setattr__(self, "ids", ids)
        _check_bijection(ids)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def parse(cls, text: str) -> Permutation:
        """Parse ``"1 5 2 6"``, ``"1,5,2,6"`` or ``"P(1526)"`` style text.

        The compact ``P(1526)`` form is only accepted for n <= 9.
        """
        return cls(parse_ids(text))

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __getitem__(self, i: int) -> int:
        return self.ids[i]

    def __str__(self) -> str:
        return " ".join(map(str, self.ids))

    def label(self) -> str:
        """Compact ``P(...)`` label; digits run together when n <= 9."""
        sep = "" if self.n <= 9 else " "
        return f"P({sep.join(map(str, self.ids))})"

    def swapped(self, j: int, k: int) -> Permutation:
        """Copy with the values at 0-based positions j and k exchanged."""
        ids = list(self.ids)
        ids[j], ids[k] = ids[k], ids[j]
        return Permutation(tuple(ids))


def _check_bijection(ids: Sequence[int]) -> None:
    n = len(ids)
    if n == 0:
        raise PermutationError("empty permutation")
    seen: dict[int, int] = {}
    for pos, v in enumerate(ids, start=1):
        if not 1 <= v <= n:
            raise PermutationError(f"value {v} at position {pos} is outside 1..{n}")
        if v in seen:
            raise PermutationError(
                f"value {v} at position {pos} repeats position {seen[v]}"
            )
        seen[v] = pos


_TOKEN = re.compile(r"[\s,]+")


def parse_ids(text: str) -> tuple[int, ...]:
    s = text.strip()
    compact = re.fullmatch(r"P\(\s*([0-9 ,]*)\)", s)
    if compact:
        s = compact.group(1).strip()
        if s and not _TOKEN.search(s):
            # P(1526374): one digit per position
            s = " ".join(s)
    s = s.strip("[]() ")
    if not s:
        raise PermutationError("empty permutation")
    out = []
    for pos, tok in enumerate((t for t in _TOKEN.split(s) if t), start=1):
        try:
            out.append(int(tok))
        except ValueError:
            raise PermutationError(f"token {tok!r} at position {pos} is not an integer") from None
    return tuple(out)


def shift(p: Permutation) -> Permutation:
    """Apply R: sigma1(i+1) = sigma0(i) + 1, values and indices wrapping in 1..n."""
    n = p.n
    out = [0] * n
    for i, v in enumerate(p.ids):
        out[(i + 1) % n] = v % n + 1
    return Permutation(tuple(out))


def equivalence_class(p: Permutation) -> list[Permutation]:
    """Shift orbit ``[p, R(p), R^2(p), ...]`` up to the first repetition."""
    members = [p]
    q = shift(p)
    while q != p:
        members.append(q)
        q = shift(q)
    return members


def cpid(p: Permutation) -> Permutation:
    # lexicographic order on the identifier sequence is base-n order
    return min(equivalence_class(p), key=lambda q: q.ids)


def is_canonical(p: Permutation) -> bool:
    return cpid(p) == p


def canonical_class_representatives(n: int) -> Iterable[Permutation]:
    """Yield every CPID of size n once (brute force over n! permutations)."""
    from itertools import permutations

    for ids in permutations(range(1, n + 1)):
        p = Permutation(ids)
        if cpid(p) == p:
            yield p
