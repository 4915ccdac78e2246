"""Exhaustive decomposition of the 2^n state space into periodic orbits and basins."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numba
import numpy as np

from pbnn.core import BinaryState, Pbnn, endpoints, state_hex, transition_table

DEFAULT_MAX_N = 24
ORBIT_STATE_CAP = 1024


class ExhaustiveBoundError(RuntimeError):
    """Raised instead of silently sampling when 2^n is too large."""


@dataclass(frozen=True)
class Orbit:
    period: int
    min_state: int
    basin_size: int
    contains_endpoint: bool
    # orbit order starting at min_state; empty when period exceeds the cap
    states: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        """Number of states ending on this orbit: #BPPs + #EPPs."""
        return self.period + self.basin_size


@dataclass(frozen=True)
class Bpp:
    orbit: Orbit


@dataclass(frozen=True)
class Epp:
    orbit: Orbit
    transient: int


@dataclass(frozen=True)
class Endpoint:
    orbit: Orbit


Classification = Union[Bpp, Epp, Endpoint]


@dataclass(frozen=True, eq=False)
class AttractorReport:
    net: Pbnn
    orbits: tuple[Orbit, ...]
    table: Optional[np.ndarray] = field(default=None, repr=False)
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_states(self) -> int:
        return 1 << self.net.n

    @property
    def f_max_num(self) -> int:
        return self.n_states - 2

    @property
    def f1_best_num(self) -> int:
        return best_orbit(self).size

    @property
    def f1_best(self) -> Fraction:
        return Fraction(self.f1_best_num, self.n_states)

    @property
    def gbpo(self) -> Optional[Orbit]:
        for o in self.orbits:
            if o.size == self.f_max_num and not o.contains_endpoint:
                return o
        return None

    def signature(self) -> list[tuple[int, int]]:
        """Sorted (period, basin_size) multiset; invariant under shift conjugacy."""
        return sorted((o.period, o.basin_size) for o in self.orbits)

    def to_dict(self) -> dict:
        n = self.net.n
        g = self.gbpo
        return {
            "n": n,
            "cn": self.net.cn,
            "permutation": str(self.net.sigma),
            "orbits": [
                {
                    "period": o.period,
                    "basin_size": o.basin_size,
                    "min_state_hex": state_hex(o.min_state, n),
                    "contains_endpoint": o.contains_endpoint,
                    "f1_num": o.size,
                }
                for o in self.orbits
            ],
            "f1_best_num": self.f1_best_num,
            "gbpo_period": g.period if g is not None else None,
        }


@numba.njit(cache=True, nogil=True)
def _sweep(f):
    """Three-color functional-graph pass with an explicit path stack.

    Returns per-state orbit label (discovery order), the cycle states laid out
    contiguously in orbit order, and each orbit's offset into that layout.
    """
    size = f.shape[0]
    color = np.zeros(size, np.uint8)  # 0 unseen, 1 on current path, 2 done
    label = np.empty(size, np.int32)
    stack = np.empty(size, np.int64)
    cycle_states = np.empty(size, np.int64)
    offsets = np.empty(size + 1, np.int64)
    n_orbits = 0
    n_cycle = 0
    offsets[0] = 0
    for start in range(size):
        if color[start] != 0:
            continue
        top = 0
        x = start
        while color[x] == 0:
            color[x] = 1
            stack[top] = x
            top += 1
            x = f[x]
        if color[x] == 1:
            # x is on the current path: the stack suffix from x is a new cycle
            pos = top - 1
            while stack[pos] != x:
                pos -= 1
            oid = n_orbits
            for q in range(pos, top):
                y = stack[q]
                cycle_states[n_cycle] = y
                n_cycle += 1
                color[y] = 2
                label[y] = oid
            n_orbits += 1
            offsets[n_orbits] = n_cycle
            top = pos
        else:
            oid = label[x]
        for q in range(top):
            y = stack[q]
            color[y] = 2
            label[y] = oid
    return label, cycle_states[:n_cycle].copy(), offsets[: n_orbits + 1].copy()


def _check_bound(n: int, max_n: int) -> None:
    if n > max_n:
        raise ExhaustiveBoundError(
            f"n={n} exceeds the exhaustive bound {max_n} (2^{n} states); raise max_n to proceed"
        )


def analyze(net: Pbnn, max_n: int = DEFAULT_MAX_N, state_cap: int = ORBIT_STATE_CAP) -> AttractorReport:
    """Decompose every state of ``net``; orbits are ordered by smallest member."""
    _check_bound(net.n, max_n)
    f = transition_table(net)
    label, cyc, offsets = _sweep(f)
    n_orbits = len(offsets) - 1
    counts = np.bincount(label, minlength=n_orbits)
    periods = np.diff(offsets)
    lo, hi = endpoints(net.n)
    orbits = []
    for oid in range(n_orbits):
        members = cyc[offsets[oid]: offsets[oid + 1]]
        i_min = int(np.argmin(members))
        p = int(periods[oid])
        states = tuple(np.roll(members, -i_min).tolist()) if p <= state_cap else ()
        orbits.append(
            Orbit(
                period=p,
                min_state=int(members[i_min]),
                basin_size=int(counts[oid]) - p,
                contains_endpoint=bool(np.any((members == lo) | (members == hi))),
                states=states,
            )
        )
    order = sorted(range(n_orbits), key=lambda i: orbits[i].min_state)
    remap = np.empty(max(n_orbits, 1), np.int32)
    remap[order] = np.arange(n_orbits, dtype=np.int32)
    report = AttractorReport(net, tuple(orbits[i] for i in order), f, remap[label])
    total = sum(o.size for o in report.orbits)
    if total != report.n_states:
        raise AssertionError(f"orbit partition covers {total} of {report.n_states} states")
    return report


def f1(report: AttractorReport, orbit: Orbit) -> Fraction:
    if orbit not in report.orbits:
        raise ValueError("orbit does not belong to this report")
    return Fraction(orbit.size, report.n_states)


def best_orbit(report: AttractorReport) -> Orbit:
    """Orbit maximizing F1; ties go to the smaller period, then smaller min state."""
    return min(report.orbits, key=lambda o: (-o.size, o.period, o.min_state))


def is_gbpo(report: AttractorReport) -> bool:
    return report.gbpo is not None


def classify_state(x: BinaryState, report: AttractorReport) -> Classification:
    if x.n != report.net.n:
        raise ValueError(f"state dimension {x.n} != network dimension {report.net.n}")
    if report.table is None or report.labels is None:
        raise ValueError("report was built without its transition table")
    orbit = report.orbits[int(report.labels[x.bits])]
    if x.bits in endpoints(x.n):
        return Endpoint(orbit)
    if orbit.states:
        on_orbit = set(orbit.states)
    else:
        on_orbit = set(_orbit_members(report.table, orbit.min_state))
    steps = 0
    s = x.bits
    while s not in on_orbit:
        s = int(report.table[s])
        steps += 1
    if steps == 0:
        return Bpp(orbit)
    return Epp(orbit, steps)


def _orbit_members(table: np.ndarray, start: int) -> list[int]:
    out = [start]
    s = int(table[start])
    while s != start:
        out.append(s)
        s = int(table[s])
    return out


def orbit_states(report: AttractorReport, orbit: Orbit) -> list[int]:
    """Full member list, re-derived from the minimal state when it was capped."""
    if orbit.states:
        return list(orbit.states)
    return _orbit_members(report.table, orbit.min_state)


# ---------------------------------------------------------------------------
# Reference implementation: no numpy, no bit tricks. Only used as a test oracle.

def naive_analyze(net: Pbnn) -> AttractorReport:
    from pbnn.core import step_direct

    n = net.n
    size = 1 << n
    succ = [step_direct(BinaryState(n, s), net).bits for s in range(size)]
    cycles: dict[int, list[int]] = {}  # min state -> orbit order
    owner = [-1] * size  # min state of the orbit each state falls into
    for s in range(size):
        path = []
        index: dict[int, int] = {}
        x = s
        while owner[x] == -1 and x not in index:
            index[x] = len(path)
            path.append(x)
            x = succ[x]
        if owner[x] == -1:
            cyc = path[index[x]:]
            m = min(cyc)
            k = cyc.index(m)
            cycles[m] = cyc[k:] + cyc[:k]
            target = m
        else:
            target = owner[x]
        for y in path:
            owner[y] = target
    lo, hi = 0, size - 1
    orbits = []
    for m in sorted(cycles):
        cyc = cycles[m]
        members = owner.count(m)
        orbits.append(
            Orbit(
                period=len(cyc),
                min_state=m,
                basin_size=members - len(cyc),
                contains_endpoint=lo in cyc or hi in cyc,
                states=tuple(cyc) if len(cyc) <= ORBIT_STATE_CAP else (),
            )
        )
    return AttractorReport(net, tuple(orbits))
