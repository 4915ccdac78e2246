"""Two-part evolutionary search for globally stable periodic orbits.

Part 1 mutates a random population until some individual generates a GBPO.
Part 2 keeps mutating the population together with samples from the external
population (EP), archiving every new GBPO generator and keeping the top M
offspring each generation.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from pbnn.attractor import DEFAULT_MAX_N, ExhaustiveBoundError, analyze, best_orbit
from pbnn.canonical import Permutation, cpid
from pbnn.core import Pbnn, check_cn, check_n

log = logging.getLogger(__name__)

RNG_NAME = "numpy.random.Generator(PCG64)"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SearchConfig:
    n: int = 17
    cn: int = 1
    m: int = 50
    g_m1: int = 1000
    m_e: int = 50
    g_max: int = 1000
    seed: int = 0
    max_n: int = DEFAULT_MAX_N

    def __post_init__(self) -> None:
        check_n(self.n)
        check_cn(self.cn)
        for name in ("m", "m_e"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("g_m1", "g_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n > self.max_n:
            raise ExhaustiveBoundError(f"n={self.n} exceeds the exhaustive bound {self.max_n}")
        if not _is_prime(self.n):
            log.warning("n=%d is not prime; the search is defined for any n but tuned for primes", self.n)

    @property
    def f_max_num(self) -> int:
        return (1 << self.n) - 2


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


@dataclass(frozen=True)
class Individual:
    perm: Permutation
    f1_num: int
    n_states: int
    gbpo_period: Optional[int] = None

    @property
    def fitness(self) -> Fraction:
        return Fraction(self.f1_num, self.n_states)


@dataclass(frozen=True)
class ArchiveEntry:
    cpid: Permutation
    period: int
    f1_num: int
    generation: int
    part: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cpid"] = str(self.cpid)
        return d


@dataclass
class ExternalPopulation:
    entries: list[ArchiveEntry] = field(default_factory=list)
    _keys: set = field(default_factory=set, repr=False)

    def add(self, ind: Individual, generation: int, part: int, seed: int) -> bool:
        """Archive a GBPO generator; returns False if its CPID is already stored."""
        if ind.gbpo_period is None:
            raise ValueError(f"{ind.perm} does not generate a GBPO")
        if ind.perm in self._keys:
            return False
        self._keys.add(ind.perm)
        self.entries.append(ArchiveEntry(ind.perm, ind.gbpo_period, ind.f1_num, generation, part, seed))
        return True

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, p: Permutation) -> bool:
        return p in self._keys

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    ids = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        ids[i], ids[j] = ids[j], ids[i]
    return Permutation(tuple(ids))


def swap_positions(n: int, rng: np.random.Generator) -> tuple[int, int]:
    """Two distinct 0-based positions, uniform over unordered pairs."""
    j = int(rng.integers(0, n))
    k = int(rng.integers(0, n - 1))
    if k >= j:
        k += 1
    return j, k


def mutate(p: Permutation, rng: np.random.Generator) -> Permutation:
    if p.n < 2:
        raise ValueError("mutation needs n >= 2")
    j, k = swap_positions(p.n, rng)
    return cpid(p.swapped(j, k))


class Evaluator:
    """F1 evaluation memoized by CPID; batches may fan out over threads."""

    def __init__(self, n: int, cn: int, max_n: int = DEFAULT_MAX_N, threads: int = 1):
        self.n = n
        self.cn = cn
        self.max_n = max_n
        self.threads = max(1, threads)
        self.cache: dict[Permutation, Individual] = {}
        self.hits = 0
        self.misses = 0

    def _compute(self, key: Permutation) -> Individual:
        report = analyze(Pbnn(self.n, self.cn, key), max_n=self.max_n)
        g = report.gbpo
        return Individual(key, best_orbit(report).size, report.n_states, g.period if g else None)

    def __call__(self, p: Permutation) -> Individual:
        return self.batch([p])[0]

    def batch(self, perms: Sequence[Permutation]) -> list[Individual]:
        keys = [cpid(p) for p in perms]
        todo: list[Permutation] = []
        pending: set[Permutation] = set()
        for k in keys:
            if k in self.cache or k in pending:
                self.hits += 1
            else:
                pending.add(k)
                todo.append(k)
                self.misses += 1
        if self.threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(self._compute, todo))
        else:
            results = [self._compute(k) for k in todo]
        for k, ind in zip(todo, results):
            self.cache[k] = ind
        return [self.cache[k] for k in keys]


def evaluate(p: Permutation, config: SearchConfig, cache: Evaluator) -> Individual:
    if p.n != config.n:
        raise ValueError(f"permutation has length {p.n}, expected {config.n}")
    return cache(p)


def elitism_select(candidates: Sequence[Individual], m: int) -> list[Individual]:
    if not candidates:
        raise ValueError("no candidates to select from")
    ranked = sorted(candidates, key=lambda ind: (-ind.f1_num, ind.perm.ids))
    return ranked[:m]


@dataclass(frozen=True)
class GenerationRecord:
    part: int
    generation: int
    best_f1_num: int
    ep_size: int
    cache_hits: int


@dataclass
class Found:
    population: list[Individual]
    ep: ExternalPopulation
    generation: int


@dataclass
class Exhausted:
    generation: int


Logger = Optional[Callable[[GenerationRecord], None]]


def part1(config: SearchConfig, rng: np.random.Generator, evaluator: Evaluator,
          on_generation: Logger = None) -> Found | Exhausted:
    """Random population, mutate everyone each generation, stop at the first GBPO."""
    perms = [cpid(random_permutation(config.n, rng)) for _ in range(config.m)]
    g = 0
    while True:
        pop = evaluator.batch(perms)
        ep = ExternalPopulation()
        for ind in pop:
            if ind.f1_num == config.f_max_num and ind.gbpo_period is not None:
                ep.add(ind, g, 1, config.seed)
        if on_generation:
            on_generation(GenerationRecord(1, g, max(i.f1_num for i in pop), len(ep), evaluator.hits))
        if len(ep):
            return Found(pop, ep, g)
        if g >= config.g_m1:
            return Exhausted(g)
        perms = [mutate(ind.perm, rng) for ind in pop]
        g += 1


def part2(found: Found, config: SearchConfig, rng: np.random.Generator, evaluator: Evaluator,
          on_generation: Logger = None) -> ExternalPopulation:
    """Mutate population plus EP samples, archive GBPOs, keep the top M offspring."""
    ep = found.ep
    if not len(ep):
        raise ValueError("part 2 needs a non-empty external population")
    pop = list(found.population)
    for g in range(config.g_max):
        if len(pop) != config.m:
            raise AssertionError(f"population size {len(pop)} != {config.m}")
        if len(ep) <= config.m_e:
            injected = [e.cpid for e in ep.entries]
        else:
            picks = rng.choice(len(ep), size=config.m_e, replace=False)
            injected = [ep.entries[int(i)].cpid for i in picks]
        parents = [ind.perm for ind in pop] + injected
        offspring = evaluator.batch([mutate(p, rng) for p in parents])
        for ind in offspring:
            if ind.f1_num == config.f_max_num and ind.gbpo_period is not None:
                ep.add(ind, g, 2, config.seed)
        pop = elitism_select(offspring, config.m)
        if on_generation:
            on_generation(GenerationRecord(2, g, pop[0].f1_num, len(ep), evaluator.hits))
    return ep


@dataclass
class SearchResult:
    config: SearchConfig
    ep: ExternalPopulation
    found_in_part1: bool
    part1_generation: int
    log: list[GenerationRecord]
    evaluations: int
    cache_hits: int


def search(config: SearchConfig, threads: int = 1, on_generation: Logger = None) -> SearchResult:
    rng = make_rng(config.seed)
    evaluator = Evaluator(config.n, config.cn, config.max_n, threads)
    records: list[GenerationRecord] = []

    def record(rec: GenerationRecord) -> None:
        records.append(rec)
        if on_generation:
            on_generation(rec)

    outcome = part1(config, rng, evaluator, record)
    if isinstance(outcome, Exhausted):
        log.info("part 1 exhausted after %d generations", outcome.generation)
        return SearchResult(config, ExternalPopulation(), False, outcome.generation, records,
                            evaluator.misses, evaluator.hits)
    log.info("part 1 found %d GBPO generator(s) at generation %d", len(outcome.ep), outcome.generation)
    ep = part2(outcome, config, rng, evaluator, record)
    return SearchResult(config, ep, True, outcome.generation, records, evaluator.misses, evaluator.hits)


def audit(ep: ExternalPopulation | Sequence[ArchiveEntry], n: int, cn: int,
          max_n: int = DEFAULT_MAX_N) -> list[str]:
    """Re-analyze every archived CPID from scratch; returns a list of problems."""
    entries = ep.entries if isinstance(ep, ExternalPopulation) else ep
    problems = []
    f_max = (1 << n) - 2
    for e in entries:
        report = analyze(Pbnn(n, cn, e.cpid), max_n=max_n)
        g = report.gbpo
        if g is None or report.f1_best_num != f_max:
            problems.append(f"{e.cpid}: no GBPO on re-analysis")
        elif g.period != e.period or e.f1_num != f_max:
            problems.append(f"{e.cpid}: recorded period {e.period}, re-analysis gives {g.period}")
    return problems
